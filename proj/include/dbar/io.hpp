#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbar/field.hpp"
#include "dbar/pipeline.hpp"
#include "dbar/sequence.hpp"

namespace dbar::io {

// Any malformed input file lands here; the message carries the file name and
// the JSON path / array index of the offending element.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shortest round-trip decimal form of x (to_chars); the one formatting used
// for every number we emit, so rewriting a file never perturbs its bytes.
std::string format_double(double x);

// Sequence file: JSON array of [re, im] pairs, e.g. [[0,0],[0.5,0]].
// Loader enforces |z| < 1 - 1e-12 and pairwise distinctness.
FiniteSequence load_sequence(const std::string& path);
void save_sequence(const std::string& path, const FiniteSequence& seq);

// Region file: {"anchors": [[re,im], ...], "radius": s} with one shared
// pseudohyperbolic radius, or "radii": [s_0, ...] with one per anchor.
RegionSpec load_region(const std::string& path);
void save_region(const std::string& path, const RegionSpec& region);

// Density file, a registry of closed forms:
//   {"kind": "zero", "dim": d}
//   {"kind": "constant", "dim": d, "value": [[re,im], ...]}   (d pairs)
//   {"kind": "bumps", "dim": d, "terms": [{"component": c,
//       "center": [re,im], "radius": s, "amplitude": [re,im],
//       "power": p}, ...]}
// A bump contributes amplitude * (1 - |z-center|^2 / radius^2)^power inside
// the Euclidean disk D(center, radius) and 0 outside (power >= 1, default 3).
// "constant" and "zero" extend over the whole disk; the operator masks them
// by its region, which is how an indicator density of K is expressed.
Density load_density(const std::string& path);
Density zero_density(int dim);

// Grid field file: {"format": "dbar-gridfield", "nr": .., "ntheta": ..,
// "s": .., "dim": .., "values": [re, im, ...], "mask": [0|1, ...]}.
// Values are radial-major (node = i*ntheta + k) with components innermost,
// interleaved re/im. Numbers travel as JSON text in shortest round-trip
// form, so the format has no byte-order dependence.
void save_grid_field(const std::string& path, const GridField& f);
GridField load_grid_field(const std::string& path);

// One structured config consumed by the CLI; `init` emits the defaults.
// Every randomized stage draws from `seed`, so a fixed config reproduces
// reports and manifests byte for byte.
struct RunConfig {
  // pipeline sizes (mirror SmallWidthConfig)
  std::size_t grid_nr = 96;
  std::size_t grid_ntheta = 96;
  std::size_t contour_q = 256;
  int n_max = 96;
  double tail_tol = 1e-13;
  double agree_tol = 1e-8;
  // assembly scales
  double eps = 8e-4;   // covering scale of the chain
  double nu = kNuMax;  // refinement parameter
  double delta = 0.5;  // certified characteristic floor (general path)
  // verification knobs
  double tol = 1e-8;            // generic identity tolerance
  std::uint64_t seed = 20260815ull;
  int dim = 1;
  bool parallel = true;
  bool sabotage = false;  // mutation canary: negates the quadrature kernel
  std::size_t verify_fields = 6;    // random fields per bound check
  std::size_t verify_pairs = 40;    // pairs per field
  std::size_t verify_samples = 300; // generic sample budget per check
  // solution export sampling
  std::size_t sample_nr = 16;
  std::size_t sample_ntheta = 32;
  double sample_radius = 0.9;
  // paths
  std::string sequence_path;
  std::string region_path;
  std::string density_path;
  std::string out_dir = ".";
};

RunConfig load_config(const std::string& path);
std::string config_text(const RunConfig& cfg);
void save_config(const std::string& path, const RunConfig& cfg);

// SmallWidthConfig slice of a RunConfig.
SmallWidthConfig small_config(const RunConfig& cfg);
AssemblyConfig assembly_config(const RunConfig& cfg);

// Operator manifest: every number the assembly derived (per group: chains and
// labels; per part: chain, lambda, r, M, eps_nu, the four derived radii, the
// contour size and index cap, certificates), enough to reproduce a run
// bit for bit given the same grids.
std::string manifest_text(const AssembledOperator& op);
void save_manifest(const std::string& path, const AssembledOperator& op);

// CSV sample table "re,im,f0_re,f0_im,..." with one row per point.
std::string solution_csv(const std::vector<cplx>& points, const std::vector<cplx>& values,
                         int dim);
void save_solution_csv(const std::string& path, const std::vector<cplx>& points,
                       const std::vector<cplx>& values, int dim);

// CSV sample table "re,im,absB" tracing the boundary of every level
// component at each requested level value t in (0, r): points are
// local_inverse(n, t e^{i theta}) over `samples` angles, |B| recomputed from
// the product as a consistency read-back rather than copied from t.
std::string level_contour_csv(const LevelComponents& levels,
                              const std::vector<double>& level_values, std::size_t samples);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace dbar::io
