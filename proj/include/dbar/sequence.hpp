#pragma once
#include <optional>
#include <vector>

#include "dbar/geometry.hpp"

namespace dbar {

// Finite set of pairwise distinct disk points, kept in input order.
class FiniteSequence {
 public:
  FiniteSequence() = default;
  explicit FiniteSequence(std::vector<DiskPoint> pts);

  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  const DiskPoint& operator[](std::size_t i) const { return pts_[i]; }
  const std::vector<DiskPoint>& points() const { return pts_; }
  std::vector<cplx> values() const;

  // min over k of prod_{j != k} rho(z_j, z_k); 1 for a singleton.
  // Computed through log sums; cached.
  double characteristic() const;

  FiniteSequence subset(const std::vector<std::size_t>& idx) const;

 private:
  std::vector<DiskPoint> pts_;
  mutable std::optional<double> delta_;
};

// Upper bounds for the constant of interpolation in terms of the
// characteristic delta; `value` is the minimum of the two classical terms,
// `lower` the elementary 1/delta lower bound.
struct InterpolationBound {
  double jones;  // (2e/delta) log(e/delta^2)
  double earl;   // ((1 + sqrt(1-delta^2)) / delta)^2
  double value;
  double lower;
};
InterpolationBound interpolation_constant_bound(double delta);

// Scan candidates in input order, keep a point iff it is >= eps away from
// everything already kept. Output is eps-separated and every candidate lies
// within eps of some output point.
FiniteSequence greedy_chain(const std::vector<DiskPoint>& candidates, double eps);

struct ChainCountBounds {
  double lower;  // R^2 (1-L^2) / ((1-R^2) L^2)
  double upper;  // (2R+L)^2 / ((1-R^2) L^2)
};
ChainCountBounds chain_count_bounds(double R, double L);

struct ChainPartition {
  std::vector<FiniteSequence> parts;
  std::vector<int> labels;    // part index per input point, input order
  int max_multiplicity = 0;   // max over cells of points sharing a cell
};

// Colour the points of zeta_nu so that every cell D(z, eps), z in zeta, meets
// each part in at most one point. Greedy smallest-free-colour in input order.
// Rejects if some zeta_nu point lies in no cell.
ChainPartition refine_partition(const FiniteSequence& zeta,
                                const FiniteSequence& zeta_nu, double eps);

struct SplitResult {
  FiniteSequence first;
  FiniteSequence second;
  std::vector<int> labels;
  double min_characteristic;  // min of the two parts
  bool exhaustive;            // true when all bipartitions were scanned
};

// Bipartition maximizing min(delta(A), delta(B)). Exhaustive for sizes <= 18
// (ties broken towards the lexicographically smallest assignment), seeded
// local search beyond that. Always certifies min >= sqrt(delta) and throws
// otherwise.
SplitResult split_sqrt_delta(const FiniteSequence& seq);

// Characteristic floor 1 - (1 - sqrt(eps_*))^2 / 8 with eps_* = max(1/2, eps).
double split_threshold(double eps);

// Least l with 2^l >= log(delta) / log(threshold) when delta is below the
// threshold, else 0; guarantees delta^(1/2^l) >= threshold.
int split_depth(double delta, double eps);

// Recursively split until every leaf has characteristic >= threshold
// (singletons stop immediately). Leaf count never exceeds 2^split_depth.
std::vector<FiniteSequence> split_to_threshold(const FiniteSequence& seq, double eps,
                                               int* depth_used = nullptr);

}  // namespace dbar
