#pragma once
#include <cstddef>
#include <functional>
#include <vector>

#include "dbar/cauchy.hpp"
#include "dbar/interp.hpp"
#include "dbar/rng.hpp"

namespace dbar {

// Largest admissible refinement parameter, 2 - sqrt(3).
inline constexpr double kNuMax = 0.2679491924311227065;

// refinement scale (2 - sqrt(3))^3 nu / 6 attached to a refinement parameter
double refinement_scale(double nu);

// Finite union of open pseudohyperbolic disks K = U D(a_j, s_j) inside the
// unit disk. Membership is exact (one pseudo_distance per anchor). Radii must
// lie in (0, 1): a zero radius would make K a null set and every integral
// operator on it trivial, so it is rejected.
class RegionSpec {
 public:
  RegionSpec(FiniteSequence anchors, double radius);
  RegionSpec(FiniteSequence anchors, std::vector<double> radii);

  const FiniteSequence& anchors() const { return anchors_; }
  const std::vector<double>& radii() const { return radii_; }
  std::size_t size() const { return anchors_.size(); }
  double max_radius() const;

  bool contains(cplx z) const;  // strict: rho(z, a_j) < s_j for some j
  std::vector<PseudoDisk> disks() const;
  Neighbourhood fattened(double nu) const;  // open nu-fattening of K

  // Net of points of K with pseudohyperbolic covering radius <= eta: every
  // point of K lies within eta of a net point. Built per anchor disk from
  // concentric pseudo-circles with metric-corrected spacing.
  std::vector<DiskPoint> net(double eta) const;

 private:
  FiniteSequence anchors_;
  std::vector<double> radii_;
};

// f~(w) = ((1 + conj(c) w) / (1 + c conj(w))) * f(g_c(w)) / (1 - |w|^2)
// sampled on a polar grid of radius c_eps; the unimodular prefactor keeps
// |f~| = |f| / (1 - |w|^2), so sup |f~| <= sup |f| / (1 - c_eps^2). Nodes
// where support(g_c(w)) is false are masked out.
GridField pullback_density(const Density& f, cplx center, double c_eps, std::size_t nr,
                           std::size_t ntheta, const std::function<bool(cplx)>& support);

struct SmallWidthConfig {
  std::size_t grid_nr = 96;     // pullback grid, radial nodes
  std::size_t grid_ntheta = 96; // pullback grid, angular nodes
  std::size_t contour_q = 256;  // equispaced contour nodes at radius r/(4M)
  int n_max = 96;               // hard cap on retained series indices
  double tail_tol = 1e-13;      // relative coefficient cutoff (vs sup |f|)
  double agree_tol = 1e-8;      // branch agreement floor at the seam
  QuadratureConfig quad;        // field-route quadrature for the local solver
};

class SmallWidthOperator;
class SmallWidthApplied;

// View of the retained Laurent data of one applied operator: coefficients of
// the expansion sum_n a_n(z) w^n of the glued solution in w = B(z), stored in
// the scaled form a^_n = a_n * R^n (R = contour radius), which keeps every
// entry bounded by the sampled sup of the interpolated trace.
struct LaurentOperatorData {
  const BlaschkeProduct* product = nullptr;
  double contour_radius = 0.0;
  int n_min = 0;  // inclusive
  int n_max = 0;  // inclusive
  const SmallWidthApplied* source = nullptr;
};

// Bounded solution operator for densities supported in a region K contained
// in the sublevel set |B| <= r/(6M) of the Blaschke product over an
// interpolating chain zeta. Construction precomputes everything independent
// of the density: level components, the two-variable interpolation basis,
// contour nodes xi_q at radius r/(4M) with their matrix solvers, and the
// pullback points g_j^{-1}(b_j(xi_q)).
//
// Width scale: c = eps when eps <= r/(6M) (each K_n then sits in
// D(z_n, eps)), else c = lambda/(6M) (the component itself is that small).
// Certificates: ||E_K|| <= 2c/(1-c^2) and ||L_K|| <= 12 c M/(1-c^2).
class SmallWidthOperator {
 public:
  SmallWidthOperator(RegionSpec region, const FiniteSequence& zeta, double eps, double lambda,
                     double r, SmallWidthConfig cfg = {});

  const RegionSpec& region() const { return region_; }
  const FiniteSequence& chain() const { return tvb_.basis().sequence(); }
  const TwoVariableBasis& tvb() const { return tvb_; }
  const LevelComponents& levels() const { return tvb_.levels(); }
  const SmallWidthConfig& config() const { return cfg_; }

  double eps() const { return eps_; }
  double lambda() const { return lambda_; }
  double r() const { return r_; }
  double M() const { return tvb_.M(); }
  double c_eps() const { return c_; }

  double inner_radius() const { return inner_; }     // r/(6M): T1 region |B| > inner
  double contour_radius() const { return contour_; } // r/(4M): coefficient contour
  double mid_radius() const { return mid_; }         // r/(3 sqrt(2) M): branch seam
  double outer_radius() const { return outer_; }     // r/(3M): T2 region |B| < outer

  double ek_certificate() const;    // 2c/(1-c^2)
  double norm_certificate() const;  // 12 c M/(1-c^2)

  cplx contour_node(std::size_t q) const { return nodes_[q]; }
  std::size_t contour_count() const { return nodes_.size(); }

  // Sample the density through every component pullback and build the
  // coefficient caches. Throws if the coefficient tail fails to decay at the
  // index cap.
  SmallWidthApplied apply(const Density& f) const;

 private:
  friend class SmallWidthApplied;
  RegionSpec region_;
  TwoVariableBasis tvb_;
  SmallWidthConfig cfg_;
  double eps_, lambda_, r_, c_;
  double inner_, contour_, mid_, outer_;
  std::vector<cplx> nodes_;      // xi_q on |xi| = contour_
  std::vector<cplx> pullback_;   // g_j^{-1}(b_j(xi_q)), q-major
  std::vector<NeumannSolver> solvers_;  // one per contour node
};

// Everything attached to one density f: component pullbacks f~_n, the trace
// coefficients u_q = P(xi_q)^{-1} (E f~ o b)(xi_q), the scaled Laurent table,
// and the retained index range.
class SmallWidthApplied {
 public:
  int dim() const { return dim_; }
  double f_sup() const { return f_sup_; }  // grid sup of |f| over the masked support
  int n_used() const { return n_used_; }   // retained indices |n| <= n_used
  const SmallWidthOperator& op() const { return *op_; }
  const GridField& component_field(std::size_t n) const { return fields_[n]; }

  // local solve (E f~_n)(g_n^{-1}(z)) on the component V_n containing z;
  // throws when |B(z)| >= r (no component). The field route uses the
  // configured quadrature (singularity frame near the support); the panel
  // route forces the plain cell-sum form, a rational function of the
  // pullback point -- the form the series stages interpolate.
  void ek(cplx z, cplx* out) const;
  void ek_panel(cplx z, cplx* out) const;

  // partial sums of the split trace: t2 = sum_{0 <= n <= n_used} a_n(z) B^n
  // (converges on |B| < r/(3M)), t1 = sum_{-n_used <= n <= -1} (converges on
  // |B| > r/(6M), vanishing as B grows). Returns a geometric tail estimate
  // for the truncation at this point.
  double t1(cplx z, cplx* out) const;
  double t2(cplx z, cplx* out) const;

  // glued solution: ek - t2 when |B(z)| <= mid_radius, t1 beyond. Within 5%
  // of the seam both branches are computed and must agree to
  // agree_tol + 10 * (tail1 + tail2); disagreement throws.
  void eval(cplx z, cplx* out) const;
  std::vector<cplx> eval_batch(const std::vector<cplx>& targets, bool parallel = true) const;

  // holomorphic data H(w)f(z) = sum_{m >= 1} a_{-m}(z) w^{-m} for |w| beyond
  // the inner radius; the contour route evaluates the same function as a
  // discrete Cauchy integral over the cached nodes (valid for |w| beyond the
  // contour radius) and is independent of the truncation.
  void h_series(cplx w, cplx z, cplx* out) const;
  void h_contour(cplx w, cplx z, cplx* out) const;

  // scaled coefficient a^_n[k, comp] and sup over (k, comp) at index n
  cplx coefficient(int n, std::size_t k, int comp) const;
  double coefficient_sup(int n) const;

  LaurentOperatorData laurent_data() const;  // [-n_used, n_used]
  LaurentOperatorData h_data() const;        // [-n_used, -1]

 private:
  friend class SmallWidthOperator;
  SmallWidthApplied() = default;

  // interpolated trace G(z, xi_q) = sum_k g_k(z) u_q[k]
  void trace_at(std::size_t q, const std::vector<cplx>& g, cplx* out) const;
  double series_accum(cplx z, cplx* out, bool positive) const;

  const SmallWidthOperator* op_ = nullptr;
  int dim_ = 1;
  double f_sup_ = 0.0;
  int n_used_ = 0;
  std::vector<GridField> fields_;
  std::vector<cplx> u_;     // q-major, then k, then component
  std::vector<cplx> ahat_;  // (n + n_max)-major, then k, then component
};

struct AssemblyConfig {
  SmallWidthConfig small;
  double nu = kNuMax;         // refinement parameter
  double net_factor = 0.15;   // net covering radius, in units of the scale
  double chain_factor = 0.85; // greedy chain separation, in units of the scale
};

// Sum operator L_K = sum over parts of L_part o M_chi. Groups come from the
// characteristic-boost split of the input chain (general path; a single group
// when the characteristic already clears the threshold), parts from the
// refinement chain at scale eps_nu partitioned so that no eps-cell holds two
// points of the same part. chi assigns every point of K to the first group
// whose eps-cells cover it and, inside, to the first part within eps_nu
// (first-cover-wins, so the masks sum to 1 on K by construction).
class AssembledOperator {
 public:
  struct Part {
    FiniteSequence chain;     // refinement part, characteristic > 1/2
    LambdaSolution geometry;  // lambda, r, M with r/(6M) = eps_nu
    SmallWidthOperator op;    // region = eps_nu-disks around the part chain
  };
  struct Group {
    FiniteSequence zeta;     // chain subset with boosted characteristic
    FiniteSequence zeta_nu;  // refinement chain (== zeta when eps <= eps_nu)
    std::vector<int> labels; // part index per zeta_nu point
    std::vector<Part> parts;
  };

  const RegionSpec& region() const { return region_; }
  const FiniteSequence& zeta() const { return zeta_; }
  double eps() const { return eps_; }
  double nu() const { return cfg_.nu; }
  double eps_nu() const { return eps_nu_; }
  double delta() const { return delta_; }  // certified characteristic floor
  int split_depth_used() const { return depth_; }
  bool general_path() const { return general_; }
  const AssemblyConfig& config() const { return cfg_; }

  const std::vector<Group>& groups() const { return groups_; }
  std::size_t part_count() const { return flat_.size(); }
  const Part& part(std::size_t flat) const;

  // norm certificate: 167 eps/(1-eps) (refined path, eps within the scale) or
  // 389423 eps/(1-eps) (refined path) or
  // 25e6 eps/(1-eps) max{1, log(1/delta)/(1-eps_*)^2} (general path)
  double certificate() const;
  // rigorous alternative: sum of the per-part certificates 12 c M/(1-c^2)
  double summed_certificate() const;
  // cap on the number of parts: 194712/(nu^2 (1-eps)), times the same
  // max{1, ...} factor on the general path
  double part_count_certificate() const;

  // flat part index covering z (first-cover-wins), -1 when z is outside K;
  // throws when z lies in K but no part chain comes within eps_nu (the
  // sampled refinement chain failed to cover the region).
  int chi_index(cplx z) const;

  class Applied {
   public:
    int dim() const { return dim_; }
    double f_sup() const { return f_sup_; }
    const AssembledOperator& op() const { return *op_; }
    std::size_t parts() const { return parts_.size(); }
    const SmallWidthApplied& part(std::size_t flat) const { return parts_[flat]; }

    // sum of the per-part glued evaluations at z (every part contributes:
    // the holomorphic tails extend across the disk)
    void eval(cplx z, cplx* out) const;
    std::vector<cplx> eval_batch(const std::vector<cplx>& targets, bool parallel = true) const;

   private:
    friend class AssembledOperator;
    const AssembledOperator* op_ = nullptr;
    int dim_ = 1;
    double f_sup_ = 0.0;
    std::vector<SmallWidthApplied> parts_;
  };
  // Masks the density by chi part by part and applies every part operator.
  // Assembly and application are single-threaded and deterministic.
  Applied apply(const Density& f) const;

  friend AssembledOperator assemble_refined(const RegionSpec& K, const FiniteSequence& zeta,
                                            double eps, const AssemblyConfig& cfg);
  friend AssembledOperator assemble_general(const RegionSpec& K, const FiniteSequence& zeta,
                                            double eps, double delta, const AssemblyConfig& cfg);

 private:
  AssembledOperator(RegionSpec region, FiniteSequence zeta, double eps, double delta,
                    bool general, int depth, AssemblyConfig cfg);

  RegionSpec region_;
  FiniteSequence zeta_;
  double eps_, delta_, eps_nu_;
  bool general_;
  int depth_;
  AssemblyConfig cfg_;
  std::vector<Group> groups_;
  std::vector<std::pair<int, int>> flat_;  // (group, part) per flat index
};

// Single-group assembly; requires the chain characteristic to clear the
// threshold 1 - (1 - sqrt(eps_*))^2 / 8. The refinement chain is the input
// chain when eps is already within the refinement scale, else a greedy chain
// over the input points plus a metric net of K clipped to the chain cells.
AssembledOperator assemble_refined(const RegionSpec& K, const FiniteSequence& zeta, double eps,
                                   const AssemblyConfig& cfg = {});

// General assembly: splits the chain until every group clears the threshold
// (delta is the certified floor for the input characteristic), forms the
// groups' cell regions, disjointifies them in order, and delegates each group
// to the single-group construction.
AssembledOperator assemble_general(const RegionSpec& K, const FiniteSequence& zeta, double eps,
                                   double delta, const AssemblyConfig& cfg = {});

// Exterior decomposition at a refinement parameter nu in (0, 2 - sqrt(3)]:
// rebuilds the same assembly at nu and represents the base operator outside
// the closed nu-fattening of K as
//   (L_K f)(z) = (E0 f)(z) + sum_i (H_i(B_i(z)) f)(z),
// where B_i runs over the nu-refinement part products, H_i is the part's
// holomorphic data (negative indices only, vanishing at infinity, norm
// certificate (3/5) nu), and E0 is the difference of the two constructions.
class Decomposition {
 public:
  Decomposition(const AssembledOperator& base, double nu);

  double nu() const { return nu_; }
  double eps_nu() const { return refined_.eps_nu(); }
  const AssembledOperator& base() const { return *base_; }
  const AssembledOperator& refined() const { return refined_; }
  double h_certificate() const { return 0.6 * nu_; }
  Neighbourhood fattened() const;  // [K]_nu

  class Applied {
   public:
    int dim() const { return base_.dim(); }
    const AssembledOperator::Applied& base() const { return base_; }
    const AssembledOperator::Applied& refined() const { return refined_; }

    std::size_t blocks() const { return refined_.parts(); }
    cplx block_product(std::size_t i, cplx z) const;  // B_i(z)
    // H_i(w) f (z); series route truncates, contour route is quadrature-exact
    void block_h(std::size_t i, cplx w, cplx z, cplx* out, bool contour = true) const;
    void e0(cplx z, cplx* out) const;  // base eval minus refined eval
    // e0 + sum_i H_i(B_i(z)); equals the base evaluation outside cl([K]_nu)
    void reconstruct(cplx z, cplx* out, bool contour = true) const;

   private:
    friend class Decomposition;
    AssembledOperator::Applied base_, refined_;
  };
  Applied apply(const Density& f) const;

 private:
  const AssembledOperator* base_;
  double nu_;
  AssembledOperator refined_;
};

Decomposition decomposition_data(const AssembledOperator& a, double nu);

// Empirical modulus of continuity of an applied operator in the
// pseudohyperbolic metric: max oscillation over sampled pairs at exact
// rho-separation base_scale * 2^{-k}, k = 0 .. scales-1. Pair anchors mix
// uniform disk points with points near the region anchors and seams.
struct RhoContinuityReport {
  std::vector<double> scales;
  std::vector<double> oscillation;
};
RhoContinuityReport continuity_report(const AssembledOperator::Applied& lf, Rng& rng,
                                      std::size_t pairs_per_scale = 64, std::size_t scales = 8,
                                      double base_scale = 0.5);

}  // namespace dbar
