#include "dbar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace dbar {

namespace {

constexpr double kSlack = 1e-6;    // absorbs the lambda-solve residual
constexpr double kTieTol = 1e-12;  // branch ties on radius comparisons

std::string part_tag(std::size_t group, std::size_t part) {
  return "group " + std::to_string(group) + ", part " + std::to_string(part);
}

double min_distance(cplx z, const FiniteSequence& seq) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    best = std::min(best, pseudo_distance(z, seq[i].value()));
  }
  return best;
}

QuadratureConfig panel_config(QuadratureConfig q) {
  q.frame_switch = 0.0;  // plain cell-sum form, rational in the target
  return q;
}

}  // namespace

double refinement_scale(double nu) {
  if (!(nu > 0.0) || nu > kNuMax * (1.0 + 1e-12)) {
    throw std::invalid_argument("refinement parameter must lie in (0, 2 - sqrt(3)]");
  }
  return kNuMax * kNuMax * kNuMax * nu / 6.0;
}

// ---------------------------------------------------------------------------
// RegionSpec

RegionSpec::RegionSpec(FiniteSequence anchors, double radius)
    : anchors_(std::move(anchors)), radii_(anchors_.size(), radius) {
  if (anchors_.empty()) throw std::invalid_argument("region needs at least one anchor");
  if (!(radius > 0.0) || radius >= 1.0) {
    throw std::invalid_argument("region radius must lie in (0, 1)");
  }
}

RegionSpec::RegionSpec(FiniteSequence anchors, std::vector<double> radii)
    : anchors_(std::move(anchors)), radii_(std::move(radii)) {
  if (anchors_.empty()) throw std::invalid_argument("region needs at least one anchor");
  if (radii_.size() != anchors_.size()) {
    throw std::invalid_argument("one radius per anchor required");
  }
  for (double s : radii_) {
    if (!(s > 0.0) || s >= 1.0) {
      throw std::invalid_argument("region radius must lie in (0, 1)");
    }
  }
}

double RegionSpec::max_radius() const {
  return *std::max_element(radii_.begin(), radii_.end());
}

bool RegionSpec::contains(cplx z) const {
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (pseudo_distance(z, anchors_[i].value()) < radii_[i]) return true;
  }
  return false;
}

std::vector<PseudoDisk> RegionSpec::disks() const {
  std::vector<PseudoDisk> out;
  out.reserve(anchors_.size());
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    out.emplace_back(anchors_[i], radii_[i]);
  }
  return out;
}

Neighbourhood RegionSpec::fattened(double nu) const { return Neighbourhood(disks(), nu); }

std::vector<DiskPoint> RegionSpec::net(double eta) const {
  if (!(eta > 0.0) || eta >= 1.0) {
    throw std::invalid_argument("net covering radius must lie in (0, 1)");
  }
  std::vector<DiskPoint> out;
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    const cplx a = anchors_[i].value();
    const double s = radii_[i];
    // ring step h and angular spacing h give radial gaps <= eta/2 and ring
    // gaps <= eta/2 in the invariant metric (the 1 - s^2 factor compensates
    // the metric distortion across the disk)
    const double h = 0.5 * eta * (1.0 - s * s);
    const auto rings = static_cast<std::size_t>(std::ceil(s / h));
    for (std::size_t t = 0; t <= rings; ++t) {
      const double rad = std::min(static_cast<double>(t) * h, s * (1.0 - 1e-9));
      if (t == 0) {
        out.emplace_back(a);
        continue;
      }
      const auto slots =
          static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * rad / h));
      for (std::size_t k = 0; k < slots; ++k) {
        const double ang = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) /
                           static_cast<double>(slots);
        out.emplace_back(mobius_shift(a, std::polar(rad, ang)));
      }
      if (out.size() > 2'000'000) {
        throw std::domain_error(
            "metric net would need more than 2e6 points; the covering radius is too fine "
            "for this region");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// pullback_density

GridField pullback_density(const Density& f, cplx center, double c_eps, std::size_t nr,
                           std::size_t ntheta, const std::function<bool(cplx)>& support) {
  if (!f.eval || f.dim < 1) throw std::invalid_argument("density needs dim >= 1 and an evaluator");
  if (!(c_eps > 0.0) || c_eps >= 1.0) {
    throw std::invalid_argument("pullback radius must lie in (0, 1)");
  }
  GridField out(PolarGrid(nr, ntheta, c_eps), f.dim);
  Density wrapped;
  wrapped.dim = f.dim;
  wrapped.eval = [&f, center](cplx w, cplx* o) {
    f.eval(mobius_shift(center, w), o);
    const cplx pref = (1.0 + std::conj(center) * w) / (1.0 + center * std::conj(w));
    const cplx scale = pref / (1.0 - std::norm(w));
    for (int c = 0; c < f.dim; ++c) o[c] *= scale;
  };
  std::function<bool(cplx)> sup;
  if (support) {
    sup = [&support, center](cplx w) { return support(mobius_shift(center, w)); };
  }
  out.sample(wrapped, sup);
  return out;
}

// ---------------------------------------------------------------------------
// SmallWidthOperator

SmallWidthOperator::SmallWidthOperator(RegionSpec region, const FiniteSequence& zeta, double eps,
                                       double lambda, double r, SmallWidthConfig cfg)
    : region_(std::move(region)),
      tvb_(zeta, lambda, r),
      cfg_(cfg),
      eps_(eps),
      lambda_(lambda),
      r_(r) {
  if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("eps must lie in (0, 1)");
  if (cfg_.grid_nr < 8 || cfg_.grid_ntheta < 8) {
    throw std::invalid_argument("pullback grids need at least 8 nodes per direction");
  }
  if (cfg_.contour_q < 16) throw std::invalid_argument("need at least 16 contour nodes");
  if (cfg_.n_max < 8) throw std::invalid_argument("series cap must be at least 8");
  const double delta = zeta.characteristic();
  if (r_ > level_radius(delta, lambda_) * (1.0 + 1e-12)) {
    throw std::invalid_argument("level radius exceeds the admissible bound for this chain");
  }
  const double M = tvb_.M();
  inner_ = r_ / (6.0 * M);
  contour_ = r_ / (4.0 * M);
  outer_ = tvb_.w_radius();
  mid_ = r_ / (3.0 * std::numbers::sqrt2 * M);
  c_ = (eps_ <= inner_ * (1.0 + kSlack)) ? eps_ : lambda_ / (6.0 * M);

  // the region must keep |B| within the inner radius: each anchor disk sits
  // inside D(z_n, rho(a, z_n) (+) s) for the nearest zero, and |B| <= rho
  const FiniteSequence& zeros = tvb_.basis().sequence();
  for (std::size_t i = 0; i < region_.size(); ++i) {
    const double reach =
        pseudo_sum(min_distance(region_.anchors()[i].value(), zeros), region_.radii()[i]);
    if (reach > inner_ * (1.0 + kSlack)) {
      throw std::invalid_argument("region anchor " + std::to_string(i) +
                                  " escapes the inner sublevel set r/(6M) of the chain product");
    }
  }

  const std::size_t Q = cfg_.contour_q;
  const std::size_t K = zeros.size();
  nodes_.resize(Q);
  pullback_.resize(Q * K);
  solvers_.reserve(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    nodes_[q] = std::polar(contour_, 2.0 * std::numbers::pi * static_cast<double>(q) /
                                         static_cast<double>(Q));
    for (std::size_t j = 0; j < K; ++j) {
      pullback_[q * K + j] =
          mobius_inverse(zeros[j].value(), levels().local_inverse(j, nodes_[q]));
    }
    solvers_.push_back(assemble_solver(tvb_.basis(), levels(), nodes_[q]));
  }

  // escape scan: nothing of the region may live between the pullback radius
  // and the widest pseudo-radius a component can reach, lambda/(6M)
  const double top = std::max(c_ * 1.05, (lambda_ / (6.0 * M)) * 1.001);
  const std::size_t steps = 24, angles = 64;
  for (std::size_t n = 0; n < K; ++n) {
    const cplx zn = zeros[n].value();
    for (std::size_t i = 0; i < steps; ++i) {
      const double rad = c_ * 1.0125 *
                         std::pow(top / (c_ * 1.0125),
                                  static_cast<double>(i) / static_cast<double>(steps - 1));
      for (std::size_t k = 0; k < angles; ++k) {
        const double ang = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) /
                           static_cast<double>(angles);
        const cplx z = mobius_shift(zn, std::polar(rad, ang));
        if (region_.contains(z) && levels().component_of(z) == static_cast<int>(n)) {
          throw std::invalid_argument("sampled region escapes the pullback disk of component " +
                                      std::to_string(n) +
                                      "; the region is wider than the chain scale allows");
        }
      }
    }
  }
}

double SmallWidthOperator::ek_certificate() const { return 2.0 * c_ / (1.0 - c_ * c_); }

double SmallWidthOperator::norm_certificate() const {
  return 12.0 * c_ * tvb_.M() / (1.0 - c_ * c_);
}

SmallWidthApplied SmallWidthOperator::apply(const Density& f) const {
  if (!f.eval || f.dim < 1) throw std::invalid_argument("density needs dim >= 1 and an evaluator");
  SmallWidthApplied a;
  a.op_ = this;
  a.dim_ = f.dim;
  const std::size_t K = chain().size();
  const std::size_t Q = nodes_.size();
  const int d = f.dim;

  // component pullbacks, masked to the region inside each component
  a.fields_.reserve(K);
  for (std::size_t n = 0; n < K; ++n) {
    const cplx zn = chain()[n].value();
    auto support = [this, n](cplx z) {
      return region_.contains(z) && levels().component_of(z) == static_cast<int>(n);
    };
    a.fields_.push_back(
        pullback_density(f, zn, c_, cfg_.grid_nr, cfg_.grid_ntheta, support));
  }

  // grid sup of |f| over the masked support (undo the pullback weight)
  double fsup = 0.0;
  for (const GridField& fld : a.fields_) {
    for (std::size_t node : fld.masked_nodes()) {
      const double rad = fld.grid().radius(node / fld.grid().ntheta);
      fsup = std::max(fsup, fld.point_norm(node) * (1.0 - rad * rad));
    }
  }
  a.f_sup_ = fsup;

  // contour trace u_q = P(xi_q)^{-1} (E f~ o b)(xi_q), panel quadrature
  const QuadratureConfig src = panel_config(cfg_.quad);
  a.u_.assign(Q * K * d, cplx{});
  std::vector<cplx> cvec(K * d), tmp(d), rhs(K);
  for (std::size_t q = 0; q < Q; ++q) {
    for (std::size_t j = 0; j < K; ++j) {
      cauchy_solve(a.fields_[j], pullback_[q * K + j], tmp.data(), src);
      for (int c = 0; c < d; ++c) cvec[j * d + c] = tmp[c];
    }
    for (int c = 0; c < d; ++c) {
      for (std::size_t j = 0; j < K; ++j) rhs[j] = cvec[j * d + c];
      const std::vector<cplx> x = solvers_[q].solve(rhs);
      for (std::size_t j = 0; j < K; ++j) a.u_[(q * K + j) * d + c] = x[j];
    }
  }

  // scaled coefficient table a^_n[k, comp] for |n| <= cap
  const int cap = cfg_.n_max;
  a.ahat_.assign(static_cast<std::size_t>(2 * cap + 1) * K * d, cplx{});
  for (std::size_t q = 0; q < Q; ++q) {
    for (int n = -cap; n <= cap; ++n) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(q) *
                         static_cast<double>(n) / static_cast<double>(Q);
      const cplx phase = std::polar(1.0, ang);
      const std::size_t base = static_cast<std::size_t>(n + cap) * K * d;
      const std::size_t ubase = q * K * d;
      for (std::size_t t = 0; t < K * static_cast<std::size_t>(d); ++t) {
        a.ahat_[base + t] += phase * a.u_[ubase + t];
      }
    }
  }
  const double norm = 1.0 / static_cast<double>(Q);
  for (cplx& v : a.ahat_) v *= norm;

  // retained range: stop once the seam-weighted coefficient sup stays below
  // the tail cutoff; at the cap, the weights must at least be decaying
  if (a.f_sup_ == 0.0) {
    a.n_used_ = 0;
    return a;
  }
  const double cut = cfg_.tail_tol * a.f_sup_;
  const double qpos = mid_ / contour_, qneg = contour_ / mid_;
  std::vector<double> weight(static_cast<std::size_t>(cap) + 1, 0.0);
  int chosen = cap, run = 0;
  for (int n = 1; n <= cap; ++n) {
    weight[n] = std::max(a.coefficient_sup(n) * std::pow(qpos, n),
                         a.coefficient_sup(-n) * std::pow(qneg, n));
    if (weight[n] < cut) {
      if (++run >= 3 && n >= 8) {
        chosen = n;
        break;
      }
    } else {
      run = 0;
    }
  }
  a.n_used_ = chosen;
  if (chosen == cap && cap >= 16) {
    double recent = 0.0, earlier = 0.0;
    for (int n = cap - 7; n <= cap; ++n) recent += weight[n];
    for (int n = cap - 15; n <= cap - 8; ++n) earlier += weight[n];
    if (recent >= earlier && recent > cut) {
      throw std::runtime_error(
          "coefficient tail does not decay at the series cap; the sampled data is not "
          "holomorphic across the contour");
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// SmallWidthApplied

void SmallWidthApplied::ek(cplx z, cplx* out) const {
  const int n = op_->levels().component_of(z);
  if (n < 0) {
    throw std::invalid_argument("point lies outside every level component of the chain product");
  }
  cauchy_solve(fields_[static_cast<std::size_t>(n)],
               mobius_inverse(op_->chain()[static_cast<std::size_t>(n)].value(), z), out,
               op_->cfg_.quad);
}

void SmallWidthApplied::ek_panel(cplx z, cplx* out) const {
  const int n = op_->levels().component_of(z);
  if (n < 0) {
    throw std::invalid_argument("point lies outside every level component of the chain product");
  }
  cauchy_solve(fields_[static_cast<std::size_t>(n)],
               mobius_inverse(op_->chain()[static_cast<std::size_t>(n)].value(), z), out,
               panel_config(op_->cfg_.quad));
}

void SmallWidthApplied::trace_at(std::size_t q, const std::vector<cplx>& g, cplx* out) const {
  const std::size_t K = g.size();
  const int d = dim_;
  for (int c = 0; c < d; ++c) out[c] = cplx{};
  const std::size_t base = q * K * d;
  for (std::size_t k = 0; k < K; ++k) {
    const cplx gk = g[k];
    for (int c = 0; c < d; ++c) out[c] += gk * u_[base + k * d + c];
  }
}

double SmallWidthApplied::series_accum(cplx z, cplx* out, bool positive) const {
  const std::size_t K = op_->chain().size();
  const int d = dim_, cap = op_->cfg_.n_max;
  for (int c = 0; c < d; ++c) out[c] = cplx{};
  if (n_used_ == 0 && !positive) return 0.0;

  std::vector<cplx> g(K);
  op_->tvb().basis().eval_all(z, g.data());
  const cplx B = op_->levels().product().eval(z);

  double last = 0.0;
  if (positive) {
    const cplx w = B / op_->contour_radius();
    cplx wp = 1.0;
    for (int n = 0; n <= n_used_; ++n) {
      const std::size_t base = static_cast<std::size_t>(n + cap) * K * d;
      double term = 0.0;
      for (int c = 0; c < d; ++c) {
        cplx s{};
        for (std::size_t k = 0; k < K; ++k) s += g[k] * ahat_[base + k * d + c];
        s *= wp;
        out[c] += s;
        term += std::norm(s);
      }
      last = std::sqrt(term);
      wp *= w;
    }
    const double q = std::abs(B) / op_->outer_radius();
    return q < 1.0 ? last * q / (1.0 - q) : std::numeric_limits<double>::infinity();
  }
  const cplx v = op_->contour_radius() / B;
  cplx vp = v;
  for (int m = 1; m <= n_used_; ++m) {
    const std::size_t base = static_cast<std::size_t>(cap - m) * K * d;
    double term = 0.0;
    for (int c = 0; c < d; ++c) {
      cplx s{};
      for (std::size_t k = 0; k < K; ++k) s += g[k] * ahat_[base + k * d + c];
      s *= vp;
      out[c] += s;
      term += std::norm(s);
    }
    last = std::sqrt(term);
    vp *= v;
  }
  const double q = op_->inner_radius() / std::abs(B);
  return q < 1.0 ? last * q / (1.0 - q) : std::numeric_limits<double>::infinity();
}

double SmallWidthApplied::t1(cplx z, cplx* out) const { return series_accum(z, out, false); }
double SmallWidthApplied::t2(cplx z, cplx* out) const { return series_accum(z, out, true); }

void SmallWidthApplied::eval(cplx z, cplx* out) const {
  const int d = dim_;
  const double wb = std::abs(op_->levels().product().eval(z));
  const double mid = op_->mid_radius();
  const bool inner_branch = wb <= mid * (1.0 + kTieTol);
  const bool window = wb >= mid / 1.05 && wb <= mid * 1.05;

  std::vector<cplx> s2(d), s1(d), field(d);
  double tail2 = 0.0, tail1 = 0.0;
  if (inner_branch || window) tail2 = t2(z, s2.data());
  if (!inner_branch || window) tail1 = t1(z, s1.data());

  if (window) {
    // panel-consistent agreement of the two series branches across the seam
    std::vector<cplx> panel(d);
    ek_panel(z, panel.data());
    double diff = 0.0;
    for (int c = 0; c < d; ++c) diff += std::norm(panel[c] - s2[c] - s1[c]);
    diff = std::sqrt(diff);
    const double allow = op_->cfg_.agree_tol + 10.0 * (tail1 + tail2);
    if (diff > allow) {
      throw std::runtime_error(
          "branch disagreement at the seam exceeds the agreement allowance");
    }
  }

  if (inner_branch) {
    ek(z, field.data());
    for (int c = 0; c < d; ++c) out[c] = field[c] - s2[c];
  } else {
    for (int c = 0; c < d; ++c) out[c] = s1[c];
  }
}

std::vector<cplx> SmallWidthApplied::eval_batch(const std::vector<cplx>& targets,
                                                bool parallel) const {
  std::vector<cplx> out(targets.size() * static_cast<std::size_t>(dim_));
  std::exception_ptr err = nullptr;
  const auto count = static_cast<std::ptrdiff_t>(targets.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    if (err) continue;
    try {
      eval(targets[static_cast<std::size_t>(i)],
           out.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

void SmallWidthApplied::h_series(cplx w, cplx z, cplx* out) const {
  if (std::abs(w) <= op_->inner_radius() * (1.0 + 1e-9)) {
    throw std::invalid_argument("holomorphic data only converges beyond the inner radius");
  }
  const std::size_t K = op_->chain().size();
  const int d = dim_, cap = op_->cfg_.n_max;
  for (int c = 0; c < d; ++c) out[c] = cplx{};
  if (n_used_ == 0) return;
  std::vector<cplx> g(K);
  op_->tvb().basis().eval_all(z, g.data());
  const cplx v = op_->contour_radius() / w;
  cplx vp = v;
  for (int m = 1; m <= n_used_; ++m) {
    const std::size_t base = static_cast<std::size_t>(cap - m) * K * d;
    for (int c = 0; c < d; ++c) {
      cplx s{};
      for (std::size_t k = 0; k < K; ++k) s += g[k] * ahat_[base + k * d + c];
      out[c] += s * vp;
    }
    vp *= v;
  }
}

void SmallWidthApplied::h_contour(cplx w, cplx z, cplx* out) const {
  if (std::abs(w) <= op_->contour_radius() * (1.0 + 1e-9)) {
    throw std::invalid_argument("contour route needs |w| beyond the contour radius");
  }
  const std::size_t K = op_->chain().size();
  const std::size_t Q = op_->contour_count();
  const int d = dim_;
  std::vector<cplx> g(K), tr(d);
  op_->tvb().basis().eval_all(z, g.data());
  for (int c = 0; c < d; ++c) out[c] = cplx{};
  for (std::size_t q = 0; q < Q; ++q) {
    trace_at(q, g, tr.data());
    const cplx xi = op_->contour_node(q);
    const cplx kern = xi / (w - xi);
    for (int c = 0; c < d; ++c) out[c] += tr[c] * kern;
  }
  const double norm = 1.0 / static_cast<double>(Q);
  for (int c = 0; c < d; ++c) out[c] *= norm;
}

cplx SmallWidthApplied::coefficient(int n, std::size_t k, int comp) const {
  const int cap = op_->cfg_.n_max;
  if (n < -cap || n > cap || k >= op_->chain().size() || comp < 0 || comp >= dim_) {
    throw std::invalid_argument("coefficient index out of range");
  }
  const std::size_t K = op_->chain().size();
  return ahat_[static_cast<std::size_t>(n + cap) * K * dim_ + k * dim_ +
               static_cast<std::size_t>(comp)];
}

double SmallWidthApplied::coefficient_sup(int n) const {
  const int cap = op_->cfg_.n_max;
  if (n < -cap || n > cap) throw std::invalid_argument("coefficient index out of range");
  const std::size_t K = op_->chain().size();
  const std::size_t base = static_cast<std::size_t>(n + cap) * K * dim_;
  double sup = 0.0;
  for (std::size_t t = 0; t < K * static_cast<std::size_t>(dim_); ++t) {
    sup = std::max(sup, std::abs(ahat_[base + t]));
  }
  return sup;
}

LaurentOperatorData SmallWidthApplied::laurent_data() const {
  return {&op_->levels().product(), op_->contour_radius(), -n_used_, n_used_, this};
}

LaurentOperatorData SmallWidthApplied::h_data() const {
  return {&op_->levels().product(), op_->contour_radius(), -n_used_, -1, this};
}

// ---------------------------------------------------------------------------
// assembly

namespace {

AssembledOperator::Group build_group(const RegionSpec& K, const FiniteSequence& zg, double eps,
                                     double eps_nu, const AssemblyConfig& cfg,
                                     std::size_t group_index) {
  AssembledOperator::Group g;
  g.zeta = zg;
  if (eps <= eps_nu * (1.0 + 1e-12)) {
    g.zeta_nu = zg;  // the chain is already at the refinement scale
  } else {
    std::vector<DiskPoint> cands = zg.points();
    const double eta = cfg.net_factor * eps_nu;
    for (const DiskPoint& p : K.net(eta)) {
      if (min_distance(p.value(), zg) < eps) cands.push_back(p);
    }
    const RegionSpec cells(zg, eps);
    for (const DiskPoint& p : cells.net(eta)) {
      if (K.contains(p.value())) cands.push_back(p);
    }
    g.zeta_nu = greedy_chain(cands, cfg.chain_factor * eps_nu);
  }
  const ChainPartition partition = refine_partition(zg, g.zeta_nu, eps);
  g.labels = partition.labels;
  g.parts.reserve(partition.parts.size());
  for (std::size_t i = 0; i < partition.parts.size(); ++i) {
    const FiniteSequence& chain = partition.parts[i];
    const double delta_i = chain.characteristic();
    if (!(delta_i > 0.5)) {
      throw std::runtime_error("refinement characteristic fell to 1/2 at " +
                               part_tag(group_index, i));
    }
    LambdaSolution sol = solve_lambda(delta_i, cfg.nu, eps_nu);
    SmallWidthOperator op(RegionSpec(chain, eps_nu), chain, eps_nu, sol.lambda, sol.r, cfg.small);
    g.parts.push_back({chain, sol, std::move(op)});
  }
  return g;
}

void validate_assembly(const FiniteSequence& zeta, double eps, const AssemblyConfig& cfg) {
  if (zeta.empty()) throw std::invalid_argument("chain must be nonempty");
  if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("eps must lie in (0, 1)");
  refinement_scale(cfg.nu);  // validates nu
  // the strict pseudo-metric triangle inequality pseudo_sum(x, y) < x + y
  // makes a unit sum sufficient for the chain to cover the region
  if (!(cfg.net_factor > 0.0) || !(cfg.chain_factor > 0.0) ||
      cfg.net_factor + cfg.chain_factor > 1.0) {
    throw std::invalid_argument(
        "net and chain factors must be positive with sum at most 1 so the greedy chain "
        "covers the region at the refinement scale");
  }
}

}  // namespace

AssembledOperator::AssembledOperator(RegionSpec region, FiniteSequence zeta, double eps,
                                     double delta, bool general, int depth, AssemblyConfig cfg)
    : region_(std::move(region)),
      zeta_(std::move(zeta)),
      eps_(eps),
      delta_(delta),
      eps_nu_(refinement_scale(cfg.nu)),
      general_(general),
      depth_(depth),
      cfg_(cfg) {}

const AssembledOperator::Part& AssembledOperator::part(std::size_t flat) const {
  const auto& [g, p] = flat_.at(flat);
  return groups_[static_cast<std::size_t>(g)].parts[static_cast<std::size_t>(p)];
}

double AssembledOperator::certificate() const {
  if (!general_) {
    const double scale_limit = refinement_scale(kNuMax);
    const double c = eps_ <= scale_limit * (1.0 + 1e-12) ? 167.0 : 389423.0;
    return c * eps_ / (1.0 - eps_);
  }
  const double eps_star = std::max(0.5, eps_);
  const double boost = std::max(1.0, std::log(1.0 / delta_) / ((1.0 - eps_star) * (1.0 - eps_star)));
  return 25e6 * eps_ / (1.0 - eps_) * boost;
}

double AssembledOperator::summed_certificate() const {
  double sum = 0.0;
  for (const Group& g : groups_) {
    for (const Part& p : g.parts) sum += p.op.norm_certificate();
  }
  return sum;
}

double AssembledOperator::part_count_certificate() const {
  const double nu = cfg_.nu;
  const double base = 1.0 / (nu * nu * (1.0 - eps_));
  if (!general_) return 194712.0 * base;
  const double eps_star = std::max(0.5, eps_);
  const double boost = std::max(1.0, std::log(1.0 / delta_) / ((1.0 - eps_star) * (1.0 - eps_star)));
  return 125e5 * base * boost;
}

int AssembledOperator::chi_index(cplx z) const {
  if (!region_.contains(z)) return -1;
  int flat = 0;
  for (const Group& g : groups_) {
    if (min_distance(z, g.zeta) >= eps_) {
      flat += static_cast<int>(g.parts.size());
      continue;
    }
    for (std::size_t i = 0; i < g.parts.size(); ++i) {
      if (min_distance(z, g.parts[i].chain) < eps_nu_) return flat + static_cast<int>(i);
    }
    throw std::runtime_error(
        "refinement chain does not cover the region at a sampled point; increase the net "
        "density");
  }
  throw std::runtime_error(
      "chain cells do not cover the region at a sampled point; the input chain is not an "
      "eps-chain of the region");
}

AssembledOperator::Applied AssembledOperator::apply(const Density& f) const {
  if (!f.eval || f.dim < 1) throw std::invalid_argument("density needs dim >= 1 and an evaluator");
  Applied r;
  r.op_ = this;
  r.dim_ = f.dim;
  r.parts_.reserve(flat_.size());
  for (std::size_t m = 0; m < flat_.size(); ++m) {
    Density masked;
    masked.dim = f.dim;
    masked.eval = [f, this, m](cplx z, cplx* out) {
      if (region_.contains(z) && chi_index(z) == static_cast<int>(m)) {
        f.eval(z, out);
      } else {
        for (int c = 0; c < f.dim; ++c) out[c] = cplx{};
      }
    };
    r.parts_.push_back(part(m).op.apply(masked));
    r.f_sup_ = std::max(r.f_sup_, r.parts_.back().f_sup());
  }
  return r;
}

void AssembledOperator::Applied::eval(cplx z, cplx* out) const {
  const int d = dim_;
  for (int c = 0; c < d; ++c) out[c] = cplx{};
  std::vector<cplx> tmp(d);
  for (const SmallWidthApplied& p : parts_) {
    p.eval(z, tmp.data());
    for (int c = 0; c < d; ++c) out[c] += tmp[c];
  }
}

std::vector<cplx> AssembledOperator::Applied::eval_batch(const std::vector<cplx>& targets,
                                                         bool parallel) const {
  std::vector<cplx> out(targets.size() * static_cast<std::size_t>(dim_));
  std::exception_ptr err = nullptr;
  const auto count = static_cast<std::ptrdiff_t>(targets.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    if (err) continue;
    try {
      eval(targets[static_cast<std::size_t>(i)],
           out.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

AssembledOperator assemble_refined(const RegionSpec& K, const FiniteSequence& zeta, double eps,
                                   const AssemblyConfig& cfg) {
  validate_assembly(zeta, eps, cfg);
  const double delta = zeta.characteristic();
  const double thr = split_threshold(eps);
  if (delta < thr * (1.0 - 1e-12)) {
    throw std::invalid_argument(
        "chain characteristic is below the refinement threshold; use the general assembly");
  }
  AssembledOperator a(K, zeta, eps, delta, /*general=*/false, /*depth=*/0, cfg);
  a.groups_.push_back(build_group(K, zeta, eps, a.eps_nu_, cfg, 0));
  for (std::size_t p = 0; p < a.groups_[0].parts.size(); ++p) a.flat_.emplace_back(0, p);
  return a;
}

AssembledOperator assemble_general(const RegionSpec& K, const FiniteSequence& zeta, double eps,
                                   double delta, const AssemblyConfig& cfg) {
  validate_assembly(zeta, eps, cfg);
  if (!(delta > 0.0) || delta >= 1.0) {
    throw std::invalid_argument("characteristic floor must lie in (0, 1)");
  }
  if (zeta.characteristic() < delta * (1.0 - 1e-12)) {
    throw std::invalid_argument("measured chain characteristic is below the claimed floor");
  }
  int depth = 0;
  const std::vector<FiniteSequence> leaves = split_to_threshold(zeta, eps, &depth);
  AssembledOperator a(K, zeta, eps, delta, /*general=*/true, depth, cfg);
  for (std::size_t gi = 0; gi < leaves.size(); ++gi) {
    a.groups_.push_back(build_group(K, leaves[gi], eps, a.eps_nu_, cfg, gi));
    for (std::size_t p = 0; p < a.groups_.back().parts.size(); ++p) {
      a.flat_.emplace_back(static_cast<int>(gi), static_cast<int>(p));
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Decomposition

namespace {

AssembledOperator rebuild_at(const AssembledOperator& base, double nu) {
  AssemblyConfig cfg = base.config();
  cfg.nu = nu;
  if (base.general_path()) {
    return assemble_general(base.region(), base.zeta(), base.eps(), base.delta(), cfg);
  }
  return assemble_refined(base.region(), base.zeta(), base.eps(), cfg);
}

}  // namespace

Decomposition::Decomposition(const AssembledOperator& base, double nu)
    : base_(&base), nu_(nu), refined_(rebuild_at(base, nu)) {}

Neighbourhood Decomposition::fattened() const { return base_->region().fattened(nu_); }

Decomposition::Applied Decomposition::apply(const Density& f) const {
  Applied r;
  r.base_ = base_->apply(f);
  r.refined_ = refined_.apply(f);
  return r;
}

cplx Decomposition::Applied::block_product(std::size_t i, cplx z) const {
  return refined_.part(i).op().levels().product().eval(z);
}

void Decomposition::Applied::block_h(std::size_t i, cplx w, cplx z, cplx* out,
                                     bool contour) const {
  if (contour) {
    refined_.part(i).h_contour(w, z, out);
  } else {
    refined_.part(i).h_series(w, z, out);
  }
}

void Decomposition::Applied::e0(cplx z, cplx* out) const {
  const int d = dim();
  std::vector<cplx> tmp(d);
  base_.eval(z, out);
  refined_.eval(z, tmp.data());
  for (int c = 0; c < d; ++c) out[c] -= tmp[c];
}

void Decomposition::Applied::reconstruct(cplx z, cplx* out, bool contour) const {
  const int d = dim();
  std::vector<cplx> tmp(d);
  e0(z, out);
  for (std::size_t i = 0; i < blocks(); ++i) {
    block_h(i, block_product(i, z), z, tmp.data(), contour);
    for (int c = 0; c < d; ++c) out[c] += tmp[c];
  }
}

Decomposition decomposition_data(const AssembledOperator& a, double nu) {
  return Decomposition(a, nu);
}

// ---------------------------------------------------------------------------
// continuity report

RhoContinuityReport continuity_report(const AssembledOperator::Applied& lf, Rng& rng,
                                      std::size_t pairs_per_scale, std::size_t scales,
                                      double base_scale) {
  if (!(base_scale > 0.0) || base_scale >= 1.0) {
    throw std::invalid_argument("base scale must lie in (0, 1)");
  }
  const AssembledOperator& op = lf.op();
  const int d = lf.dim();

  // fixed anchor/direction pool, reused at every scale so the oscillation
  // ladder compares like against like
  std::vector<cplx> anchors(pairs_per_scale);
  std::vector<double> dirs(pairs_per_scale);
  const auto& region_anchors = op.region().anchors();
  for (std::size_t i = 0; i < pairs_per_scale; ++i) {
    const double u = rng.uniform();
    if (u < 0.4) {
      anchors[i] = rng.disk_point(0.9);
    } else if (u < 0.8) {
      const auto j = static_cast<std::size_t>(rng.uniform(0.0, 1.0) *
                                              static_cast<double>(region_anchors.size()));
      const cplx a = region_anchors[std::min(j, region_anchors.size() - 1)].value();
      anchors[i] = mobius_shift(a, rng.disk_point(0.25));
    } else {
      const auto m =
          static_cast<std::size_t>(rng.uniform(0.0, 1.0) * static_cast<double>(op.part_count()));
      const FiniteSequence& chain = op.part(std::min(m, op.part_count() - 1)).chain;
      const auto j =
          static_cast<std::size_t>(rng.uniform(0.0, 1.0) * static_cast<double>(chain.size()));
      const cplx p = chain[std::min(j, chain.size() - 1)].value();
      anchors[i] = mobius_shift(p, rng.disk_point(std::min(0.25, 30.0 * op.eps_nu())));
    }
    dirs[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  RhoContinuityReport report;
  std::vector<cplx> va(d), vb(d);
  for (std::size_t k = 0; k < scales; ++k) {
    const double s = base_scale * std::pow(0.5, static_cast<double>(k));
    double osc = 0.0;
    for (std::size_t i = 0; i < pairs_per_scale; ++i) {
      const cplx z1 = anchors[i];
      const cplx z2 = mobius_shift(z1, std::polar(s, dirs[i]));  // rho(z1, z2) = s exactly
      lf.eval(z1, va.data());
      lf.eval(z2, vb.data());
      double diff = 0.0;
      for (int c = 0; c < d; ++c) diff += std::norm(va[c] - vb[c]);
      osc = std::max(osc, std::sqrt(diff));
    }
    report.scales.push_back(s);
    report.oscillation.push_back(osc);
  }
  return report;
}

}  // namespace dbar
