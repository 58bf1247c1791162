#include "dbar/cauchy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dbar/par.hpp"

namespace dbar {

namespace {

constexpr double kPi = std::numbers::pi;

// polar frame centered at the singularity: w = z + r e^{i phi}, and
//   (E h)(z) = -(1/pi) Int h(z + r e^{i phi}) e^{-i phi} dr dphi,
// integrand bounded, midpoint rule in both directions. The radial window is
// clipped to [max(0,|z|-s), |z|+s]; outside it the source vanishes.
void solve_singularity_frame(const GridField& h, cplx z, cplx* out,
                             const QuadratureConfig& cfg) {
  const PolarGrid& g = h.grid();
  const int d = h.dim();
  const double s = g.s;
  const double rz = std::abs(z);
  const double r_lo = std::max(0.0, rz - s);
  const double r_hi = rz + s;
  const auto n_r = static_cast<std::size_t>(
      std::max<double>(1.0, std::ceil(cfg.r_factor * static_cast<double>(g.nr) *
                                      (r_hi - r_lo) / s)));
  const std::size_t n_phi = g.ntheta;
  const double dr = (r_hi - r_lo) / static_cast<double>(n_r);
  const double dphi = 2.0 * kPi / static_cast<double>(n_phi);
  double pref = -dr * dphi / kPi;
  if (cfg.sabotage) pref = -pref;

  std::vector<cplx> val(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) out[c] = 0.0;
  for (std::size_t i = 0; i < n_r; ++i) {
    const double r = r_lo + (static_cast<double>(i) + 0.5) * dr;
    for (std::size_t k = 0; k < n_phi; ++k) {
      const double phi = (static_cast<double>(k) + 0.5) * dphi;
      const cplx w = z + std::polar(r, phi);
      if (std::abs(w) > s) continue;
      h.lookup(w, val.data(), cfg.bilinear);
      const cplx weight = pref * std::polar(1.0, -phi);
      for (int c = 0; c < d; ++c) out[c] += val[c] * weight;
    }
  }
}

// far-field frame: sum over source cells, kernel smooth on the support
void solve_source_frame(const GridField& h, cplx z, cplx* out, const QuadratureConfig& cfg) {
  const PolarGrid& g = h.grid();
  const int d = h.dim();
  double sign = cfg.sabotage ? 1.0 : -1.0;
  for (int c = 0; c < d; ++c) out[c] = 0.0;
  for (std::size_t i = 0; i < g.nr; ++i) {
    const double area = g.cell_area(i);
    for (std::size_t k = 0; k < g.ntheta; ++k) {
      const std::size_t node = g.index(i, k);
      if (!h.masked(node)) continue;
      const cplx w = g.node(i, k);
      const cplx kern = sign * area / (kPi * (w - z));
      const cplx* v = h.at(node);
      for (int c = 0; c < d; ++c) out[c] += v[c] * kern;
    }
  }
}

}  // namespace

void cauchy_solve(const GridField& h, cplx z, cplx* out, const QuadratureConfig& cfg) {
  if (std::abs(z) >= cfg.frame_switch * h.grid().s) {
    solve_source_frame(h, z, out, cfg);
  } else {
    solve_singularity_frame(h, z, out, cfg);
  }
}

std::vector<cplx> cauchy_solve_field_serial(const GridField& h, const std::vector<cplx>& targets,
                                            const QuadratureConfig& cfg) {
  const int d = h.dim();
  std::vector<cplx> out(targets.size() * static_cast<std::size_t>(d));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    cauchy_solve(h, targets[t], out.data() + t * d, cfg);
  }
  return out;
}

std::vector<cplx> cauchy_solve_field(const GridField& h, const std::vector<cplx>& targets,
                                     const QuadratureConfig& cfg) {
  const int d = h.dim();
  std::vector<cplx> out(targets.size() * static_cast<std::size_t>(d));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
#endif
  for (long long t = 0; t < static_cast<long long>(targets.size()); ++t) {
    cauchy_solve(h, targets[static_cast<std::size_t>(t)],
                 out.data() + static_cast<std::size_t>(t) * d, cfg);
  }
  return out;
}

double omega(double t) {
  // increasing exactly on (0, 8/e]; beyond that it is meaningless as a
  // modulus of continuity, and distances in the disk never exceed 2 anyway
  if (!(t > 0.0 && t <= 8.0 / std::numbers::e)) {
    throw std::invalid_argument("omega domain is (0, 8/e]");
  }
  return t * std::log(8.0 / t);
}

ContinuityReport continuity_check(const GridField& h,
                                  const std::vector<std::pair<cplx, cplx>>& pairs,
                                  const QuadratureConfig& cfg) {
  ContinuityReport rep;
  const int d = h.dim();
  const double hnorm = h.sup_norm();
  if (hnorm == 0.0) return rep;
  std::vector<cplx> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
  for (const auto& [z1, z2] : pairs) {
    const double t = std::abs(z1 - z2);
    if (t == 0.0) continue;
    cauchy_solve(h, z1, a.data(), cfg);
    cauchy_solve(h, z2, b.data(), cfg);
    double diff2 = 0.0;
    for (int c = 0; c < d; ++c) diff2 += std::norm(a[c] - b[c]);
    const double ratio = std::sqrt(diff2) / (3.0 * omega(t) * hnorm);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.pairs;
  }
  return rep;
}

double Bump::eval(cplx z) const {
  const double a2 = radius * radius;
  const double t = std::norm(z - center);
  if (t >= a2) return 0.0;
  return std::exp(-a2 / (a2 - t));
}

cplx Bump::dbar(cplx z) const {
  const double a2 = radius * radius;
  const double t = std::norm(z - center);
  if (t >= a2) return 0.0;
  const double den = a2 - t;
  return -eval(z) * a2 * (z - center) / (den * den);
}

double weak_residual(const std::function<void(cplx, cplx*)>& F,
                     const std::function<void(cplx, cplx*)>& rhs, int dim, const Bump& bump,
                     std::size_t nr, std::size_t ntheta, int rhs_refine) {
  if (std::abs(bump.center) + bump.radius >= 1.0) {
    throw std::invalid_argument("bump support escapes the unit disk");
  }
  if (dim <= 0 || nr == 0 || ntheta == 0 || rhs_refine < 1) {
    throw std::invalid_argument("invalid weak-residual parameters");
  }
  const auto ud = static_cast<std::size_t>(dim);

  // F term: values computed in parallel per node, reduced in fixed order
  std::vector<cplx> fvals(nr * ntheta * ud, cplx(0.0, 0.0));
  {
    const double drho = bump.radius / static_cast<double>(nr);
    const double dphi = 2.0 * kPi / static_cast<double>(ntheta);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (long long ii = 0; ii < static_cast<long long>(nr); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::vector<cplx> buf(ud);
      const double rho = (static_cast<double>(i) + 0.5) * drho;
      for (std::size_t k = 0; k < ntheta; ++k) {
        const cplx x = bump.center + std::polar(rho, (static_cast<double>(k) + 0.5) * dphi);
        const cplx db = bump.dbar(x);
        if (db == cplx(0.0, 0.0)) continue;
        F(x, buf.data());
        const cplx weight = db * (rho * drho * dphi);
        cplx* dst = fvals.data() + (i * ntheta + k) * ud;
        for (std::size_t c = 0; c < ud; ++c) dst[c] = buf[c] * weight;
      }
    }
  }
  std::vector<cplx> total(ud, cplx(0.0, 0.0));
  for (std::size_t n = 0; n < nr * ntheta; ++n) {
    const cplx* v = fvals.data() + n * ud;
    for (std::size_t c = 0; c < ud; ++c) total[c] += v[c];
  }

  // rhs term on the refined grid, serial (cheap closed-form integrand)
  {
    const std::size_t mr = nr * static_cast<std::size_t>(rhs_refine);
    const std::size_t mt = ntheta * static_cast<std::size_t>(rhs_refine);
    const double drho = bump.radius / static_cast<double>(mr);
    const double dphi = 2.0 * kPi / static_cast<double>(mt);
    std::vector<cplx> buf(ud);
    for (std::size_t i = 0; i < mr; ++i) {
      const double rho = (static_cast<double>(i) + 0.5) * drho;
      for (std::size_t k = 0; k < mt; ++k) {
        const cplx x = bump.center + std::polar(rho, (static_cast<double>(k) + 0.5) * dphi);
        const double b = bump.eval(x);
        if (b == 0.0) continue;
        rhs(x, buf.data());
        const double weight = b * rho * drho * dphi;
        for (std::size_t c = 0; c < ud; ++c) total[c] += buf[c] * weight;
      }
    }
  }

  // both terms carry the same dz^dzbar = -2i dA factor: modulus 2
  double acc = 0.0;
  for (std::size_t c = 0; c < ud; ++c) acc += std::norm(total[c]);
  return 2.0 * std::sqrt(acc);
}

}  // namespace dbar
