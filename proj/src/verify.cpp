#include "dbar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include "dbar/blaschke.hpp"
#include "dbar/cauchy.hpp"
#include "dbar/field.hpp"
#include "dbar/geometry.hpp"
#include "dbar/interp.hpp"
#include "dbar/pipeline.hpp"
#include "dbar/rng.hpp"
#include "dbar/sequence.hpp"
#include "json.hpp"

namespace dbar::verify {
namespace {

constexpr double kTau = 6.283185307179586476925286766559;

double vec_norm(const cplx* v, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) s += std::norm(v[c]);
  return std::sqrt(s);
}

FiniteSequence random_sequence(Rng& rng, std::size_t n, double rmax, double minsep) {
  std::vector<DiskPoint> pts;
  std::size_t guard = 0;
  while (pts.size() < n) {
    if (++guard > 100000) throw std::runtime_error("random_sequence: separation too tight");
    cplx z = rng.disk_point(rmax);
    bool ok = true;
    for (const auto& p : pts)
      if (pseudo_distance(z, p.value()) < minsep) {
        ok = false;
        break;
      }
    if (ok) pts.emplace_back(z);
  }
  return FiniteSequence(std::move(pts));
}

// well-separated sequence with characteristic at least `floor`: points on a
// fixed radius ladder with random angles, retried until the floor holds
FiniteSequence spread_sequence(Rng& rng, std::size_t n, double floor) {
  static const double ladder[] = {0.0, 0.7, 0.85, 0.93, 0.965, 0.982};
  const std::size_t levels = sizeof(ladder) / sizeof(ladder[0]);
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::vector<DiskPoint> pts;
    for (std::size_t i = 0; i < n && i < levels; ++i)
      pts.emplace_back(std::polar(ladder[i], rng.uniform(0.0, kTau)));
    FiniteSequence seq(std::move(pts));
    if (seq.characteristic() >= floor) return seq;
  }
  throw std::runtime_error("spread_sequence: floor unattainable");
}

struct SmoothTerm {
  int component;
  cplx center;
  double radius;
  cplx amp;
};

Density terms_density(std::vector<SmoothTerm> terms, int dim) {
  return Density{dim, [terms, dim](cplx z, cplx* out) {
                   for (int c = 0; c < dim; ++c) out[c] = 0.0;
                   for (const auto& t : terms) {
                     const double q = std::norm(z - t.center) / (t.radius * t.radius);
                     if (q >= 1.0) continue;
                     const double u = 1.0 - q;
                     out[t.component] += t.amp * (u * u * u);
                   }
                 }};
}

GridField random_field(Rng& rng, int dim, double s, std::size_t nr, std::size_t ntheta) {
  std::vector<SmoothTerm> terms;
  for (int c = 0; c < dim; ++c)
    for (int t = 0; t < 3; ++t)
      terms.push_back({c, rng.disk_point(0.7 * s), rng.uniform(0.2 * s, 0.6 * s),
                       std::polar(rng.uniform(0.2, 1.0), rng.uniform(0.0, kTau))});
  GridField h{PolarGrid(nr, ntheta, s), dim};
  h.sample(terms_density(std::move(terms), dim));
  return h;
}

// Euclidean disk comfortably inside the pseudohyperbolic cell D(anchor, s)
std::pair<cplx, double> cell_bump(cplx anchor, double s) {
  EuclidDisk e = euclid_image(PseudoDisk(DiskPoint(anchor), 0.5 * s));
  return {e.center, 0.8 * e.radius};
}

}  // namespace

bool Report::all_pass() const { return failures() == 0; }

std::size_t Report::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks)
    if (!c.pass) ++n;
  return n;
}

void Report::add(const std::string& id, const std::string& reference, double measured,
                 double bound) {
  checks.push_back({id, reference, measured, bound, measured <= bound});
}

std::string Report::text() const {
  nlohmann::ordered_json j;
  j["format"] = "dbar-verification-report";
  j["version"] = 1;
  j["seed"] = seed;
  j["dim"] = dim;
  j["sizes"] =
      nlohmann::ordered_json{{"fields", fields}, {"pairs", pairs}, {"samples", samples}};
#ifdef __VERSION__
  const char* compiler = "gcc/clang " __VERSION__;
#else
  const char* compiler = "unknown";
#endif
#ifdef _OPENMP
  const bool openmp = true;
#else
  const bool openmp = false;
#endif
  j["environment"] = nlohmann::ordered_json{{"compiler", compiler}, {"openmp", openmp}};
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : checks)
    arr.push_back(nlohmann::ordered_json{{"id", c.id},
                                         {"reference", c.reference},
                                         {"measured", c.measured},
                                         {"bound", c.bound},
                                         {"pass", c.pass}});
  j["checks"] = std::move(arr);
  j["failures"] = failures();
  j["all_pass"] = all_pass();
  return j.dump(2) + "\n";
}

void geometry_suite(const io::RunConfig& cfg, Report& out) {
  Rng rng(cfg.seed ^ 0x67656f6dull);
  const std::size_t n = std::max<std::size_t>(cfg.verify_samples, 32);

  double sym = 0.0, tri = 0.0, inv = 0.0, rt = 0.0, psb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx z = rng.disk_point(0.999), w = rng.disk_point(0.999),
               u = rng.disk_point(0.999), c = rng.disk_point(0.95);
    sym = std::max(sym, std::abs(pseudo_distance(z, w) - pseudo_distance(w, z)));
    tri = std::max(tri, pseudo_distance(z, w) - pseudo_sum(pseudo_distance(z, u),
                                                           pseudo_distance(u, w)));
    inv = std::max(inv, std::abs(pseudo_distance(mobius_shift(c, z), mobius_shift(c, w)) -
                                 pseudo_distance(z, w)));
    rt = std::max(rt, std::abs(mobius_inverse(c, mobius_shift(c, z)) - z));
    const double a = rng.uniform(1e-6, 0.999), b = rng.uniform(1e-6, 0.999);
    const double ps = pseudo_sum(a, b);
    psb = std::max({psb, std::max(a, b) - ps, ps - (a + b), ps - 1.0});
  }
  out.add("geometry.rho-symmetry", "rho(z, w) == rho(w, z)", sym, 0.0);
  out.add("geometry.rho-triangle", "rho(z, w) <= pseudo_sum(rho(z, u), rho(u, w))", tri,
          1e-12);
  out.add("geometry.mobius-invariance", "rho(g_c(z), g_c(w)) == rho(z, w)", inv, 1e-12);
  out.add("geometry.mobius-roundtrip", "g_c^{-1}(g_c(z)) == z", rt, 1e-13);
  out.add("geometry.pseudo-sum-bounds", "max(a, b) <= pseudo_sum(a, b) <= min(1, a + b)",
          psb, 1e-15);
}

void sequence_suite(const io::RunConfig& cfg, Report& out) {
  Rng rng(cfg.seed ^ 0x73657175ull);

  double char_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.next() % 11);
    FiniteSequence seq = random_sequence(rng, n, 0.9, 0.05);
    const double a = seq.characteristic();
    const double b = characteristic_via_blaschke(seq);
    char_rel = std::max(char_rel, std::abs(a - b) / a);
  }
  out.add("sequence.characteristic-consistency",
          "distance-product characteristic == (1-|z_k|^2)|B'(z_k)| characteristic",
          char_rel, 1e-10);

  double order = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double d = rng.uniform(0.02, 0.999);
    const InterpolationBound b = interpolation_constant_bound(d);
    order = std::max({order, b.lower - b.value, b.value - std::min(b.jones, b.earl)});
  }
  out.add("sequence.interpolation-bound-order",
          "1/delta <= min(jones bound, earl bound) == value", order, 0.0);

  double chain_geo = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<DiskPoint> cand;
    for (int i = 0; i < 200; ++i) cand.emplace_back(rng.disk_point(0.9));
    const double eps = rng.uniform(0.1, 0.35);
    FiniteSequence chain = greedy_chain(cand, eps);
    for (std::size_t i = 0; i < chain.size(); ++i)
      for (std::size_t j = i + 1; j < chain.size(); ++j)
        chain_geo = std::max(chain_geo, eps - pseudo_distance(chain[i], chain[j]));
    for (const auto& c : cand) {
      double best = 1.0;
      for (std::size_t i = 0; i < chain.size(); ++i)
        best = std::min(best, pseudo_distance(c, chain[i]));
      chain_geo = std::max(chain_geo, best - eps);
    }
  }
  out.add("sequence.greedy-chain-geometry",
          "greedy chain is eps-separated and eps-covers its candidates", chain_geo, 0.0);

  double count_viol = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const cplx center = rng.disk_point(0.5);
    const double R = rng.uniform(0.3, 0.6);
    const double L = rng.uniform(0.15, 0.3);
    const EuclidDisk e = euclid_image(PseudoDisk(DiskPoint(center), R));
    std::vector<DiskPoint> cand;
    Rng sub = rng.fork(static_cast<std::uint64_t>(trial));
    for (int i = 0; i < 3000; ++i) {
      const cplx z = e.center + sub.disk_point(e.radius);
      if (pseudo_distance(z, center) < R) cand.emplace_back(z);
    }
    const auto n = static_cast<double>(greedy_chain(cand, L).size());
    const ChainCountBounds b = chain_count_bounds(R, L);
    if (n < b.lower - 1e-12 || n > b.upper + 1e-12) count_viol += 1.0;
  }
  out.add("sequence.chain-count-bounds",
          "greedy L-chain of a dense sample of D(z, R) falls within the counting bounds",
          count_viol, 0.0);

  double split_margin = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.next() % 8);
    FiniteSequence seq = random_sequence(rng, n, 0.9, 0.1);
    const SplitResult sr = split_sqrt_delta(seq);
    split_margin = std::max(split_margin, std::sqrt(seq.characteristic()) -
                                              sr.min_characteristic);
  }
  out.add("sequence.split-sqrt-delta",
          "some bipartition has both characteristics >= sqrt(delta)", split_margin, 1e-12);
}

void blaschke_suite(const io::RunConfig& cfg, Report& out) {
  Rng rng(cfg.seed ^ 0x626c6173ull);
  FiniteSequence seq = random_sequence(rng, 8, 0.85, 0.1);
  BlaschkeProduct b{seq};

  double unit = 0.0, zeros = 0.0, deriv = 0.0;
  for (std::size_t i = 0; i < std::max<std::size_t>(cfg.verify_samples, 64); ++i) {
    unit = std::max(unit, std::abs(b.eval(rng.disk_point(0.999))) - 1.0);
    const cplx z = rng.disk_point(0.7);
    const double h = 1e-5;
    const cplx fd = (b.eval(z + h) - b.eval(z - h)) / (2.0 * h);
    deriv = std::max(deriv, std::abs(fd - b.derivative(z)));
  }
  for (std::size_t k = 0; k < seq.size(); ++k)
    zeros = std::max(zeros, std::abs(b.eval(seq[k].value())));
  out.add("blaschke.unit-bound", "|B(z)| < 1 on the disk", unit, 0.0);
  out.add("blaschke.zeros", "B vanishes exactly at its zero set", zeros, 1e-12);
  out.add("blaschke.derivative", "analytic derivative matches central differences", deriv,
          1e-6);

  // fixed well-separated triple for the level-component geometry
  FiniteSequence zeta{{DiskPoint(0.0, 0.0), DiskPoint(0.0, 0.8), DiskPoint(-0.7, 0.0)}};
  const double lambda = 0.2;
  const double r = 0.97 * level_radius(zeta.characteristic(), lambda);
  LevelComponents lev{BlaschkeProduct{zeta}, lambda, r};
  double rt = 0.0;
  double member = 0.0;
  for (int i = 0; i < 96; ++i) {
    const cplx w = rng.disk_point(0.9 * r);
    const std::size_t n = static_cast<std::size_t>(rng.next() % zeta.size());
    const cplx z = lev.local_inverse(n, w);
    rt = std::max(rt, std::abs(lev.product().eval(z) - w));
    if (lev.component_of(z) != static_cast<int>(n)) member += 1.0;
    if (pseudo_distance(z, zeta[n].value()) >= lambda) member += 1.0;
  }
  out.add("blaschke.local-inverse-roundtrip", "B(b_n(w)) == w on the level disk", rt, 1e-10);
  out.add("blaschke.component-membership",
          "b_n(w) stays in component n inside D(z_n, lambda)", member, 0.0);
}

void cauchy_suite(const io::RunConfig& cfg, Report& out) {
  Rng rng(cfg.seed ^ 0x63617563ull);
  QuadratureConfig quad;
  quad.sabotage = cfg.sabotage;

  // closed-form anchor: indicator of D_s maps to conj(z) inside, s^2/z outside
  {
    const double s = 0.5;
    GridField h{PolarGrid(160, 160, s), 1};
    h.sample(Density{1, [](cplx, cplx* o) { *o = 1.0; }});
    std::vector<cplx> targets;
    for (int i = 0; i < 80; ++i) {
      cplx z = rng.disk_point(0.95);
      while (std::abs(std::abs(z) - s) < 0.05 || std::abs(z) < 0.1) z = rng.disk_point(0.95);
      targets.push_back(z);
    }
    const std::vector<cplx> got = cauchy_solve_field(h, targets, quad);
    double rel = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const cplx z = targets[i];
      const cplx exact = std::abs(z) <= s ? std::conj(z) : s * s / z;
      rel = std::max(rel, std::abs(got[i] - exact) / std::abs(exact));
    }
    out.add("cauchy.indicator-oracle",
            "E(indicator of D_s) == conj(z) inside, s^2/z outside", rel, 1e-2);
  }

  double supratio = 0.0, contratio = 0.0;
  for (std::size_t f = 0; f < std::max<std::size_t>(cfg.verify_fields, 2); ++f) {
    const double s = rng.uniform(0.3, 0.7);
    GridField h = random_field(rng, 1, s, 64, 64);
    const double hsup = h.sup_norm();
    if (hsup == 0.0) continue;
    std::vector<cplx> targets;
    std::vector<std::pair<cplx, cplx>> pairs;
    for (std::size_t p = 0; p < std::max<std::size_t>(cfg.verify_pairs, 8); ++p) {
      targets.push_back(rng.disk_point(0.98));
      const cplx z1 = rng.disk_point(0.95);
      const cplx z2 = p % 2 ? z1 + std::polar(rng.uniform(1e-3, 0.05), rng.uniform(0.0, kTau))
                            : rng.disk_point(0.95);
      pairs.emplace_back(z1, z2);
    }
    const std::vector<cplx> vals = cauchy_solve_field(h, targets, quad);
    for (const cplx& v : vals) supratio = std::max(supratio, std::abs(v) / (2.0 * s * hsup));
    contratio = std::max(contratio, continuity_check(h, pairs, quad).max_ratio);
  }
  out.add("cauchy.e-sup-bound", "sup |Eh| <= 2 s sup |h| (2% quadrature allowance)",
          supratio, 1.02);
  out.add("cauchy.e-continuity",
          "|Eh(z1) - Eh(z2)| <= 3 omega(|z1 - z2|) sup |h| (2% quadrature allowance)",
          contratio, 1.02);

  {
    std::vector<SmoothTerm> terms{{0, cplx(0.1, 0.05), 0.35, cplx(0.9, -0.4)}};
    const Density rhs = terms_density(terms, 1);
    GridField h{PolarGrid(96, 96, 0.55), 1};
    h.sample(rhs);
    auto F = [&](cplx z, cplx* o) { cauchy_solve(h, z, o, quad); };
    const double res =
        weak_residual(F, rhs.eval, 1, Bump{cplx(0.1, 0.05), 0.5}, 96, 96, 2) / h.sup_norm();
    out.add("cauchy.dbar-identity", "Eh solves dF/dzbar = h weakly against a smooth bump",
            res, 5e-3);
  }
}

void interp_suite(const io::RunConfig& cfg, Report& out) {
  Rng rng(cfg.seed ^ 0x696e7470ull);

  double cardinal = 0.0, supbound = 0.0, two_cardinal = 0.0, fsum = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    FiniteSequence seq = spread_sequence(rng, 3 + static_cast<std::size_t>(trial), 0.5);
    const double delta = seq.characteristic();
    const double lambda = 0.25 * delta;
    const double r = 0.9 * level_radius(delta, lambda);
    TwoVariableBasis tvb{seq, lambda, r};
    const JonesBasis& basis = tvb.basis();

    std::vector<cplx> g(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) {
      basis.eval_all(seq[k].value(), g.data());
      for (std::size_t j = 0; j < seq.size(); ++j)
        cardinal = std::max(cardinal, std::abs(g[j] - (j == k ? 1.0 : 0.0)));
    }
    for (std::size_t i = 0; i < std::max<std::size_t>(cfg.verify_samples / 4, 32); ++i) {
      basis.eval_all(rng.disk_point(0.995), g.data());
      double sum = 0.0;
      for (const cplx& v : g) sum += std::abs(v);
      supbound = std::max(supbound, sum - basis.certified_bound());
    }
    for (int i = 0; i < 48; ++i) {
      const cplx w = rng.disk_point(0.98 * tvb.w_radius());
      for (std::size_t k = 0; k < seq.size(); ++k) {
        const cplx zk = tvb.levels().local_inverse(k, w);
        const std::vector<cplx> f = tvb.f_all(zk, w);
        for (std::size_t j = 0; j < seq.size(); ++j)
          two_cardinal = std::max(two_cardinal, std::abs(f[j] - (j == k ? 1.0 : 0.0)));
      }
      const std::vector<cplx> f = tvb.f_all(rng.disk_point(0.98), w);
      double sum = 0.0;
      for (const cplx& v : f) sum += std::abs(v);
      fsum = std::max(fsum, sum / (2.0 * tvb.M()));
    }
  }
  out.add("interp.cardinal-identity", "g_j(z_k) == delta_jk", cardinal, 1e-10);
  out.add("interp.sup-bound", "sum_j |g_j(z)| <= (2e/delta) log(e/delta^2)", supbound,
          1e-9);
  out.add("interp.two-variable-cardinal", "f_j(b_k(w), w) == delta_jk on |w| <= r/(3M)",
          two_cardinal, 1e-9);
  out.add("interp.f-sum-bound", "sum_j |f_j(z, w)| <= 2 M", fsum, 1.0);
}

void pipeline_suite(const io::RunConfig& cfg, Report& out) {
  Rng rng(cfg.seed ^ 0x70697065ull);
  SmallWidthConfig small = io::small_config(cfg);

  // --- fixed three-point operator ------------------------------------------
  FiniteSequence zeta{{DiskPoint(0.0, 0.0), DiskPoint(0.8, 0.0), DiskPoint(0.0, -0.8)}};
  const double delta = zeta.characteristic();
  const double lambda = 0.2;
  const double r = 0.9 * level_radius(delta, lambda);
  const double m = interpolation_constant_bound(delta).value;
  const double inner = r / (6.0 * m);
  const double eps = 0.9 * inner;
  SmallWidthOperator op{RegionSpec{zeta, eps}, zeta, eps, lambda, r, small};

  const int d = 2;
  std::vector<SmoothTerm> terms;
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    const auto [bc, br] = cell_bump(zeta[k].value(), eps);
    for (int c = 0; c < d; ++c)
      terms.push_back({c, bc, br, std::polar(rng.uniform(0.3, 1.0), rng.uniform(0.0, kTau))});
  }
  const Density f = terms_density(terms, d);
  const SmallWidthApplied lf = op.apply(f);
  const double fs = lf.f_sup();

  std::vector<cplx> va(d), vb(d), vc(d);

  // annulus samples and the Laurent gluing identity
  double glue = 0.0, usup = 0.0;
  for (int i = 0; i < 36; ++i) {
    const double t = op.inner_radius() * (1.3 + 0.25 * (i % 6) / 5.0);
    const cplx xi = std::polar(t, kTau * static_cast<double>(i) / 36.0);
    const std::size_t n = static_cast<std::size_t>(i) % zeta.size();
    const cplx z = op.levels().local_inverse(n, xi);
    lf.ek_panel(z, va.data());
    usup = std::max(usup, vec_norm(va.data(), d));
    lf.t1(z, vb.data());
    lf.t2(z, vc.data());
    for (int c = 0; c < d; ++c) va[c] -= vb[c] + vc[c];
    glue = std::max(glue, vec_norm(va.data(), d));
  }
  out.add("pipeline.laurent-identity",
          "T1 f + T2 f == E_K f on the gluing annulus (relative to sup |f|)", glue / fs,
          1e-8);

  double t1sup = 0.0, t2sup = 0.0, eksup = 0.0, lsup = 0.0;
  for (int i = 0; i < 200; ++i) {
    const cplx z = rng.disk_point(0.97);
    const double wb = std::abs(op.levels().product().eval(z));
    lf.eval(z, va.data());
    lsup = std::max(lsup, vec_norm(va.data(), d));
    if (wb > 1.2 * op.inner_radius()) {
      lf.t1(z, vb.data());
      t1sup = std::max(t1sup, vec_norm(vb.data(), d));
    }
  }
  for (int i = 0; i < 60; ++i) {
    const cplx xi = std::polar(op.outer_radius() * rng.uniform(0.05, 0.9),
                               rng.uniform(0.0, kTau));
    const std::size_t n = static_cast<std::size_t>(i) % zeta.size();
    const cplx z = op.levels().local_inverse(n, xi);
    lf.t2(z, vb.data());
    t2sup = std::max(t2sup, vec_norm(vb.data(), d));
    lf.ek(z, vc.data());
    eksup = std::max(eksup, vec_norm(vc.data(), d));
  }
  out.add("pipeline.t1-bound", "sup |T1 f| <= 6 M sup_{A} |E_K f|", t1sup / (6.0 * m * usup),
          1.0);
  out.add("pipeline.t2-bound", "sup |T2 f| <= 4 M sup_{A} |E_K f|", t2sup / (4.0 * m * usup),
          1.0);
  out.add("pipeline.ek-certificate", "sup |E_K f| <= (2c/(1-c^2)) sup |f|",
          eksup / (op.ek_certificate() * fs), 1.0);
  out.add("pipeline.norm-certificate", "sup |L f| <= (12 c M/(1-c^2)) sup |f|",
          lsup / (op.norm_certificate() * fs), 1.0);

  double seam = 0.0;
  for (int i = 0; i < 24; ++i) {
    const cplx xi = std::polar(op.mid_radius(), kTau * static_cast<double>(i) / 24.0);
    const std::size_t n = static_cast<std::size_t>(i) % zeta.size();
    const cplx z = op.levels().local_inverse(n, xi);
    lf.ek_panel(z, va.data());
    const double tail1 = lf.t1(z, vb.data());
    const double tail2 = lf.t2(z, vc.data());
    for (int c = 0; c < d; ++c) va[c] -= vb[c] + vc[c];
    seam = std::max(seam, vec_norm(va.data(), d) - 10.0 * (tail1 + tail2));
  }
  out.add("pipeline.seam-agreement",
          "field and series branches agree at the gluing radius", seam,
          small.agree_tol * fs);

  {
    std::vector<SmoothTerm> terms2 = terms;
    for (auto& t : terms2) t.amp *= cplx(-0.3, 0.75);
    const Density g = terms_density(terms2, d);
    const SmallWidthApplied lg = op.apply(g);
    const cplx alpha(0.7, -0.4), beta(-0.2, 1.1);
    std::vector<SmoothTerm> terms3 = terms;
    for (auto& t : terms3) t.amp = alpha * t.amp + beta * (t.amp * cplx(-0.3, 0.75));
    const SmallWidthApplied lc = op.apply(terms_density(terms3, d));
    double lin = 0.0;
    for (int i = 0; i < 12; ++i) {
      const cplx z = rng.disk_point(0.95);
      lf.eval(z, va.data());
      lg.eval(z, vb.data());
      lc.eval(z, vc.data());
      for (int c = 0; c < d; ++c) vc[c] -= alpha * va[c] + beta * vb[c];
      lin = std::max(lin, vec_norm(vc.data(), d));
    }
    out.add("pipeline.linearity", "L(alpha f + beta g) == alpha L f + beta L g",
            lin / ((std::abs(alpha) + std::abs(beta)) * fs), 1e-11);
  }

  {
    // componentwise matrix T commutes with the operator
    const cplx t00(0.6, 0.1), t01(-0.3, 0.4), t10(0.2, -0.7), t11(1.1, 0.05);
    std::vector<SmoothTerm> tt;
    for (const auto& t : terms) {
      const cplx a0 = t.component == 0 ? t.amp : cplx(0.0);
      const cplx a1 = t.component == 1 ? t.amp : cplx(0.0);
      tt.push_back({0, t.center, t.radius, t00 * a0 + t01 * a1});
      tt.push_back({1, t.center, t.radius, t10 * a0 + t11 * a1});
    }
    const SmallWidthApplied ltf = op.apply(terms_density(tt, d));
    double comm = 0.0;
    for (int i = 0; i < 12; ++i) {
      const cplx z = rng.disk_point(0.95);
      lf.eval(z, va.data());
      ltf.eval(z, vb.data());
      vb[0] -= t00 * va[0] + t01 * va[1];
      vb[1] -= t10 * va[0] + t11 * va[1];
      comm = std::max(comm, vec_norm(vb.data(), d));
    }
    out.add("pipeline.commutation", "componentwise matrices commute with the operator",
            comm / fs, 1e-10);
  }

  {
    const SmallWidthApplied l0 = op.apply(io::zero_density(d));
    double z0 = 0.0;
    for (int i = 0; i < 12; ++i) {
      l0.eval(rng.disk_point(0.95), va.data());
      z0 = std::max(z0, vec_norm(va.data(), d));
    }
    out.add("pipeline.zero-density", "L 0 == 0", z0, 0.0);
  }

  // --- assembled refined-path operator --------------------------------------
  AssemblyConfig acfg;
  acfg.small = small;
  acfg.small.grid_nr = std::min<std::size_t>(small.grid_nr, 48);
  acfg.small.grid_ntheta = std::min<std::size_t>(small.grid_ntheta, 48);
  acfg.small.contour_q = std::min<std::size_t>(small.contour_q, 128);
  {
    FiniteSequence pair{{DiskPoint(0.0, 0.0), DiskPoint(0.992, 0.0)}};
    const double aeps = 0.8 * refinement_scale(kNuMax);
    RegionSpec region{pair, 0.9 * aeps};
    const AssembledOperator aop = assemble_refined(region, pair, aeps, acfg);

    std::vector<SmoothTerm> at;
    for (std::size_t k = 0; k < pair.size(); ++k) {
      const auto [bc, br] = cell_bump(pair[k].value(), 0.9 * aeps);
      at.push_back({0, bc, br, std::polar(rng.uniform(0.4, 1.0), rng.uniform(0.0, kTau))});
    }
    const Density af = terms_density(at, 1);
    const AssembledOperator::Applied alf = aop.apply(af);
    const double afs = alf.f_sup();

    double asup = 0.0;
    cplx v1;
    for (int i = 0; i < 150; ++i) {
      alf.eval(rng.disk_point(0.97), &v1);
      asup = std::max(asup, std::abs(v1));
    }
    out.add("pipeline.assembled-certificate",
            "sup |L_K f| <= certificate(eps) sup |f| (refined path)",
            asup / (aop.certificate() * afs), 1.0);
    out.add("pipeline.assembled-summed-certificate",
            "sup |L_K f| <= sum of per-part certificates times sup |f|",
            asup / (aop.summed_certificate() * afs), 1.0);

    double chi_bad = 0.0;
    for (std::size_t k = 0; k < pair.size(); ++k)
      for (int i = 0; i < 40; ++i) {
        const cplx z = mobius_shift(pair[k].value(), rng.disk_point(0.85 * 0.9 * aeps));
        const int ci = aop.chi_index(z);
        if (ci < 0 || ci >= static_cast<int>(aop.part_count())) chi_bad += 1.0;
      }
    for (int i = 0; i < 40; ++i) {
      const cplx z = rng.disk_point(0.5);
      if (!region.contains(z) && aop.chi_index(z) != -1) chi_bad += 1.0;
    }
    out.add("pipeline.chi-partition",
            "chi maps K onto part indices and is -1 off K (first cover wins)", chi_bad,
            0.0);

    auto F = [&](cplx z, cplx* o) { alf.eval(z, o); };
    auto rhs = [&](cplx z, cplx* o) {
      if (region.contains(z)) {
        af.eval(z, o);
        *o /= 1.0 - std::norm(z);
      } else {
        *o = 0.0;
      }
    };
    auto zeroF = [](cplx, cplx* o) { *o = 0.0; };
    const Bump bump{0.0, 40.0 * aeps};
    const double res = weak_residual(F, rhs, 1, bump, 96, 96, 4);
    const double base = weak_residual(zeroF, rhs, 1, bump, 96, 96, 4);
    out.add("pipeline.weak-solution",
            "L_K f beats the zero function as a weak solution by 20x on a bump at K",
            res / base, 0.05);
  }

  // --- exterior decomposition ------------------------------------------------
  {
    FiniteSequence one{{DiskPoint(0.25, 0.1)}};
    const double nu2 = 0.8 * kNuMax;
    const double deps = 0.98 * refinement_scale(nu2);
    RegionSpec region{one, 0.9 * deps};
    const AssembledOperator base = assemble_refined(region, one, deps, acfg);
    const Decomposition dec = decomposition_data(base, nu2);

    const auto [bc, br] = cell_bump(one[0].value(), 0.9 * deps);
    const Density df = terms_density({{0, bc, br, cplx(0.8, -0.5)}}, 1);
    const Decomposition::Applied dap = dec.apply(df);
    const double dfs = dap.base().f_sup();
    const Neighbourhood fat = dec.fattened();

    double recon = 0.0, hsup = 0.0, contain = 0.0, hvanish = 0.0;
    double negidx = 0.0;
    for (std::size_t i = 0; i < dap.blocks(); ++i) {
      const LaurentOperatorData hd = dap.refined().part(i).h_data();
      negidx = std::max(negidx, static_cast<double>(hd.n_max + 1));
    }
    std::size_t got = 0;
    cplx v1, v2;
    while (got < std::max<std::size_t>(cfg.verify_samples, 100)) {
      const cplx z = rng.disk_point(0.97);
      if (fat.contains(z)) continue;
      ++got;
      for (std::size_t i = 0; i < dap.blocks(); ++i) {
        const cplx w = dap.block_product(i, z);
        if (std::abs(w) < 6.0 * dec.eps_nu() * (1.0 - 1e-12)) contain += 1.0;
        if (got <= 50) {
          dap.block_h(i, w, z, &v1);
          hsup = std::max(hsup, std::abs(v1));
        }
      }
      if (got <= 50) {
        dap.reconstruct(z, &v1);
        dap.base().eval(z, &v2);
        recon = std::max(recon, std::abs(v1 - v2));
      }
    }
    for (std::size_t i = 0; i < dap.blocks(); ++i) {
      dap.block_h(i, std::polar(50.0, 0.3), one[0].value(), &v1);
      hvanish = std::max(hvanish, std::abs(v1));
    }
    out.add("pipeline.h-negative-index", "H data carries strictly negative indices only",
            negidx, 0.0);
    out.add("pipeline.exterior-reconstruction",
            "E0 f + sum_i H_i(B_i(z)) f == L_K f outside the closed nu-fattening",
            recon / dfs, 1e-6);
    out.add("pipeline.h-certificate", "sup |H_i(B_i(z)) f| <= (3/5) nu sup |f|",
            hsup / (dec.h_certificate() * dfs), 1.0);
    out.add("pipeline.h-vanishes", "H(w) f -> 0 as |w| -> infinity (|w| = 50 probe)",
            hvanish / dfs, 1e-3);
    out.add("pipeline.containment", "|B_i(z)| >= 6 eps_nu outside the closed nu-fattening",
            contain, 0.0);
  }
}

Report run_all(const io::RunConfig& cfg) {
  Report rep;
  rep.seed = cfg.seed;
  rep.dim = cfg.dim;
  rep.fields = cfg.verify_fields;
  rep.pairs = cfg.verify_pairs;
  rep.samples = cfg.verify_samples;
  geometry_suite(cfg, rep);
  sequence_suite(cfg, rep);
  blaschke_suite(cfg, rep);
  cauchy_suite(cfg, rep);
  interp_suite(cfg, rep);
  pipeline_suite(cfg, rep);
  return rep;
}

}  // namespace dbar::verify
