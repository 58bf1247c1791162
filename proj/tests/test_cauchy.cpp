#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dbar/cauchy.hpp"
#include "dbar/field.hpp"
#include "dbar/rng.hpp"
#include "doctest.h"

using namespace dbar;

namespace {

// closed form for the transform of the indicator of the disk of radius s
cplx indicator_exact(cplx z, double s) {
  if (std::abs(z) <= s) return std::conj(z);
  return s * s / z;
}

GridField indicator_field(std::size_t n, double s) {
  GridField h(PolarGrid(n, n, s), 1);
  Density one{1, [](cplx, cplx* out) { out[0] = 1.0; }};
  h.sample(one);
  return h;
}

GridField smooth_field(std::size_t n, double s, int dim = 1) {
  GridField h(PolarGrid(n, n, s), dim);
  Density f{dim, [dim](cplx w, cplx* out) {
              for (int c = 0; c < dim; ++c) {
                out[c] = cplx(std::cos(4.0 * w.real() + c), std::sin(3.0 * w.imag() - c));
              }
            }};
  h.sample(f);
  return h;
}

}  // namespace

TEST_CASE("zero field maps to zero") {
  GridField h(PolarGrid(32, 32, 0.5), 2);
  cplx out[2];
  cauchy_solve(h, cplx(0.2, 0.1), out);
  CHECK(out[0] == cplx(0, 0));
  CHECK(out[1] == cplx(0, 0));
}

TEST_CASE("indicator closed form, both frames") {
  const double s = 0.5;
  auto h = indicator_field(200, s);
  Rng rng(77);
  double worst = 0.0;
  for (int it = 0; it < 60; ++it) {
    double rr = rng.uniform(0.15, 0.92) * s;
    cplx z = std::polar(rr, rng.uniform(0.0, 2.0 * std::numbers::pi));
    cplx got;
    cauchy_solve(h, z, &got);
    worst = std::max(worst, std::abs(got - indicator_exact(z, s)) /
                                std::abs(indicator_exact(z, s)));
  }
  for (int it = 0; it < 60; ++it) {
    double rr = rng.uniform(1.08, 1.9) * s;
    cplx z = std::polar(rr, rng.uniform(0.0, 2.0 * std::numbers::pi));
    cplx got;
    cauchy_solve(h, z, &got);
    worst = std::max(worst, std::abs(got - indicator_exact(z, s)) /
                                std::abs(indicator_exact(z, s)));
  }
  CHECK(worst < 1.5e-2);
}

TEST_CASE("sign convention pinned by the oracle; sabotage canary trips") {
  const double s = 0.5;
  auto h = indicator_field(128, s);
  cplx z(0.2, 0.05);
  cplx good, bad;
  cauchy_solve(h, z, &good);
  QuadratureConfig sab;
  sab.sabotage = true;
  cauchy_solve(h, z, &bad, sab);
  CHECK(std::abs(good - indicator_exact(z, s)) < 2e-2);
  CHECK(std::abs(bad - indicator_exact(z, s)) > 0.3);  // flipped sign is far off
  CHECK(std::abs(bad + good) < 1e-15);
}

TEST_CASE("sup norm bound with quadrature slack") {
  const double s = 0.45;
  Rng rng(88);
  for (int trial = 0; trial < 5; ++trial) {
    GridField h(PolarGrid(96, 96, s), 1);
    Rng sub = rng.fork(trial);
    double a = sub.uniform(0.5, 2.0), b = sub.uniform(-3.0, 3.0), c = sub.uniform(-2.0, 2.0);
    Density f{1, [&](cplx w, cplx* out) {
                out[0] = a * cplx(std::cos(b * w.real() + c), std::sin(b * w.imag()));
              }};
    h.sample(f);
    double hn = h.sup_norm();
    for (int it = 0; it < 25; ++it) {
      cplx z = sub.disk_point(0.95);
      cplx v;
      cauchy_solve(h, z, &v);
      CHECK(std::abs(v) <= 2.0 * s * hn * 1.02);
    }
  }
}

TEST_CASE("linearity and componentwise action") {
  const double s = 0.4;
  auto h1 = smooth_field(64, s, 2);
  auto h2 = smooth_field(64, s, 2);
  for (auto& v : h2.raw_values()) v *= cplx(0.3, -1.1);  // a different field, same grid
  const cplx alpha(0.7, 0.4);

  GridField combo(PolarGrid(64, 64, s), 2);
  for (std::size_t i = 0; i < combo.raw_values().size(); ++i) {
    combo.raw_values()[i] = alpha * h1.raw_values()[i] + h2.raw_values()[i];
  }
  Rng rng(99);
  for (int it = 0; it < 20; ++it) {
    cplx z = rng.disk_point(0.9);
    cplx a[2], b[2], c[2];
    cauchy_solve(h1, z, a);
    cauchy_solve(h2, z, b);
    cauchy_solve(combo, z, c);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(alpha * a[k] + b[k] - c[k]) < 1e-12);
  }

  // matrix action commutes: T(Eh) = E(Th) for T = [[1, 2i], [0.5, -1]]
  GridField th(PolarGrid(64, 64, s), 2);
  for (std::size_t node = 0; node < th.grid().node_count(); ++node) {
    const cplx* v = h1.at(node);
    th.at(node)[0] = v[0] + cplx(0, 2) * v[1];
    th.at(node)[1] = 0.5 * v[0] - v[1];
  }
  for (int it = 0; it < 20; ++it) {
    cplx z = rng.disk_point(0.9);
    cplx a[2], b[2];
    cauchy_solve(h1, z, a);
    cauchy_solve(th, z, b);
    CHECK(std::abs((a[0] + cplx(0, 2) * a[1]) - b[0]) < 1e-12);
    CHECK(std::abs((0.5 * a[0] - a[1]) - b[1]) < 1e-12);
  }
}

TEST_CASE("omega closed forms and domain") {
  const double e = std::numbers::e;
  CHECK(omega(8.0 / e) == doctest::Approx(8.0 / e).epsilon(1e-14));
  CHECK(omega(2.0) == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(omega(0.0), std::invalid_argument);
  CHECK_THROWS_AS(omega(2.95), std::invalid_argument);
  CHECK(omega(1e-9) > 0.0);
}

TEST_CASE("continuity modulus bound") {
  const double s = 0.45;
  auto h = smooth_field(96, s);
  Rng rng(111);
  std::vector<std::pair<cplx, cplx>> pairs;
  for (int it = 0; it < 60; ++it) {
    cplx z1 = rng.disk_point(0.95);
    cplx z2 = (it % 3 == 0) ? z1 + cplx(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02))
                            : rng.disk_point(0.95);
    pairs.emplace_back(z1, z2);
  }
  auto rep = continuity_check(h, pairs);
  CHECK(rep.pairs > 0);
  CHECK(rep.max_ratio <= 1.02);
}

TEST_CASE("parallel batch equals serial reference exactly") {
  const double s = 0.4;
  auto h = smooth_field(80, s, 2);
  Rng rng(123);
  std::vector<cplx> targets;
  for (int it = 0; it < 64; ++it) targets.push_back(rng.disk_point(0.93));
  auto a = cauchy_solve_field(h, targets);
  auto b = cauchy_solve_field_serial(h, targets);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("holomorphy off the support: contour means") {
  const double s = 0.35;
  auto h = smooth_field(96, s);
  // far region: the far-field quadrature is a finite sum of holomorphic
  // kernels, so the mean-value identity holds to machine precision
  cplx center(0.7, 0.1);
  double rad = 0.08;
  cplx cval;
  cauchy_solve(h, center, &cval);
  cplx mean = 0.0;
  int n = 64;
  for (int k = 0; k < n; ++k) {
    cplx z = center + std::polar(rad, 2.0 * std::numbers::pi * (k + 0.5) / n);
    cplx v;
    cauchy_solve(h, z, &v);
    mean += v;
  }
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean - cval) < 1e-12);

  // band just outside the support: mean-value identity within quadrature noise
  cplx c2(0.48, 0.0);
  double rad2 = 0.05;  // circle stays outside |z| = s = 0.35
  cplx cval2;
  cauchy_solve(h, c2, &cval2);
  cplx mean2 = 0.0;
  for (int k = 0; k < n; ++k) {
    cplx z = c2 + std::polar(rad2, 2.0 * std::numbers::pi * (k + 0.5) / n);
    cplx v;
    cauchy_solve(h, z, &v);
    mean2 += v;
  }
  mean2 /= static_cast<double>(n);
  CHECK(std::abs(mean2 - cval2) < 5e-3 * h.sup_norm());
}

TEST_CASE("bump function and analytic dbar derivative") {
  Bump b{cplx(0.1, -0.2), 0.3};
  CHECK(b.eval(b.center) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(b.eval(b.center + cplx(0.3, 0)) == 0.0);
  CHECK(b.eval(b.center + cplx(0.31, 0)) == 0.0);
  CHECK(b.dbar(b.center) == cplx(0, 0));

  // dbar = (d/dx + i d/dy)/2 cross-check
  Rng rng(131);
  for (int it = 0; it < 40; ++it) {
    cplx x = b.center + rng.disk_point(0.27);
    double h = 1e-6;
    double fx1 = b.eval(x + cplx(h, 0)), fx0 = b.eval(x - cplx(h, 0));
    double fy1 = b.eval(x + cplx(0, h)), fy0 = b.eval(x - cplx(0, h));
    cplx fd = cplx((fx1 - fx0) / (2 * h), (fy1 - fy0) / (2 * h)) * 0.5;
    CHECK(std::abs(fd - b.dbar(x)) < 1e-5);
  }
}

TEST_CASE("weak residual: exact solutions have tiny defect") {
  Bump bump{cplx(0.1, 0.05), 0.3};
  // F = conj(z), rhs = 1
  auto F1 = [](cplx z, cplx* out) { out[0] = std::conj(z); };
  auto R1 = [](cplx, cplx* out) { out[0] = 1.0; };
  CHECK(weak_residual(F1, R1, 1, bump) < 1e-6);

  // holomorphic F, rhs = 0
  auto F2 = [](cplx z, cplx* out) { out[0] = z * z + 1.0 / (z - 2.0); };
  auto R2 = [](cplx, cplx* out) { out[0] = 0.0; };
  CHECK(weak_residual(F2, R2, 1, bump) < 1e-6);

  // bump escaping the disk is rejected
  Bump bad{cplx(0.9, 0), 0.2};
  CHECK_THROWS_AS(weak_residual(F1, R1, 1, bad), std::invalid_argument);
}

TEST_CASE("weak residual of the transform converges under refinement") {
  const double s = 0.5;
  Bump bump{cplx(0.15, 0.0), 0.2};
  Density f{1, [](cplx w, cplx* out) {
              out[0] = cplx(std::cos(3.0 * w.real()), std::sin(2.0 * w.imag()));
            }};
  double prev = -1.0;
  for (std::size_t n : {48u, 96u, 192u}) {
    GridField h(PolarGrid(n, n, s), 1);
    h.sample(f);
    auto F = [&](cplx z, cplx* out) { cauchy_solve(h, z, out); };
    auto R = [&](cplx z, cplx* out) {
      if (std::abs(z) <= s) {
        f.eval(z, out);
      } else {
        out[0] = 0.0;
      }
    };
    double res = weak_residual(F, R, 1, bump, 64, 64);
    if (prev > 0.0) CHECK(res < prev);
    prev = res;
  }
  CHECK(prev < 5e-3);
}
