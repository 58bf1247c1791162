#include <cmath>
#include <stdexcept>
#include <vector>

#include "dbar/blaschke.hpp"
#include "dbar/rng.hpp"
#include "doctest.h"

using namespace dbar;

namespace {

FiniteSequence seq(std::initializer_list<cplx> pts) {
  std::vector<DiskPoint> v;
  for (cplx p : pts) v.emplace_back(p);
  return FiniteSequence(std::move(v));
}

FiniteSequence random_separated(Rng& rng, std::size_t n, double min_sep, double rmax = 0.9) {
  std::vector<DiskPoint> pts;
  int guard = 0;
  while (pts.size() < n && guard < 100000) {
    ++guard;
    cplx z = rng.disk_point(rmax);
    bool ok = true;
    for (const auto& p : pts) {
      if (pseudo_distance(z, p.value()) < min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) pts.emplace_back(z);
  }
  REQUIRE(pts.size() == n);
  return FiniteSequence(std::move(pts));
}

}  // namespace

TEST_CASE("blaschke evaluation closed forms") {
  BlaschkeProduct b0(seq({cplx(0, 0)}));
  CHECK(b0.eval(cplx(0.5, 0)) == cplx(0.5, 0));
  CHECK(b0.derivative(cplx(0.3, 0.2)) == cplx(1.0, 0));

  BlaschkeProduct b1(seq({cplx(0.5, 0)}));
  CHECK(std::abs(b1.eval(cplx(0, 0)) - cplx(0.5, 0)) < 1e-15);

  BlaschkeProduct b2(seq({cplx(0.3, 0.4), cplx(-0.2, 0.1), cplx(0.0, -0.6)}));
  for (std::size_t n = 0; n < 3; ++n) {
    CHECK(std::abs(b2.eval(b2.zeros()[n].value())) < 1e-15);
  }
  Rng rng(11);
  for (int it = 0; it < 100; ++it) {
    cplx z = rng.disk_point(0.999);
    CHECK(std::abs(b2.eval(z)) < 1.0);
  }
  // modulus approaches 1 at the rim
  for (int k = 0; k < 8; ++k) {
    cplx z = std::polar(1.0 - 1e-6, 0.7 * k);
    CHECK(std::abs(b2.eval(z)) > 1.0 - 1e-4);
  }
}

TEST_CASE("derivative matches finite differences and the product identity") {
  Rng rng(22);
  auto s = random_separated(rng, 6, 0.3);
  BlaschkeProduct b(s);
  // finite differences away from the zeros
  for (int it = 0; it < 30; ++it) {
    cplx z = rng.disk_point(0.8);
    double h = 1e-6;
    cplx fd = (b.eval(z + h) - b.eval(z - h)) / (2.0 * h);
    CHECK(std::abs(fd - b.derivative(z)) < 1e-6);
  }
  // removable-singularity value at the zeros
  for (std::size_t n = 0; n < s.size(); ++n) {
    cplx zn = s[n].value();
    double lhs = (1.0 - std::norm(zn)) * std::abs(b.derivative(zn));
    double prod = 1.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != n) prod *= pseudo_distance(s[j], s[n]);
    }
    CHECK(lhs == doctest::Approx(prod).epsilon(1e-12));
  }
}

TEST_CASE("characteristic via derivative equals product form") {
  CHECK(characteristic_via_blaschke(seq({cplx(0.3, 0)})) == doctest::Approx(1.0));
  CHECK(characteristic_via_blaschke(seq({cplx(0, 0), cplx(0.5, 0)})) ==
        doctest::Approx(0.5).epsilon(1e-12));
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    auto n = static_cast<std::size_t>(2 + (rng.next() % 9));
    auto s = random_separated(rng, n, 0.25);
    double a = s.characteristic();
    double via = characteristic_via_blaschke(s);
    CHECK(via == doctest::Approx(a).epsilon(1e-10));
  }
}

TEST_CASE("level radius closed forms and admissibility") {
  CHECK(level_radius(1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(level_radius(0.8, 1e-9) < 1e-8);
  CHECK_THROWS_AS(level_radius(0.5, 0.5), std::invalid_argument);  // 2*0.5/1.25 = 0.8 >= 0.5

  // threshold-level parameters give r > 1/2
  double es = 0.5;
  double delta = 1.0 - (1.0 - std::sqrt(es)) * (1.0 - std::sqrt(es)) / 8.0;
  double lambda = std::sqrt(es) - (1.0 - es) / 4.0;
  CHECK(2.0 * lambda / (1.0 + lambda * lambda) < delta);
  double r = level_radius(delta, lambda);
  CHECK(r > 0.5);
  CHECK(r == doctest::Approx(0.55882250993908555).epsilon(1e-12));
  // the induced inner characteristic exceeds 1/2
  double delta_m = (r / lambda - lambda) / (1.0 - r);
  CHECK(delta_m > 0.5);
}

TEST_CASE("lambda solver hits the target width") {
  const double nu_max = 2.0 - std::sqrt(3.0);
  // closed-form check at delta = 1: lambda = 6 M eps_nu with M = 1
  double eps_nu = std::pow(nu_max, 4) / 6.0;
  auto sol = solve_lambda(1.0, nu_max, eps_nu);
  CHECK(sol.M == doctest::Approx(1.0));
  CHECK(sol.lambda == doctest::Approx(6.0 * eps_nu).epsilon(1e-10));
  CHECK(sol.lambda < nu_max);
  CHECK(sol.residual < 1e-12);

  // generic deltas: compare against the quadratic
  //   lambda^2 - lambda*delta*(1 + 6 M eps) + 6 M eps = 0  (small root)
  for (double delta : {0.6, 0.75, 0.9, 0.99}) {
    double nu = nu_max;
    double eps = std::pow(nu_max, 3) * nu / 6.0;
    auto s = solve_lambda(delta, nu, eps);
    double M = interpolation_constant_bound(delta).value;
    double p = delta * (1.0 + 6.0 * M * eps);
    double q = 6.0 * M * eps;
    double root = (p - std::sqrt(p * p - 4.0 * q)) / 2.0;
    CHECK(s.lambda == doctest::Approx(root).epsilon(1e-10));
    CHECK(s.r / (6.0 * M) == doctest::Approx(eps).epsilon(1e-9));
    CHECK(s.lambda > 0.0);
    CHECK(s.lambda < nu);
  }

  CHECK_THROWS_AS(solve_lambda(0.4, nu_max, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(solve_lambda(0.9, 0.9, 1e-3), std::invalid_argument);
}

TEST_CASE("level components: single zero") {
  BlaschkeProduct b(seq({cplx(0, 0)}));
  LevelComponents lc(b, 0.5, level_radius(1.0, 0.5));
  CHECK(lc.component_of(cplx(0.1, 0.1)) == 0);
  CHECK(lc.component_of(cplx(0.9, 0)) == -1);
  Rng rng(44);
  for (int it = 0; it < 50; ++it) {
    cplx w = rng.disk_point(lc.r() * 0.999);
    CHECK(std::abs(lc.local_inverse(0, w) - w) < 1e-12);
  }
}

TEST_CASE("level components: multi zero roundtrip and membership") {
  Rng rng(55);
  auto s = random_separated(rng, 5, 0.55, 0.7);
  double delta = s.characteristic();
  REQUIRE(delta > 0.0);
  BlaschkeProduct b(s);
  // the admissible sup solves 2l/(1+l^2) = delta; take a safe fraction of it
  double lam_sup = (1.0 - std::sqrt(1.0 - delta * delta)) / delta;
  double lambda = 0.5 * lam_sup;
  double r = level_radius(delta, lambda);
  LevelComponents lc(b, lambda, r);

  for (std::size_t n = 0; n < s.size(); ++n) {
    CHECK(std::abs(lc.local_inverse(n, cplx(0, 0)) - s[n].value()) < 1e-12);
    Rng sub = rng.fork(n);
    for (int it = 0; it < 40; ++it) {
      cplx w = sub.disk_point(r * 0.98);
      cplx z = lc.local_inverse(n, w);
      CHECK(std::abs(b.eval(z) - w) < 1e-12);
      CHECK(pseudo_distance(z, s[n].value()) < lambda);
      CHECK(lc.component_of(z) == static_cast<int>(n));
      CHECK(lc.flow_to_zero(z) == static_cast<int>(n));
    }
  }

  // partition property on random points of the sublevel set
  int hits = 0;
  for (int it = 0; it < 500; ++it) {
    cplx z = rng.disk_point(0.95);
    if (std::abs(b.eval(z)) >= r) continue;
    int owner = -1;
    int count = 0;
    for (std::size_t n = 0; n < s.size(); ++n) {
      if (pseudo_distance(z, s[n].value()) < lambda) {
        owner = static_cast<int>(n);
        ++count;
      }
    }
    CHECK(count == 1);
    CHECK(lc.component_of(z) == owner);
    ++hits;
  }
  CHECK(hits > 0);
}

TEST_CASE("schwarz-pick containment of the small level set") {
  Rng rng(66);
  auto s = random_separated(rng, 4, 0.6, 0.65);
  double delta = s.characteristic();
  BlaschkeProduct b(s);
  double lam_sup = (1.0 - std::sqrt(1.0 - delta * delta)) / delta;
  double lambda = 0.5 * lam_sup;
  double r = level_radius(delta, lambda);
  LevelComponents lc(b, lambda, r);
  double M = interpolation_constant_bound(delta).value;
  double w_small = r / (6.0 * M);
  for (std::size_t n = 0; n < s.size(); ++n) {
    Rng sub = rng.fork(100 + n);
    for (int it = 0; it < 30; ++it) {
      // image of the small disk stays within lambda/(6M) of the zero
      cplx w = sub.disk_point(w_small * 0.999);
      cplx z = lc.local_inverse(n, w);
      CHECK(pseudo_distance(z, s[n].value()) <= lambda / (6.0 * M) + 1e-12);
      // points within r/(6M) of the zero stay in the small sublevel set
      cplx y = mobius_shift(s[n].value(), sub.disk_point(w_small * 0.999));
      CHECK(std::abs(b.eval(y)) < w_small);
      CHECK(lc.component_of(y) == static_cast<int>(n));
    }
  }
}
