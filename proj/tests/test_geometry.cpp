#include <cmath>
#include <numbers>

#include "dbar/geometry.hpp"
#include "dbar/rng.hpp"
#include "doctest.h"

using namespace dbar;

TEST_CASE("pseudo distance closed forms") {
  CHECK(pseudo_distance(cplx(0, 0), cplx(0.5, 0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pseudo_distance(cplx(0.3, 0.4), cplx(0.3, 0.4)) == 0.0);
  // (0.5 - (-0.5)) / (1 + 0.25) = 0.8
  CHECK(pseudo_distance(cplx(0.5, 0), cplx(-0.5, 0)) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("pseudo distance symmetry, range, moebius invariance") {
  Rng rng(101);
  for (int it = 0; it < 200; ++it) {
    cplx u = rng.disk_point(0.98), v = rng.disk_point(0.98), c = rng.disk_point(0.9);
    double duv = pseudo_distance(u, v);
    CHECK(duv == pseudo_distance(v, u));
    CHECK(duv >= 0.0);
    CHECK(duv < 1.0);
    double dg = pseudo_distance(mobius_shift(c, u), mobius_shift(c, v));
    CHECK(dg == doctest::Approx(duv).epsilon(1e-12));
  }
}

TEST_CASE("triangle inequality in the pseudo-sum form") {
  Rng rng(202);
  for (int it = 0; it < 200; ++it) {
    cplx x = rng.disk_point(0.97), y = rng.disk_point(0.97), z = rng.disk_point(0.97);
    double a = pseudo_distance(x, y), b = pseudo_distance(y, z);
    CHECK(pseudo_distance(x, z) <= pseudo_sum(a, b) + 1e-14);
  }
}

TEST_CASE("moebius shift and inverse") {
  CHECK(mobius_shift(cplx(0.3, 0), cplx(0, 0)) == cplx(0.3, 0));
  CHECK(std::abs(mobius_shift(cplx(0.5, 0), cplx(0.5, 0)) - cplx(0.8, 0)) < 1e-15);
  CHECK(std::abs(mobius_inverse(cplx(0.3, 0), cplx(0.3, 0))) < 1e-15);
  CHECK(std::abs(mobius_inverse(cplx(0.5, 0), cplx(0.8, 0)) - cplx(0.5, 0)) < 1e-14);
  Rng rng(303);
  for (int it = 0; it < 100; ++it) {
    cplx c = rng.disk_point(0.9), w = rng.disk_point(0.95);
    CHECK(std::abs(mobius_shift(c, mobius_inverse(c, mobius_shift(c, w))) -
                   mobius_shift(c, w)) < 1e-13);
    CHECK(std::abs(mobius_inverse(c, mobius_shift(c, w)) - w) < 1e-13);
  }
}

TEST_CASE("disk point validation") {
  CHECK_NOTHROW(DiskPoint(0.999, 0.0));
  CHECK_THROWS(DiskPoint(1.0, 0.0));
  CHECK_THROWS(DiskPoint(1.0 - 1e-13, 0.0));
  CHECK_THROWS(DiskPoint(0.8, 0.8));
}

TEST_CASE("hyperbolic area closed form and quadrature oracle") {
  double s = 1.0 / std::sqrt(2.0);
  PseudoDisk d(DiskPoint(0.0, 0.0), s);
  CHECK(hyperbolic_area(d) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  PseudoDisk tiny(DiskPoint(0.2, 0.1), 1e-6);
  CHECK(hyperbolic_area(tiny) < 1e-10);

  // midpoint quadrature of the density (1-|z|^2)^{-2} over D(0.4, 0.3),
  // integrated over its Euclidean image
  PseudoDisk pd(DiskPoint(0.4, 0.0), 0.3);
  EuclidDisk e = euclid_image(pd);
  std::size_t n = 600;
  double h = 2.0 * e.radius / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      cplx z = e.center + cplx((i + 0.5) * h - e.radius, (k + 0.5) * h - e.radius);
      if (std::abs(z - e.center) > e.radius) continue;
      double t = 1.0 - std::norm(z);
      acc += h * h / (t * t);
    }
  }
  CHECK(acc == doctest::Approx(hyperbolic_area(pd)).epsilon(1e-2));
}

TEST_CASE("euclidean image of a pseudo disk") {
  PseudoDisk pd(DiskPoint(0.35, -0.2), 0.4);
  EuclidDisk e = euclid_image(pd);
  // boundary of the Euclidean image lies at pseudo distance = radius
  for (int k = 0; k < 16; ++k) {
    double th = 2.0 * std::numbers::pi * k / 16.0;
    cplx z = e.center + e.radius * std::polar(1.0, th);
    CHECK(pseudo_distance(z, pd.center.value()) == doctest::Approx(pd.radius).epsilon(1e-12));
  }
  // center maps: boundary midpoint property is enough; also containment both ways
  Rng rng(404);
  for (int it = 0; it < 200; ++it) {
    cplx z = rng.disk_point(0.95);
    bool in_pseudo = pd.contains(z);
    bool in_euclid = std::abs(z - e.center) < e.radius;
    CHECK(in_pseudo == in_euclid);
  }
}

TEST_CASE("pseudo sum fattens disks exactly") {
  // distance from z to D(c,r) is < nu exactly when rho(z,c) < pseudo_sum(r,nu)
  double r = 0.3, nu = 0.25;
  cplx c(0.2, 0.1);
  Neighbourhood nb(std::vector<PseudoDisk>{PseudoDisk(DiskPoint(c), r)}, nu);
  Rng rng(505);
  double fat = pseudo_sum(r, nu);
  for (int it = 0; it < 400; ++it) {
    cplx z = rng.disk_point(0.97);
    CHECK(nb.contains(z) == (pseudo_distance(z, c) < fat));
  }
}

TEST_CASE("neighbourhood membership closed forms") {
  Neighbourhood n1(std::vector<DiskPoint>{DiskPoint(0.0, 0.0)}, 0.5);
  CHECK(n1.contains(cplx(0.3, 0)));
  CHECK(!n1.contains(cplx(0.6, 0)));
  // rho(0.85, 0.9) = 0.05 / (1 - 0.765) ~ 0.2128 > 0.2
  Neighbourhood n2(std::vector<DiskPoint>{DiskPoint(0.0, 0.0), DiskPoint(0.9, 0.0)}, 0.2);
  CHECK(!n2.contains(cplx(0.85, 0)));
  CHECK(pseudo_distance(cplx(0.85, 0), cplx(0.9, 0)) == doctest::Approx(0.05 / 0.235).epsilon(1e-12));
}
