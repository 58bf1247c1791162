#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dbar/interp.hpp"
#include "dbar/rng.hpp"
#include "doctest.h"

using namespace dbar;

namespace {

FiniteSequence seq(std::initializer_list<cplx> pts) {
  std::vector<DiskPoint> v;
  for (cplx p : pts) v.emplace_back(p);
  return FiniteSequence(std::move(v));
}

FiniteSequence random_separated(Rng& rng, std::size_t n, double min_sep,
                                double rmax = 0.9) {
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

// sequence with characteristic at least dmin, by rejection
FiniteSequence random_with_delta(Rng& rng, std::size_t n, double dmin) {
  for (int t = 0; t < 200; ++t) {
    FiniteSequence s = random_separated(rng, n, 0.82, 0.93);
    if (s.characteristic() >= dmin) return s;
  }
  REQUIRE(false);
  return FiniteSequence(std::vector<DiskPoint>{});
}

// Direct O(n^2) transcription of the basis formula, kept deliberately
// independent of the production code paths (no prefix/suffix products,
// no sorted cumulative sums).
cplx naive_g(const FiniteSequence& s, std::size_t j, cplx z) {
  const std::size_t n = s.size();
  if (n == 1) return cplx(1.0, 0.0);
  const double delta = s.characteristic();
  const double alpha = 1.0 / (2.0 * (1.0 - 2.0 * std::log(delta)));
  const cplx zj = s[j].value();

  auto bfac = [](cplx a, cplx z0) {
    if (a == cplx(0.0, 0.0)) return z0;
    return (std::abs(a) / a) * (a - z0) / (1.0 - std::conj(a) * z0);
  };
  cplx num(1.0, 0.0), den(1.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == j) continue;
    num *= bfac(s[k].value(), z);
    den *= bfac(s[k].value(), zj);
  }
  auto w = [](cplx a, cplx z0) {
    return (1.0 - std::norm(a)) * (1.0 + std::conj(a) * z0) /
           (1.0 - std::conj(a) * z0);
  };
  cplx expo(0.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(s[k].value()) >= std::abs(zj))
      expo += w(s[k].value(), z) - w(s[k].value(), zj);
  }
  const cplx kern = (1.0 - std::norm(zj)) / (1.0 - std::conj(zj) * z);
  return (num / den) * kern * kern * std::exp(-alpha * expo);
}

struct TvbFixture {
  FiniteSequence s;
  double lambda;
  double r;
  TwoVariableBasis tvb;
  explicit TvbFixture(FiniteSequence sq)
      : s(std::move(sq)),
        lambda(0.5 * (1.0 - std::sqrt(1.0 - std::pow(s.characteristic(), 2))) /
               s.characteristic()),
        r(0.999 * level_radius(s.characteristic(), lambda)),
        tvb(s, lambda, r) {}
};

}  // namespace

TEST_CASE("basis matches a naive transcription of its formula") {
  Rng rng(1001);
  for (int trial = 0; trial < 6; ++trial) {
    Rng sub = rng.fork(trial);
    std::size_t n = 2 + (sub.next() % 9);
    FiniteSequence s = random_separated(sub, n, 0.4, 0.92);
    JonesBasis jb(s);
    for (int it = 0; it < 40; ++it) {
      cplx z = sub.disk_point(0.999);
      std::vector<cplx> g = jb.eval_all(z);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(std::abs(g[j] - naive_g(s, j, z)) < 1e-12 * (1.0 + std::abs(g[j])));
      }
    }
  }
}

TEST_CASE("cardinal identities and closed-form examples") {
  JonesBasis jb(seq({cplx(0, 0), cplx(0.5, 0)}));
  std::vector<cplx> g0 = jb.eval_all(cplx(0, 0));
  std::vector<cplx> g1 = jb.eval_all(cplx(0.5, 0));
  CHECK(std::abs(g0[0] - 1.0) < 1e-12);
  CHECK(g0[1] == cplx(0.0, 0.0));  // the omitted factor vanishes exactly
  CHECK(std::abs(g1[1] - 1.0) < 1e-12);
  CHECK(g1[0] == cplx(0.0, 0.0));

  Rng rng(1002);
  FiniteSequence s = random_separated(rng, 7, 0.45, 0.9);
  JonesBasis jb7(s);
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::vector<cplx> g = jb7.eval_all(s[k].value());
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j == k)
        CHECK(std::abs(g[j] - 1.0) < 1e-12);
      else
        CHECK(std::abs(g[j]) == 0.0);
    }
  }
}

TEST_CASE("sampled sum stays below the certified bound") {
  Rng rng(1003);
  for (int trial = 0; trial < 5; ++trial) {
    Rng sub = rng.fork(trial);
    FiniteSequence s = random_separated(sub, 3 + (sub.next() % 6), 0.5, 0.9);
    JonesBasis jb(s);
    const double delta = s.characteristic();
    const InterpolationBound bd = interpolation_constant_bound(delta);
    CHECK(jb.certified_bound() == doctest::Approx(bd.jones).epsilon(1e-14));
    CHECK(jb.M() == doctest::Approx(bd.value).epsilon(1e-14));
    CHECK(jb.alpha() ==
          doctest::Approx(1.0 / (2.0 * (1.0 - 2.0 * std::log(delta)))).epsilon(1e-14));
    CHECK(jb.measured_sup() <= jb.certified_bound() + 1e-9);
    CHECK(jb.measured_sup() >= 1.0 - 1e-9);  // the sum is 1 at each node
    // property form at fresh points, including close to the rim
    for (int it = 0; it < 300; ++it) {
      cplx z = sub.disk_point(0.9999);
      std::vector<cplx> g = jb.eval_all(z);
      double sum = 0.0;
      for (const cplx& v : g) sum += std::abs(v);
      CHECK(sum <= jb.certified_bound() + 1e-9);
    }
  }
}

TEST_CASE("singleton basis is the constant 1") {
  JonesBasis jb(seq({cplx(0.3, -0.4)}));
  CHECK(jb.size() == 1);
  CHECK(jb.measured_sup() == 1.0);
  CHECK(jb.eval(0, cplx(0.9, 0.05)) == cplx(1.0, 0.0));
  CHECK(jb.eval_all(cplx(-0.2, 0.7))[0] == cplx(1.0, 0.0));
  CHECK_THROWS_AS((void)jb.eval(1, cplx(0, 0)), std::invalid_argument);
}

TEST_CASE("matrix family is the identity at w = 0") {
  Rng rng(1004);
  TvbFixture fx(random_with_delta(rng, 5, 0.55));
  const std::size_t n = fx.tvb.size();
  std::vector<cplx> p = fx.tvb.matrix_at(cplx(0, 0));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::abs(p[k * n + j] - (k == j ? 1.0 : 0.0)) < 1e-10);

  // identity rhs pass-through
  std::vector<cplx> a(n);
  for (auto& v : a) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  std::vector<cplx> x = fx.tvb.inverse_apply(cplx(0, 0), a);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - a[i]) < 1e-10);
}

TEST_CASE("neumann solve round trip at the admissible radius") {
  Rng rng(1005);
  for (int trial = 0; trial < 3; ++trial) {
    Rng sub = rng.fork(trial);
    TvbFixture fx(random_with_delta(sub, 3 + (sub.next() % 4), 0.55));
    const std::size_t n = fx.tvb.size();
    for (int it = 0; it < 8; ++it) {
      const double rad = fx.tvb.w_radius() * (it < 4 ? 1.0 : 0.6);
      const cplx w = std::polar(rad, sub.uniform(0.0, 2.0 * std::numbers::pi));
      NeumannSolver solver = fx.tvb.solver_at(w);
      std::vector<cplx> a(n);
      double amax = 0.0;
      for (auto& v : a) {
        v = cplx(sub.uniform(-1, 1), sub.uniform(-1, 1));
        amax = std::max(amax, std::abs(v));
      }
      for (bool transpose : {false, true}) {
        std::vector<cplx> x = solver.solve(a, transpose);
        // residual against the assembled matrix
        for (std::size_t i = 0; i < n; ++i) {
          cplx s(0.0, 0.0);
          for (std::size_t k = 0; k < n; ++k)
            s += transpose ? solver.matrix()[k * n + i] * x[k]
                           : solver.matrix()[i * n + k] * x[k];
          CHECK(std::abs(s - a[i]) < 1e-11 * std::max(1.0, amax));
        }
      }
    }
  }
}

TEST_CASE("contraction margin of the matrix family") {
  Rng rng(1006);
  for (int trial = 0; trial < 3; ++trial) {
    Rng sub = rng.fork(trial);
    TvbFixture fx(random_with_delta(sub, 3 + (sub.next() % 4), 0.55));
    const std::size_t n = fx.tvb.size();
    double worst = 0.0;
    for (int it = 0; it < 16; ++it) {
      const cplx w =
          std::polar(fx.tvb.w_radius(), sub.uniform(0.0, 2.0 * std::numbers::pi));
      std::vector<cplx> p = fx.tvb.matrix_at(w);
      for (std::size_t k = 0; k < n; ++k) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          row += std::abs(p[k * n + j] - (k == j ? 1.0 : 0.0));
        worst = std::max(worst, row);
      }
    }
    CHECK(worst < 0.5);  // the series premise, with real margin
  }
}

TEST_CASE("two-variable interpolation identities") {
  Rng rng(1007);
  for (int trial = 0; trial < 3; ++trial) {
    Rng sub = rng.fork(trial);
    TvbFixture fx(random_with_delta(sub, 3 + (sub.next() % 4), 0.55));
    const std::size_t n = fx.tvb.size();
    for (int it = 0; it < 17; ++it) {
      const cplx w = std::polar(fx.tvb.w_radius() * sub.uniform(),
                                sub.uniform(0.0, 2.0 * std::numbers::pi));
      NeumannSolver solver = fx.tvb.solver_at(w);
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<cplx> f = fx.tvb.f_all(solver.points()[k], w);
        for (std::size_t j = 0; j < n; ++j)
          CHECK(std::abs(f[j] - (j == k ? 1.0 : 0.0)) < 1e-10);
      }
    }
  }
}

TEST_CASE("f_eval agrees with f_all and the free-function forms") {
  Rng rng(1008);
  TvbFixture fx(random_with_delta(rng, 4, 0.55));
  const std::size_t n = fx.tvb.size();
  for (int it = 0; it < 10; ++it) {
    const cplx z = rng.disk_point(0.95);
    const cplx w = std::polar(fx.tvb.w_radius() * rng.uniform(),
                              rng.uniform(0.0, 2.0 * std::numbers::pi));
    std::vector<cplx> f = fx.tvb.f_all(z, w);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(fx.tvb.f_eval(j, z, w) - f[j]) < 1e-12);
      CHECK(f_basis_eval(fx.tvb, j, z, w) == fx.tvb.f_eval(j, z, w));
    }
    std::vector<cplx> a(n, cplx(0.4, -0.3));
    std::vector<cplx> x1 = fx.tvb.inverse_apply(w, a);
    std::vector<cplx> x2 =
        neumann_inverse_apply(fx.tvb.basis(), fx.tvb.levels(), w, a);
    for (std::size_t i = 0; i < n; ++i) CHECK(x1[i] == x2[i]);
  }
}

TEST_CASE("two-variable sum bound 2M on a sample grid") {
  Rng rng(1009);
  for (int trial = 0; trial < 2; ++trial) {
    Rng sub = rng.fork(trial);
    TvbFixture fx(random_with_delta(sub, 3 + (sub.next() % 4), 0.55));
    const double cap = 2.0 * fx.tvb.M();
    for (int wi = 0; wi < 8; ++wi) {
      const cplx w = std::polar(fx.tvb.w_radius() * (wi + 1) / 8.0, 0.7 * wi);
      for (int i = 0; i < 12; ++i) {
        for (int k = 0; k < 12; ++k) {
          const cplx z = std::polar((i + 0.5) / 12.0 * 0.995,
                                    (k + 0.5) / 12.0 * 2.0 * std::numbers::pi);
          std::vector<cplx> f = fx.tvb.f_all(z, w);
          double sum = 0.0;
          for (const cplx& v : f) sum += std::abs(v);
          CHECK(sum <= cap);
        }
      }
    }
  }
}

TEST_CASE("f is analytic in w: contour mean equals center value") {
  Rng rng(1010);
  TvbFixture fx(random_with_delta(rng, 4, 0.55));
  const std::size_t n = fx.tvb.size();
  const double R = 0.6 * fx.tvb.w_radius();
  for (int it = 0; it < 5; ++it) {
    const cplx z = rng.disk_point(0.9);
    std::vector<cplx> mean(n, cplx(0.0, 0.0));
    const int Q = 64;
    for (int q = 0; q < Q; ++q) {
      const cplx w = std::polar(R, 2.0 * std::numbers::pi * (q + 0.5) / Q);
      std::vector<cplx> f = fx.tvb.f_all(z, w);
      for (std::size_t j = 0; j < n; ++j) mean[j] += f[j] / double(Q);
    }
    std::vector<cplx> center = fx.tvb.f_all(z, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(mean[j] - center[j]) < 1e-8);
  }
}

TEST_CASE("solver guards: domain, rhs size, degenerate inputs") {
  Rng rng(1011);
  TvbFixture fx(random_with_delta(rng, 3, 0.55));
  std::vector<cplx> a(fx.tvb.size(), cplx(1.0, 0.0));
  CHECK_THROWS_AS((void)fx.tvb.inverse_apply(cplx(fx.tvb.w_radius() * 1.01, 0), a),
                  std::invalid_argument);
  std::vector<cplx> bad(fx.tvb.size() + 1, cplx(1.0, 0.0));
  CHECK_THROWS_AS((void)fx.tvb.inverse_apply(cplx(0, 0), bad), std::invalid_argument);
  CHECK_THROWS_AS((void)fx.tvb.f_eval(fx.tvb.size(), cplx(0, 0), cplx(0, 0)),
                  std::invalid_argument);

  // singleton: P(w) is the 1x1 identity for every admissible w
  TwoVariableBasis single(seq({cplx(0.2, 0.1)}), 0.4, 0.3);
  std::vector<cplx> one{cplx(0.7, -0.2)};
  std::vector<cplx> back = single.inverse_apply(cplx(0.05, 0.02), one);
  CHECK(std::abs(back[0] - one[0]) < 1e-12);
  CHECK(std::abs(single.f_eval(0, cplx(0.5, 0.3), cplx(0.01, 0.0)) - 1.0) < 1e-12);
}
