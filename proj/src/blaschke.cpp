#include "dbar/blaschke.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dbar {

BlaschkeProduct::BlaschkeProduct(FiniteSequence zeros) : zeros_(std::move(zeros)) {
  if (zeros_.empty()) throw std::invalid_argument("Blaschke product needs at least one zero");
}

cplx BlaschkeProduct::factor(std::size_t n, cplx z) const {
  cplx a = zeros_[n].value();
  if (a == 0.0) return z;
  return (std::abs(a) / a) * (a - z) / (1.0 - std::conj(a) * z);
}

cplx BlaschkeProduct::factor_derivative(std::size_t n, cplx z) const {
  cplx a = zeros_[n].value();
  if (a == 0.0) return 1.0;
  cplx den = 1.0 - std::conj(a) * z;
  return (std::abs(a) / a) * (std::norm(a) - 1.0) / (den * den);
}

cplx BlaschkeProduct::eval(cplx z) const {
  cplx p = 1.0;
  for (std::size_t n = 0; n < zeros_.size(); ++n) p *= factor(n, z);
  return p;
}

cplx BlaschkeProduct::derivative(cplx z) const {
  std::size_t n = zeros_.size();
  std::vector<cplx> pre(n + 1), suf(n + 1);
  pre[0] = 1.0;
  for (std::size_t k = 0; k < n; ++k) pre[k + 1] = pre[k] * factor(k, z);
  suf[n] = 1.0;
  for (std::size_t k = n; k-- > 0;) suf[k] = suf[k + 1] * factor(k, z);
  cplx d = 0.0;
  for (std::size_t k = 0; k < n; ++k) d += factor_derivative(k, z) * pre[k] * suf[k + 1];
  return d;
}

double BlaschkeProduct::characteristic_via_derivative() const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < zeros_.size(); ++k) {
    cplx zk = zeros_[k].value();
    double v = (1.0 - std::norm(zk)) * std::abs(derivative(zk));
    worst = std::min(worst, v);
  }
  return worst;
}

double characteristic_via_blaschke(const FiniteSequence& seq) {
  return BlaschkeProduct(seq).characteristic_via_derivative();
}

double level_radius(double delta, double lambda) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0,1)");
  if (!(2.0 * lambda / (1.0 + lambda * lambda) < delta)) {
    throw std::invalid_argument("separation 2*lambda/(1+lambda^2) < delta violated");
  }
  return lambda * (delta - lambda) / (1.0 - lambda * delta);
}

LambdaSolution solve_lambda(double delta, double nu, double eps_nu) {
  if (!(delta > 0.5 && delta <= 1.0)) {
    throw std::invalid_argument("solve_lambda needs characteristic > 1/2");
  }
  const double nu_max = 2.0 - std::sqrt(3.0);
  if (!(nu > 0.0 && nu <= nu_max + 1e-15)) {
    throw std::invalid_argument("nu must lie in (0, 2 - sqrt(3)]");
  }
  if (!(eps_nu > 0.0)) throw std::invalid_argument("eps_nu must be positive");

  double M = interpolation_constant_bound(delta).value;
  auto g = [&](double lam) { return level_radius(delta, lam) / (6.0 * M) - eps_nu; };
  double hi = nu;
  if (!(g(hi) > 0.0)) {
    throw std::invalid_argument("bracket invalid: level radius at nu does not reach 6*M*eps_nu");
  }
  double lo = 0.0;  // g(0+) = -eps_nu < 0
  double lam = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    lam = 0.5 * (lo + hi);
    double v = g(lam);
    if (std::abs(v) < 1e-13 * std::max(1.0, eps_nu)) break;
    if (v < 0.0) {
      lo = lam;
    } else {
      hi = lam;
    }
  }
  LambdaSolution s{};
  s.lambda = lam;
  s.r = level_radius(delta, lam);
  s.M = M;
  s.residual = std::abs(s.r / (6.0 * M) - eps_nu);
  return s;
}

LevelComponents::LevelComponents(BlaschkeProduct b, double lambda, double r)
    : b_(std::move(b)), lambda_(lambda), r_(r) {
  double delta = b_.zeros().characteristic();
  if (!(2.0 * lambda / (1.0 + lambda * lambda) < delta)) {
    throw std::invalid_argument("separation 2*lambda/(1+lambda^2) < delta violated");
  }
  double rmax = level_radius(delta, lambda);
  if (!(r > 0.0 && r <= rmax + 1e-15)) {
    throw std::invalid_argument("level radius exceeds lambda*(delta-lambda)/(1-lambda*delta)");
  }
}

int LevelComponents::component_of(cplx z) const {
  if (!(std::abs(b_.eval(z)) < r_)) return -1;
  for (std::size_t n = 0; n < b_.degree(); ++n) {
    if (pseudo_distance(z, b_.zeros()[n].value()) < lambda_) return static_cast<int>(n);
  }
  return -1;
}

bool LevelComponents::newton_segment(cplx& z, cplx target, std::size_t n) const {
  cplx zn = b_.zeros()[n].value();
  for (int it = 0; it < 50; ++it) {
    cplx f = b_.eval(z) - target;
    if (std::abs(f) <= 1e-13) return true;
    cplx d = b_.derivative(z);
    if (std::abs(d) < 1e-300) return false;
    z -= f / d;
    // leaving the lambda-disk means the iteration is drifting to a
    // different branch; fail and let the caller refine the ray
    if (pseudo_distance(z, zn) >= lambda_) return false;
  }
  return std::abs(b_.eval(z) - target) <= 1e-13;
}

cplx LevelComponents::local_inverse(std::size_t n, cplx w) const {
  if (n >= b_.degree()) throw std::invalid_argument("component index out of range");
  if (!(std::abs(w) < r_)) {
    throw std::invalid_argument("local inverse target must satisfy |w| < r");
  }
  cplx zn = b_.zeros()[n].value();
  for (int segments = 1; segments <= 64; segments *= 2) {
    cplx z = zn;
    bool ok = true;
    for (int s = 1; s <= segments && ok; ++s) {
      cplx target = w * (static_cast<double>(s) / segments);
      ok = newton_segment(z, target, n);
    }
    if (ok && pseudo_distance(z, zn) < lambda_) return z;
  }
  throw std::runtime_error("local inverse continuation failed for component " +
                           std::to_string(n));
}

int LevelComponents::flow_to_zero(cplx z) const {
  cplx w = b_.eval(z);
  if (!(std::abs(w) < r_)) return -1;
  cplx x = z;
  const int steps = 64;
  for (int s = steps - 1; s >= 0; --s) {
    cplx target = w * (static_cast<double>(s) / steps);
    for (int it = 0; it < 50; ++it) {
      cplx f = b_.eval(x) - target;
      if (std::abs(f) <= 1e-13) break;
      cplx d = b_.derivative(x);
      if (std::abs(d) < 1e-300) return -1;
      x -= f / d;
    }
  }
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < b_.degree(); ++n) {
    double dn = std::abs(x - b_.zeros()[n].value());
    if (dn < bd) {
      bd = dn;
      best = static_cast<int>(n);
    }
  }
  return (bd < 1e-6) ? best : -1;
}

}  // namespace dbar
