#include "dbar/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dbar {

DiskPoint::DiskPoint(cplx v) : v_(v) {
  if (!(std::abs(v) < 1.0 - kBoundaryMargin)) {
    throw std::invalid_argument("disk point must satisfy |z| < 1 - 1e-12, got |z| = " +
                                std::to_string(std::abs(v)));
  }
}

double pseudo_distance(cplx z, cplx w) {
  // ratio of moduli rather than modulus of the quotient: the two complex
  // products are exact conjugates, so the result is bitwise symmetric
  return std::abs(z - w) / std::abs(1.0 - std::conj(w) * z);
}

double pseudo_sum(double a, double b) { return (a + b) / (1.0 + a * b); }

cplx mobius_shift(cplx center, cplx w) {
  return (w + center) / (1.0 + std::conj(center) * w);
}

cplx mobius_inverse(cplx center, cplx z) {
  return (z - center) / (1.0 - std::conj(center) * z);
}

PseudoDisk::PseudoDisk(DiskPoint c, double r) : center(c), radius(r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw std::invalid_argument("pseudo disk radius must lie in (0,1)");
  }
}

bool PseudoDisk::contains(cplx z) const {
  return pseudo_distance(z, center.value()) < radius;
}

double hyperbolic_area(const PseudoDisk& d) {
  double s2 = d.radius * d.radius;
  return std::numbers::pi * s2 / (1.0 - s2);
}

EuclidDisk euclid_image(const PseudoDisk& d) {
  cplx c = d.center.value();
  double s = d.radius;
  double ac2 = std::norm(c);
  double den = 1.0 - s * s * ac2;
  return {c * (1.0 - s * s) / den, s * (1.0 - ac2) / den};
}

Neighbourhood::Neighbourhood(std::vector<DiskPoint> base, double nu)
    : base_(std::move(base)), nu_(nu) {
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("nu must lie in (0,1)");
  if (std::get<0>(base_).empty()) throw std::invalid_argument("empty neighbourhood base");
}

Neighbourhood::Neighbourhood(std::vector<PseudoDisk> base, double nu)
    : base_(std::move(base)), nu_(nu) {
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("nu must lie in (0,1)");
  if (std::get<1>(base_).empty()) throw std::invalid_argument("empty neighbourhood base");
}

bool Neighbourhood::contains(cplx z) const {
  if (base_.index() == 0) {
    for (const auto& p : std::get<0>(base_)) {
      if (pseudo_distance(z, p.value()) < nu_) return true;
    }
    return false;
  }
  for (const auto& d : std::get<1>(base_)) {
    // fattening a disk by nu just grows the radius along geodesics
    if (pseudo_distance(z, d.center.value()) < pseudo_sum(d.radius, nu_)) return true;
  }
  return false;
}

}  // namespace dbar
