#pragma once
#include <complex>
#include <variant>
#include <vector>

namespace dbar {

using cplx = std::complex<double>;

// Everything in the library degenerates on the unit circle, so construction
// rejects points with |z| >= 1 - 1e-12.
inline constexpr double kBoundaryMargin = 1e-12;

class DiskPoint {
 public:
  DiskPoint() = default;
  explicit DiskPoint(cplx v);
  DiskPoint(double re, double im) : DiskPoint(cplx(re, im)) {}
  cplx value() const { return v_; }

  friend bool operator==(const DiskPoint& a, const DiskPoint& b) {
    return a.v_ == b.v_;  // exact; used only for duplicate rejection
  }

 private:
  cplx v_{0.0, 0.0};
};

// |(z - w) / (1 - conj(w) z)|; both arguments must lie inside the disk
double pseudo_distance(cplx z, cplx w);
inline double pseudo_distance(DiskPoint z, DiskPoint w) {
  return pseudo_distance(z.value(), w.value());
}

// hyperbolic sum (a + b) / (1 + a b); ties pseudo radii along a geodesic
double pseudo_sum(double a, double b);

// g_c(w) = (w + c) / (1 + conj(c) w); maps 0 to c, disk onto disk
cplx mobius_shift(cplx center, cplx w);
// g_c^{-1}(z) = (z - c) / (1 - conj(c) z)
cplx mobius_inverse(cplx center, cplx z);

struct PseudoDisk {
  PseudoDisk(DiskPoint c, double r);
  DiskPoint center;
  double radius;  // pseudohyperbolic, in (0,1)
  bool contains(cplx z) const;
};

// pi s^2 / (1 - s^2); invariant under disk automorphisms
double hyperbolic_area(const PseudoDisk& d);

// A pseudohyperbolic disk is a Euclidean disk with shifted center.
struct EuclidDisk {
  cplx center{};
  double radius{};
};
EuclidDisk euclid_image(const PseudoDisk& d);

// Open nu-fattening of a base set: contains(z) iff inf over the base of the
// pseudohyperbolic distance is < nu. For a disk base the distance to
// D(c, r) is (rho(z,c) - r) / (1 - r rho(z,c)) when z is outside.
class Neighbourhood {
 public:
  Neighbourhood(std::vector<DiskPoint> base, double nu);
  Neighbourhood(std::vector<PseudoDisk> base, double nu);
  bool contains(cplx z) const;
  double nu() const { return nu_; }

 private:
  std::variant<std::vector<DiskPoint>, std::vector<PseudoDisk>> base_;
  double nu_;
};

}  // namespace dbar
