#pragma once
#include <vector>

#include "dbar/sequence.hpp"

namespace dbar {

// Finite Blaschke product with normalized factors (|a|/a)(a - z)/(1 - conj(a) z),
// the factor for a zero at the origin being plain z.
class BlaschkeProduct {
 public:
  explicit BlaschkeProduct(FiniteSequence zeros);

  const FiniteSequence& zeros() const { return zeros_; }
  std::size_t degree() const { return zeros_.size(); }

  cplx eval(cplx z) const;
  // prefix/suffix product rule; no division, stable at the zeros
  cplx derivative(cplx z) const;

  cplx factor(std::size_t n, cplx z) const;
  cplx factor_derivative(std::size_t n, cplx z) const;

  // inf over n of (1 - |z_n|^2) |B'(z_n)|; equals the product characteristic
  double characteristic_via_derivative() const;

 private:
  FiniteSequence zeros_;
};

// characteristic recomputed through the derivative form
double characteristic_via_blaschke(const FiniteSequence& seq);

// r = lambda (delta - lambda) / (1 - lambda delta); requires the separation
// condition 2 lambda / (1 + lambda^2) < delta, which makes the lambda-disks
// around the zeros pairwise disjoint.
double level_radius(double delta, double lambda);

struct LambdaSolution {
  double lambda;
  double r;
  double M;         // interpolation constant bound used
  double residual;  // |r/(6M) - eps_nu| at the returned lambda
};

// Bisection for lambda in (0, nu) with level_radius(delta)/(6M) = eps_nu.
// Requires delta > 1/2 and nu <= 2 - sqrt(3) so the bracket is valid.
LambdaSolution solve_lambda(double delta, double nu, double eps_nu);

// Preimage structure of the sublevel set |B| < r: one simply connected
// component V_n around each zero, contained in D(z_n, lambda), carrying a
// holomorphic inverse branch b_n : D_r -> V_n with b_n(0) = z_n.
class LevelComponents {
 public:
  LevelComponents(BlaschkeProduct b, double lambda, double r);

  const BlaschkeProduct& product() const { return b_; }
  double lambda() const { return lambda_; }
  double r() const { return r_; }

  // index of the component containing z, or -1; the lambda-disks are
  // pairwise disjoint so membership is |B(z)| < r plus the disk test
  int component_of(cplx z) const;

  // Newton solve of B(z) = w seeded at zero n, with ray continuation when a
  // single segment fails; validates the result stays inside D(z_n, lambda)
  cplx local_inverse(std::size_t n, cplx w) const;

  // test hook: continuation along t -> t*B(z) down to 0 identifies the zero
  // whose component z belongs to
  int flow_to_zero(cplx z) const;

 private:
  bool newton_segment(cplx& z, cplx target, std::size_t n) const;

  BlaschkeProduct b_;
  double lambda_;
  double r_;
};

}  // namespace dbar
