#pragma once
#include <functional>
#include <utility>
#include <vector>

#include "dbar/field.hpp"

namespace dbar {

// Quadrature controls for the integral operator
//   (E h)(z) = -(1/pi) * Integral over supp h of h(w)/(w - z) dA(w).
// Near the support the integral is computed in polar coordinates centered at
// the singularity (bounded integrand, no principal value); far from the
// support it is computed directly over the source cells.
struct QuadratureConfig {
  double r_factor = 2.0;      // radial resolution multiplier, singularity frame
  bool bilinear = false;      // nearest-node source lookup by default
  double frame_switch = 1.25; // source-cell frame once |z| >= frame_switch * s
  bool sabotage = false;      // test hook: negates the kernel prefactor
};

// Single-point solve; out receives dim components.
void cauchy_solve(const GridField& h, cplx z, cplx* out, const QuadratureConfig& cfg = {});

// Batch solve, parallel over targets; accumulation order per target is fixed,
// so the result is identical to the serial reference bit for bit.
std::vector<cplx> cauchy_solve_field(const GridField& h, const std::vector<cplx>& targets,
                                     const QuadratureConfig& cfg = {});
// Serial reference implementation (benchmark baseline and equality oracle).
std::vector<cplx> cauchy_solve_field_serial(const GridField& h,
                                            const std::vector<cplx>& targets,
                                            const QuadratureConfig& cfg = {});

// omega(t) = t log(8/t), the continuity modulus; domain (0, 2].
double omega(double t);

struct ContinuityReport {
  double max_ratio = 0.0;   // max over pairs of |Eh(z1)-Eh(z2)| / (3 omega(|z1-z2|) |h|)
  std::size_t pairs = 0;    // pairs actually measured (coincident pairs skipped)
};
ContinuityReport continuity_check(const GridField& h,
                                  const std::vector<std::pair<cplx, cplx>>& pairs,
                                  const QuadratureConfig& cfg = {});

// Smooth compactly supported test function on D(center, radius):
//   rho(z) = exp(-a^2 / (a^2 - |z - center|^2)) inside, 0 outside.
struct Bump {
  cplx center;
  double radius;
  double eval(cplx z) const;
  cplx dbar(cplx z) const;  // analytic d(rho)/d(zbar)
};

// Defect of F as a weak solution of dF/dzbar = rhs, tested against the bump:
//   | Int F * drho/dzbar dz^dzbar + Int rhs * rho dz^dzbar |
// with dz^dzbar = -2i dA. The F term uses an (nr x ntheta) midpoint rule on
// the bump disk; the rhs term is refined by rhs_refine in both directions
// (rhs = f/(1-|z|^2) is the rough factor). Euclidean norm across components.
double weak_residual(const std::function<void(cplx, cplx*)>& F,
                     const std::function<void(cplx, cplx*)>& rhs, int dim, const Bump& bump,
                     std::size_t nr = 128, std::size_t ntheta = 128, int rhs_refine = 4);

}  // namespace dbar
