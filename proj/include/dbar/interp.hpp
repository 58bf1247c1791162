#pragma once
#include <vector>

#include "dbar/blaschke.hpp"
#include "dbar/sequence.hpp"

namespace dbar {

// Analytic basis with g_j(z_k) = delta_jk and the certified sup bound
// sum_j |g_j(z)| <= (2e/delta) log(e/delta^2) on the whole disk. Each
// g_j is a reduced Blaschke product times a squared reproducing-kernel
// ratio times an exponential damping factor accumulated over the zeros
// at least as far from the origin as z_j. A singleton gets g == 1.
//
// The constructor re-verifies the cardinal identities at the sequence
// points and measures sup_z sum_j |g_j| on a fixed polar sample; it
// rejects if the sample exceeds the certified bound by more than 1e-9,
// which can only happen through a construction bug.
class JonesBasis {
 public:
  explicit JonesBasis(FiniteSequence seq);

  const FiniteSequence& sequence() const { return seq_; }
  std::size_t size() const { return seq_.size(); }

  double alpha() const { return alpha_; }
  // min of the two classical interpolation-constant bounds; the radius
  // budgets everywhere downstream are expressed through this value
  double M() const { return m_; }
  // (2e/delta) log(e/delta^2), the bound this concrete basis certifies
  double certified_bound() const { return certified_; }
  // max of sum_j |g_j| over a fixed 64x64 polar sample of radius 0.995,
  // recorded at build time as a diagnostic against the certified bound
  double measured_sup() const { return measured_; }

  cplx eval(std::size_t j, cplx z) const;
  // out[j] = g_j(z); O(n) per call through prefix/suffix factor products
  // and one cumulative sum in decreasing-modulus order
  void eval_all(cplx z, cplx* out) const;
  std::vector<cplx> eval_all(cplx z) const;

 private:
  FiniteSequence seq_;
  BlaschkeProduct full_;
  double delta_ = 1.0;
  double alpha_ = 0.0;
  double m_ = 1.0;
  double certified_ = 1.0;
  double measured_ = 1.0;
  std::vector<std::size_t> order_;  // indices by decreasing |z_k|, stable
  std::vector<std::size_t> cut_;    // cut_[j] = #{k : |z_k| >= |z_j|}
  std::vector<cplx> b_diag_;        // prod_{k != j} factor_k(z_j)
  std::vector<cplx> shift_;         // sum over the cut of w_k(z_j)
};

inline JonesBasis build_jones_basis(FiniteSequence seq) {
  return JonesBasis(std::move(seq));
}

// One assembled matrix P(w)_{kj} = g_j(b_k(w)), reusable for many
// right-hand sides at the same w.
class NeumannSolver {
 public:
  std::size_t size() const { return n_; }
  const std::vector<cplx>& matrix() const { return p_; }  // row-major
  const std::vector<cplx>& points() const { return pts_; }  // b_k(w)

  // Solve P x = a (or P^T x = a) by the Neumann series around P(0) = I.
  // Throws when the terms stop contracting or the iteration cap is hit,
  // which flags a w outside the contraction region rather than returning
  // a silently wrong inverse.
  std::vector<cplx> solve(const std::vector<cplx>& a, bool transpose = false) const;

 private:
  friend NeumannSolver assemble_solver(const JonesBasis&, const LevelComponents&, cplx);
  std::size_t n_ = 0;
  std::vector<cplx> p_;
  std::vector<cplx> pts_;
};

NeumannSolver assemble_solver(const JonesBasis& basis, const LevelComponents& level,
                              cplx w);

// P(w)^{-1} a through the Neumann series, free-function form.
std::vector<cplx> neumann_inverse_apply(const JonesBasis& basis,
                                        const LevelComponents& level, cplx w,
                                        const std::vector<cplx>& a,
                                        bool transpose = false);

// Two-variable extension of the basis across the level components:
// f_j(z, w) = sum_k (P(w)^{-1} e_j)_k g_k(z), so that f_j(b_k(w), w)
// = delta_jk, f_j(., w) is analytic on the disk and f_j(z, .) analytic
// on the admissible w-range |w| <= r/(3M).
class TwoVariableBasis {
 public:
  TwoVariableBasis(FiniteSequence seq, double lambda, double r);

  const JonesBasis& basis() const { return basis_; }
  const LevelComponents& levels() const { return levels_; }
  std::size_t size() const { return basis_.size(); }
  double M() const { return basis_.M(); }
  double w_radius() const { return w_radius_; }  // r / (3M)

  // admissibility guard |w| <= r/(3M) applies to every call below
  NeumannSolver solver_at(cplx w) const;
  std::vector<cplx> matrix_at(cplx w) const;  // row-major P(w)

  std::vector<cplx> inverse_apply(cplx w, const std::vector<cplx>& a,
                                  bool transpose = false) const;

  cplx f_eval(std::size_t j, cplx z, cplx w) const;
  // all f_j(z, w) at once: one transposed solve against g(z), so the
  // l1 norm of the result is exactly sum_j |f_j(z, w)|
  std::vector<cplx> f_all(cplx z, cplx w) const;

 private:
  JonesBasis basis_;
  LevelComponents levels_;
  double w_radius_ = 0.0;
};

inline cplx f_basis_eval(const TwoVariableBasis& tvb, std::size_t j, cplx z, cplx w) {
  return tvb.f_eval(j, z, w);
}

}  // namespace dbar
