#include "dbar/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dbar {
namespace {

// w_a(z) = (1 - |a|^2)(1 + conj(a) z)/(1 - conj(a) z); Re w_a > 0 on the
// disk and |w_a| <= 4 everywhere, so the damping exponents cannot overflow
cplx horo(cplx a, cplx z) {
  const cplx az = std::conj(a) * z;
  return (1.0 - std::norm(a)) * (1.0 + az) / (1.0 - az);
}

}  // namespace

JonesBasis::JonesBasis(FiniteSequence seq)
    : seq_(std::move(seq)), full_(seq_) {
  const std::size_t n = seq_.size();
  delta_ = seq_.characteristic();
  const double logterm = std::log(std::numbers::e / (delta_ * delta_));
  alpha_ = 1.0 / (2.0 * logterm);
  const InterpolationBound bd = interpolation_constant_bound(delta_);
  m_ = bd.value;
  certified_ = bd.jones;

  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(seq_[a].value()) > std::abs(seq_[b].value());
  });

  cut_.assign(n, 0);
  b_diag_.assign(n, cplx(1.0, 0.0));
  shift_.assign(n, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    const cplx zj = seq_[j].value();
    const double mj = std::abs(zj);
    std::size_t cut = 0;
    cplx c(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(seq_[k].value()) >= mj) {
        ++cut;
        c += horo(seq_[k].value(), zj);
      }
      if (k != j) b_diag_[j] *= full_.factor(k, zj);
    }
    cut_[j] = cut;
    shift_[j] = c;
  }

  if (n == 1) {
    measured_ = 1.0;
    return;
  }

  // cardinal identities at the sequence points
  std::vector<cplx> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    eval_all(seq_[k].value(), g.data());
    for (std::size_t j = 0; j < n; ++j) {
      const double err = std::abs(g[j] - (j == k ? 1.0 : 0.0));
      if (err > 1e-10)
        throw std::runtime_error("interpolation basis failed its cardinal identities");
    }
  }

  // sampled sup of sum_j |g_j| against the certified bound
  double sup = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double rad = (i + 0.5) / 64.0 * 0.995;
    for (int k = 0; k < 64; ++k) {
      const double th = (k + 0.5) / 64.0 * 2.0 * std::numbers::pi;
      eval_all(std::polar(rad, th), g.data());
      double s = 0.0;
      for (const cplx& v : g) s += std::abs(v);
      sup = std::max(sup, s);
    }
  }
  measured_ = sup;
  if (measured_ > certified_ + 1e-9)
    throw std::runtime_error("interpolation basis exceeded its certified sup bound");
}

void JonesBasis::eval_all(cplx z, cplx* out) const {
  const std::size_t n = seq_.size();
  if (n == 1) {
    out[0] = cplx(1.0, 0.0);
    return;
  }
  std::vector<cplx> fac(n), pre(n + 1), suf(n + 1), cums(n + 1);
  for (std::size_t k = 0; k < n; ++k) fac[k] = full_.factor(k, z);
  pre[0] = cplx(1.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) pre[k + 1] = pre[k] * fac[k];
  suf[n] = cplx(1.0, 0.0);
  for (std::size_t k = n; k-- > 0;) suf[k] = fac[k] * suf[k + 1];
  cums[0] = cplx(0.0, 0.0);
  for (std::size_t m = 0; m < n; ++m)
    cums[m + 1] = cums[m] + horo(seq_[order_[m]].value(), z);

  for (std::size_t j = 0; j < n; ++j) {
    const cplx zj = seq_[j].value();
    const cplx kern = (1.0 - std::norm(zj)) / (1.0 - std::conj(zj) * z);
    const cplx bj = pre[j] * suf[j + 1];
    out[j] = (bj / b_diag_[j]) * kern * kern *
             std::exp(-alpha_ * (cums[cut_[j]] - shift_[j]));
  }
}

std::vector<cplx> JonesBasis::eval_all(cplx z) const {
  std::vector<cplx> out(seq_.size());
  eval_all(z, out.data());
  return out;
}

cplx JonesBasis::eval(std::size_t j, cplx z) const {
  if (j >= seq_.size()) throw std::invalid_argument("basis index out of range");
  return eval_all(z)[j];
}

NeumannSolver assemble_solver(const JonesBasis& basis, const LevelComponents& level,
                              cplx w) {
  const std::size_t n = basis.size();
  NeumannSolver s;
  s.n_ = n;
  s.pts_.resize(n);
  s.p_.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    s.pts_[k] = level.local_inverse(k, w);
    basis.eval_all(s.pts_[k], s.p_.data() + k * n);
  }
  return s;
}

std::vector<cplx> NeumannSolver::solve(const std::vector<cplx>& a,
                                       bool transpose) const {
  if (a.size() != n_) throw std::invalid_argument("rhs size mismatch");
  double amax = 1.0;
  for (const cplx& v : a) amax = std::max(amax, std::abs(v));
  const double tol = 1e-13 * amax;

  std::vector<cplx> x = a, term = a, next(n_);
  double prev_norm = 0.0;
  for (const cplx& v : term) prev_norm = std::max(prev_norm, std::abs(v));
  if (prev_norm <= tol) return x;

  for (int it = 0; it < 200; ++it) {
    // term <- (I - P) term, or its transpose
    for (std::size_t i = 0; i < n_; ++i) {
      cplx s = term[i];
      if (transpose) {
        for (std::size_t k = 0; k < n_; ++k) s -= p_[k * n_ + i] * term[k];
      } else {
        for (std::size_t k = 0; k < n_; ++k) s -= p_[i * n_ + k] * term[k];
      }
      next[i] = s;
    }
    term.swap(next);
    double tn = 0.0;
    for (const cplx& v : term) tn = std::max(tn, std::abs(v));
    if (tn > prev_norm * 1.000001)
      throw std::runtime_error(
          "matrix inversion series diverges: w outside the contraction region");
    for (std::size_t i = 0; i < n_; ++i) x[i] += term[i];
    if (tn <= tol) return x;
    prev_norm = tn;
  }
  throw std::runtime_error("matrix inversion series did not converge");
}

std::vector<cplx> neumann_inverse_apply(const JonesBasis& basis,
                                        const LevelComponents& level, cplx w,
                                        const std::vector<cplx>& a, bool transpose) {
  return assemble_solver(basis, level, w).solve(a, transpose);
}

TwoVariableBasis::TwoVariableBasis(FiniteSequence seq, double lambda, double r)
    : basis_(std::move(seq)),
      levels_(BlaschkeProduct(basis_.sequence()), lambda, r) {
  w_radius_ = r / (3.0 * basis_.M());
}

NeumannSolver TwoVariableBasis::solver_at(cplx w) const {
  if (std::abs(w) > w_radius_ * (1.0 + 1e-12))
    throw std::invalid_argument("w outside the admissible radius r/(3M)");
  return assemble_solver(basis_, levels_, w);
}

std::vector<cplx> TwoVariableBasis::matrix_at(cplx w) const {
  return solver_at(w).matrix();
}

std::vector<cplx> TwoVariableBasis::inverse_apply(cplx w, const std::vector<cplx>& a,
                                                  bool transpose) const {
  return solver_at(w).solve(a, transpose);
}

cplx TwoVariableBasis::f_eval(std::size_t j, cplx z, cplx w) const {
  const std::size_t n = basis_.size();
  if (j >= n) throw std::invalid_argument("basis index out of range");
  std::vector<cplx> e(n, cplx(0.0, 0.0));
  e[j] = cplx(1.0, 0.0);
  const std::vector<cplx> u = inverse_apply(w, e, false);
  const std::vector<cplx> g = basis_.eval_all(z);
  cplx s(0.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) s += u[k] * g[k];
  return s;
}

std::vector<cplx> TwoVariableBasis::f_all(cplx z, cplx w) const {
  return inverse_apply(w, basis_.eval_all(z), true);
}

}  // namespace dbar
