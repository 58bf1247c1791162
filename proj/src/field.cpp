#include "dbar/field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dbar {

PolarGrid::PolarGrid(std::size_t nr_, std::size_t ntheta_, double s_)
    : nr(nr_), ntheta(ntheta_), s(s_) {
  if (nr == 0 || ntheta == 0) throw std::invalid_argument("polar grid needs nonzero resolution");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("grid radius must lie in (0,1)");
}

double PolarGrid::dtheta() const { return 2.0 * std::numbers::pi / static_cast<double>(ntheta); }

double PolarGrid::angle(std::size_t k) const { return (static_cast<double>(k) + 0.5) * dtheta(); }

cplx PolarGrid::node(std::size_t i, std::size_t k) const {
  return std::polar(radius(i), angle(k));
}

std::optional<std::size_t> PolarGrid::cell_of(cplx w) const {
  double rw = std::abs(w);
  if (rw > s) return std::nullopt;
  auto i = static_cast<std::size_t>(rw / dr());
  if (i >= nr) i = nr - 1;
  double th = std::arg(w);
  if (th < 0.0) th += 2.0 * std::numbers::pi;
  auto k = static_cast<std::size_t>(th / dtheta());
  if (k >= ntheta) k = ntheta - 1;
  return index(i, k);
}

GridField::GridField(PolarGrid grid, int dim) : grid_(grid), dim_(dim) {
  if (dim_ <= 0) throw std::invalid_argument("field dimension must be positive");
  values_.assign(grid_.node_count() * static_cast<std::size_t>(dim_), cplx(0.0, 0.0));
  mask_.assign(grid_.node_count(), 1);
}

void GridField::set_mask(std::size_t node, bool on) {
  mask_[node] = on ? 1 : 0;
  if (!on) {
    for (int c = 0; c < dim_; ++c) values_[node * dim_ + c] = 0.0;
  }
}

void GridField::sample(const Density& f, const std::function<bool(cplx)>& support) {
  if (f.dim != dim_) throw std::invalid_argument("density dimension mismatch");
  for (std::size_t i = 0; i < grid_.nr; ++i) {
    for (std::size_t k = 0; k < grid_.ntheta; ++k) {
      std::size_t node = grid_.index(i, k);
      cplx w = grid_.node(i, k);
      if (support && !support(w)) {
        set_mask(node, false);
        continue;
      }
      mask_[node] = 1;
      f.eval(w, values_.data() + node * dim_);
    }
  }
}

double GridField::point_norm(std::size_t node) const {
  double acc = 0.0;
  for (int c = 0; c < dim_; ++c) acc += std::norm(values_[node * dim_ + c]);
  return std::sqrt(acc);
}

double GridField::sup_norm() const {
  double best = 0.0;
  for (std::size_t node = 0; node < mask_.size(); ++node) {
    if (mask_[node]) best = std::max(best, point_norm(node));
  }
  return best;
}

std::vector<std::size_t> GridField::masked_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t node = 0; node < mask_.size(); ++node) {
    if (mask_[node]) out.push_back(node);
  }
  return out;
}

void GridField::lookup(cplx w, cplx* out, bool bilinear) const {
  for (int c = 0; c < dim_; ++c) out[c] = 0.0;
  double rw = std::abs(w);
  if (rw > grid_.s) return;
  if (!bilinear) {
    auto cell = grid_.cell_of(w);
    if (!cell) return;
    const cplx* v = at(*cell);
    for (int c = 0; c < dim_; ++c) out[c] = v[c];
    return;
  }
  // bilinear in (r, theta) with angular wraparound and radial clamping
  double fr = rw / grid_.dr() - 0.5;
  double ft = std::arg(w);
  if (ft < 0.0) ft += 2.0 * std::numbers::pi;
  ft = ft / grid_.dtheta() - 0.5;

  double i0f = std::floor(fr);
  double k0f = std::floor(ft);
  double ar = fr - i0f;
  double at_ = ft - k0f;
  long i0 = static_cast<long>(i0f);
  long k0 = static_cast<long>(k0f);

  auto clamp_i = [&](long i) -> long {
    if (i < 0) return 0;
    long top = static_cast<long>(grid_.nr) - 1;
    return i > top ? top : i;
  };
  auto wrap_k = [&](long k) -> long {
    long n = static_cast<long>(grid_.ntheta);
    return ((k % n) + n) % n;
  };

  long ia = clamp_i(i0), ib = clamp_i(i0 + 1);
  long ka = wrap_k(k0), kb = wrap_k(k0 + 1);
  double w00 = (1.0 - ar) * (1.0 - at_);
  double w01 = (1.0 - ar) * at_;
  double w10 = ar * (1.0 - at_);
  double w11 = ar * at_;
  const cplx* v00 = at(grid_.index(static_cast<std::size_t>(ia), static_cast<std::size_t>(ka)));
  const cplx* v01 = at(grid_.index(static_cast<std::size_t>(ia), static_cast<std::size_t>(kb)));
  const cplx* v10 = at(grid_.index(static_cast<std::size_t>(ib), static_cast<std::size_t>(ka)));
  const cplx* v11 = at(grid_.index(static_cast<std::size_t>(ib), static_cast<std::size_t>(kb)));
  for (int c = 0; c < dim_; ++c) {
    out[c] = w00 * v00[c] + w01 * v01[c] + w10 * v10[c] + w11 * v11[c];
  }
}

}  // namespace dbar
