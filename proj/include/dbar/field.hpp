#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dbar/geometry.hpp"

namespace dbar {

// Midpoint polar grid on the disk of radius s: r_i = (i+1/2)s/nr,
// theta_k = (k+1/2)2pi/ntheta, radial-major node order.
struct PolarGrid {
  PolarGrid(std::size_t nr_, std::size_t ntheta_, double s_);

  std::size_t nr = 0;
  std::size_t ntheta = 0;
  double s = 0.0;

  std::size_t node_count() const { return nr * ntheta; }
  double dr() const { return s / static_cast<double>(nr); }
  double dtheta() const;
  double radius(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dr(); }
  double angle(std::size_t k) const;
  cplx node(std::size_t i, std::size_t k) const;
  std::size_t index(std::size_t i, std::size_t k) const { return i * ntheta + k; }
  // area of the cell around node (i, *): r_i * dr * dtheta
  double cell_area(std::size_t i) const { return radius(i) * dr() * dtheta(); }

  // index of the cell containing w, or nullopt when |w| > s
  std::optional<std::size_t> cell_of(cplx w) const;
};

// Closed-form density f : D -> C^d; eval writes dim components.
struct Density {
  int dim = 1;
  std::function<void(cplx, cplx*)> eval;
};

// Sampled function on a polar grid with values in C^d (Euclidean norm per
// node). Nodes with mask = 0 carry the value 0.
class GridField {
 public:
  GridField(PolarGrid grid, int dim);

  const PolarGrid& grid() const { return grid_; }
  int dim() const { return dim_; }

  const cplx* at(std::size_t node) const { return values_.data() + node * dim_; }
  cplx* at(std::size_t node) { return values_.data() + node * dim_; }
  bool masked(std::size_t node) const { return mask_[node] != 0; }
  void set_mask(std::size_t node, bool on);

  // sample the density at every node; support(w) = false zeroes the node and
  // clears its mask (default: everything inside the grid is support)
  void sample(const Density& f, const std::function<bool(cplx)>& support = nullptr);

  // Euclidean norm of the value vector at one node
  double point_norm(std::size_t node) const;
  // sup over masked nodes of point_norm; 0 for an all-clear mask
  double sup_norm() const;
  std::vector<std::size_t> masked_nodes() const;

  // value at an arbitrary point: nearest-node by default, bilinear in
  // (r, theta) when requested; zero outside the grid radius
  void lookup(cplx w, cplx* out, bool bilinear = false) const;

  std::vector<cplx>& raw_values() { return values_; }
  const std::vector<cplx>& raw_values() const { return values_; }
  const std::vector<std::uint8_t>& raw_mask() const { return mask_; }
  std::vector<std::uint8_t>& raw_mask() { return mask_; }

 private:
  PolarGrid grid_;
  int dim_;
  std::vector<cplx> values_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace dbar
