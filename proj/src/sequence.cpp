#include "dbar/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dbar/rng.hpp"

namespace dbar {
namespace {

// log pseudo-distance matrix; entry (i,i) is 0
std::vector<double> log_rho_matrix(const std::vector<DiskPoint>& pts) {
  std::size_t n = pts.size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double lr = std::log(pseudo_distance(pts[i], pts[j]));
      m[i * n + j] = lr;
      m[j * n + i] = lr;
    }
  }
  return m;
}

double subset_characteristic(const std::vector<double>& lrho, std::size_t n,
                             const std::vector<std::size_t>& idx) {
  if (idx.size() <= 1) return 1.0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k : idx) {
    double s = 0.0;
    for (std::size_t j : idx) s += lrho[k * n + j];
    worst = std::min(worst, s);
  }
  return std::exp(worst);
}

}  // namespace

FiniteSequence::FiniteSequence(std::vector<DiskPoint> pts) : pts_(std::move(pts)) {
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    for (std::size_t j = i + 1; j < pts_.size(); ++j) {
      if (pts_[i] == pts_[j]) {
        throw std::invalid_argument("sequence points must be pairwise distinct (index " +
                                    std::to_string(i) + " repeats at " + std::to_string(j) + ")");
      }
    }
  }
}

std::vector<cplx> FiniteSequence::values() const {
  std::vector<cplx> v;
  v.reserve(pts_.size());
  for (const auto& p : pts_) v.push_back(p.value());
  return v;
}

double FiniteSequence::characteristic() const {
  if (delta_) return *delta_;
  if (pts_.empty()) throw std::logic_error("characteristic of empty sequence");
  double worst = 0.0;  // log scale; singleton keeps 0 -> delta = 1
  std::size_t n = pts_.size();
  if (n > 1) {
    auto lrho = log_rho_matrix(pts_);
    worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lrho[k * n + j];
      worst = std::min(worst, s);
    }
  }
  delta_ = std::exp(worst);
  return *delta_;
}

FiniteSequence FiniteSequence::subset(const std::vector<std::size_t>& idx) const {
  std::vector<DiskPoint> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pts_.at(i));
  return FiniteSequence(std::move(out));
}

InterpolationBound interpolation_constant_bound(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("characteristic must lie in (0,1]");
  }
  constexpr double e = std::numbers::e;
  InterpolationBound b{};
  b.jones = (2.0 * e / delta) * std::log(e / (delta * delta));
  double s = std::sqrt(std::max(0.0, 1.0 - delta * delta));
  b.earl = ((1.0 + s) / delta) * ((1.0 + s) / delta);
  b.value = std::min(b.jones, b.earl);
  b.lower = 1.0 / delta;
  return b;
}

FiniteSequence greedy_chain(const std::vector<DiskPoint>& candidates, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("chain eps must lie in (0,1)");
  std::vector<DiskPoint> kept;
  for (const auto& c : candidates) {
    bool ok = true;
    for (const auto& k : kept) {
      if (pseudo_distance(c, k) < eps) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c);
  }
  return FiniteSequence(std::move(kept));
}

ChainCountBounds chain_count_bounds(double R, double L) {
  if (!(R > 0.0 && R < 1.0 && L > 0.0 && L < 1.0)) {
    throw std::invalid_argument("chain bounds need R, L in (0,1)");
  }
  double den = (1.0 - R * R) * L * L;
  return {R * R * (1.0 - L * L) / den, (2.0 * R + L) * (2.0 * R + L) / den};
}

ChainPartition refine_partition(const FiniteSequence& zeta, const FiniteSequence& zeta_nu,
                                double eps) {
  std::size_t na = zeta.size(), np = zeta_nu.size();
  if (na == 0 || np == 0) throw std::invalid_argument("refine_partition on empty sequence");

  std::vector<std::vector<int>> cell_colors(na);  // colours already present per cell
  std::vector<int> cell_count(na, 0);
  std::vector<int> labels(np, -1);
  int ncolors = 0;

  for (std::size_t p = 0; p < np; ++p) {
    std::vector<std::size_t> cells;
    for (std::size_t a = 0; a < na; ++a) {
      if (pseudo_distance(zeta_nu[p], zeta[a]) < eps) cells.push_back(a);
    }
    if (cells.empty()) {
      throw std::runtime_error("refinement point lies in no cell of the coarse chain");
    }
    std::vector<char> used(static_cast<std::size_t>(ncolors) + 1, 0);
    for (std::size_t a : cells) {
      for (int c : cell_colors[a]) used[static_cast<std::size_t>(c)] = 1;
    }
    int colour = 0;
    while (used[static_cast<std::size_t>(colour)]) ++colour;
    labels[p] = colour;
    ncolors = std::max(ncolors, colour + 1);
    for (std::size_t a : cells) {
      cell_colors[a].push_back(colour);
      ++cell_count[a];
    }
  }

  ChainPartition out;
  out.labels = labels;
  out.max_multiplicity = *std::max_element(cell_count.begin(), cell_count.end());
  out.parts.reserve(static_cast<std::size_t>(ncolors));
  for (int c = 0; c < ncolors; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t p = 0; p < np; ++p) {
      if (labels[p] == c) idx.push_back(p);
    }
    out.parts.push_back(zeta_nu.subset(idx));
  }

  // capacity of one cell: sep-separated points inside D(z, eps)
  if (np > 1) {
    double sep = 1.0;
    for (std::size_t i = 0; i < np; ++i) {
      for (std::size_t j = i + 1; j < np; ++j) {
        sep = std::min(sep, pseudo_distance(zeta_nu[i], zeta_nu[j]));
      }
    }
    double cap = chain_count_bounds(eps, sep).upper;
    if (out.max_multiplicity > cap + 1e-9) {
      throw std::runtime_error("cell multiplicity exceeds the packing capacity bound");
    }
    if (static_cast<double>(out.parts.size()) > cap + 1e-9) {
      throw std::runtime_error("partition needs more parts than the packing capacity bound");
    }
  }
  return out;
}

namespace {

struct BipartitionScore {
  double objective = -1.0;
  std::uint64_t mask = ~0ull;
};

// A = {0} + set bits of mask (bit i-1 <-> point i); evaluated on the log matrix
double bipartition_objective(const std::vector<double>& lrho, std::size_t n,
                             std::uint64_t mask) {
  double worstA = std::numeric_limits<double>::infinity();
  double worstB = std::numeric_limits<double>::infinity();
  std::size_t cntA = 0, cntB = 0;
  for (std::size_t k = 0; k < n; ++k) {
    bool inA = (k == 0) || ((mask >> (k - 1)) & 1ull);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      bool jA = (j == 0) || ((mask >> (j - 1)) & 1ull);
      if (jA == inA) s += lrho[k * n + j];
    }
    if (inA) {
      worstA = std::min(worstA, s);
      ++cntA;
    } else {
      worstB = std::min(worstB, s);
      ++cntB;
    }
  }
  double dA = (cntA <= 1) ? 1.0 : std::exp(worstA);
  double dB = (cntB <= 1) ? 1.0 : std::exp(worstB);
  return std::min(dA, dB);
}

SplitResult make_split(const FiniteSequence& seq, std::uint64_t mask, double objective,
                       bool exhaustive) {
  std::size_t n = seq.size();
  std::vector<std::size_t> ia, ib;
  std::vector<int> labels(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    bool inA = (k == 0) || ((mask >> (k - 1)) & 1ull);
    labels[k] = inA ? 0 : 1;
    (inA ? ia : ib).push_back(k);
  }
  return {seq.subset(ia), seq.subset(ib), labels, objective, exhaustive};
}

}  // namespace

SplitResult split_sqrt_delta(const FiniteSequence& seq) {
  std::size_t n = seq.size();
  if (n < 2) throw std::invalid_argument("splitting needs at least two points");
  auto lrho = log_rho_matrix(seq.points());
  double target = std::sqrt(seq.characteristic());

  SplitResult result;
  if (n <= 18) {
    const std::uint64_t full = (1ull << (n - 1)) - 1ull;  // mask == full puts all in A
    BipartitionScore best;
#pragma omp parallel
    {
      BipartitionScore local;
#pragma omp for schedule(static) nowait
      for (std::int64_t m = 0; m < static_cast<std::int64_t>(full); ++m) {
        double obj = bipartition_objective(lrho, n, static_cast<std::uint64_t>(m));
        if (obj > local.objective ||
            (obj == local.objective && static_cast<std::uint64_t>(m) < local.mask)) {
          local.objective = obj;
          local.mask = static_cast<std::uint64_t>(m);
        }
      }
#pragma omp critical
      {
        if (local.objective > best.objective ||
            (local.objective == best.objective && local.mask < best.mask)) {
          best = local;
        }
      }
    }
    result = make_split(seq, best.mask, best.objective, true);
  } else {
    // local search with deterministic restarts
    BipartitionScore best;
    Rng rng(0x5eedULL + n);
    for (int restart = 0; restart < 8; ++restart) {
      std::vector<std::size_t> order(n - 1);
      for (std::size_t i = 0; i < n - 1; ++i) order[i] = i;
      for (std::size_t i = n - 2; i > 0; --i) {
        std::swap(order[i], order[rng.next() % (i + 1)]);
      }
      std::uint64_t mask = 0;
      for (std::size_t bi : order) {
        std::uint64_t with = mask | (1ull << bi);
        double a = bipartition_objective(lrho, n, with);
        double b = bipartition_objective(lrho, n, mask);
        if (a > b) mask = with;
      }
      bool improved = true;
      double obj = bipartition_objective(lrho, n, mask);
      int guard = 0;
      while (improved && ++guard < 200) {
        improved = false;
        for (std::size_t bi = 0; bi < n - 1; ++bi) {
          std::uint64_t flipped = mask ^ (1ull << bi);
          if (flipped == (1ull << (n - 1)) - 1ull) continue;  // would empty B
          double o = bipartition_objective(lrho, n, flipped);
          if (o > obj) {
            obj = o;
            mask = flipped;
            improved = true;
          }
        }
      }
      if (obj > best.objective || (obj == best.objective && mask < best.mask)) {
        best = {obj, mask};
      }
    }
    result = make_split(seq, best.mask, best.objective, false);
  }

  if (result.min_characteristic < target * (1.0 - 1e-12)) {
    throw std::runtime_error("no bipartition certifying sqrt(delta) was found (best " +
                             std::to_string(result.min_characteristic) + " vs required " +
                             std::to_string(target) + ")");
  }
  return result;
}

double split_threshold(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  double es = std::max(0.5, eps);
  double t = 1.0 - std::sqrt(es);
  return 1.0 - t * t / 8.0;
}

int split_depth(double delta, double eps) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
  double thr = split_threshold(eps);
  if (delta > thr) return 0;
  double ratio = std::log(delta) / std::log(thr);  // >= 1 here
  int l = 0;
  double p = 1.0;
  while (p < ratio) {
    p *= 2.0;
    ++l;
  }
  return l;
}

namespace {

void split_rec(const FiniteSequence& seq, double thr, int depth, int max_depth,
               std::vector<FiniteSequence>& leaves, int& deepest) {
  deepest = std::max(deepest, depth);
  if (seq.size() <= 1 || seq.characteristic() >= thr) {
    leaves.push_back(seq);
    return;
  }
  if (depth >= max_depth) {
    throw std::runtime_error("characteristic splitting exceeded its depth budget");
  }
  SplitResult s = split_sqrt_delta(seq);
  split_rec(s.first, thr, depth + 1, max_depth, leaves, deepest);
  split_rec(s.second, thr, depth + 1, max_depth, leaves, deepest);
}

}  // namespace

std::vector<FiniteSequence> split_to_threshold(const FiniteSequence& seq, double eps,
                                               int* depth_used) {
  double thr = split_threshold(eps);
  int l = split_depth(seq.characteristic(), eps);
  std::vector<FiniteSequence> leaves;
  int deepest = 0;
  split_rec(seq, thr, 0, std::max(l, 1) + 2, leaves, deepest);
  if (depth_used) *depth_used = deepest;
  if (leaves.size() > (1ull << l) && l > 0) {
    throw std::runtime_error("splitting produced more leaves than 2^depth");
  }
  return leaves;
}

}  // namespace dbar
