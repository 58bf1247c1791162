// Benchmark: OpenMP-parallel batch Cauchy solves against the serial
// reference, reporting wall times, speedup, and the max absolute difference
// (which must be exactly zero: per-target accumulation order is fixed).
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "dbar/cauchy.hpp"
#include "dbar/field.hpp"
#include "dbar/par.hpp"
#include "dbar/rng.hpp"

using dbar::cplx;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 256;
  std::size_t targets = 512;
  int dim = 1;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    auto next = [&](const char* flag) -> std::string {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value for %s\n", flag);
        std::exit(2);
      }
      return argv[++i];
    };
    if (a == "--grid") {
      n = static_cast<std::size_t>(std::stoul(next("--grid")));
    } else if (a == "--targets") {
      targets = static_cast<std::size_t>(std::stoul(next("--targets")));
    } else if (a == "--dim") {
      dim = std::stoi(next("--dim"));
    } else if (a == "--help" || a == "-h") {
      std::printf("usage: dbar_bench [--grid N] [--targets T] [--dim D]\n");
      return 0;
    } else {
      std::fprintf(stderr, "unknown flag %s\n", a.c_str());
      return 2;
    }
  }

  const double s = 0.5;
  dbar::PolarGrid grid(n, n, s);
  dbar::GridField h(grid, dim);
  dbar::Rng rng(0xbe7c11);
  dbar::Density f{dim, [&](cplx w, cplx* out) {
                    for (int c = 0; c < dim; ++c) {
                      out[c] = cplx(std::cos(3.0 * w.real() + c), std::sin(2.0 * w.imag()));
                    }
                  }};
  h.sample(f);

  std::vector<cplx> zs;
  zs.reserve(targets);
  for (std::size_t t = 0; t < targets; ++t) zs.push_back(rng.disk_point(0.95));

  std::printf("grid %zux%zu, %zu targets, dim %d, threads %d\n", n, n, targets, dim,
              dbar::max_threads());

  const double t0 = now_seconds();
  auto serial = dbar::cauchy_solve_field_serial(h, zs);
  const double t1 = now_seconds();
  auto parallel = dbar::cauchy_solve_field(h, zs);
  const double t2 = now_seconds();

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(serial[i] - parallel[i]));
  }

  const double ts = t1 - t0;
  const double tp = t2 - t1;
  std::printf("serial   %8.3f s\n", ts);
  std::printf("parallel %8.3f s  (speedup %.2fx)\n", tp, tp > 0.0 ? ts / tp : 0.0);
  std::printf("max |serial - parallel| = %.3g\n", max_diff);
  if (max_diff != 0.0) {
    std::fprintf(stderr, "determinism violation: parallel result differs from serial\n");
    return 1;
  }
  return 0;
}
