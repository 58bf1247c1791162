#pragma once
#include <complex>
#include <cstdint>

namespace dbar {

// splitmix64. Every randomized routine takes an explicit seed so that reports
// and manifests are byte-identical across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // [0,1), 53 bits, identical on every platform
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // point with |z| < rmax, area-uniform
  std::complex<double> disk_point(double rmax) {
    double r = rmax * std::sqrt(uniform());
    double t = uniform(0.0, 6.283185307179586476925286766559);
    return {r * std::cos(t), r * std::sin(t)};
  }

  Rng fork(std::uint64_t tag) { return Rng(next() ^ (tag * 0xd1342543de82ef95ull)); }

 private:
  std::uint64_t state_;
};

}  // namespace dbar
