#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dbar/io.hpp"

namespace dbar::verify {

// One measured invariant. Every check is normalized to the form
// measured <= bound, so a report line is readable without knowing the
// direction of the underlying inequality; `reference` states the identity or
// bound in words.
struct Check {
  std::string id;
  std::string reference;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct Report {
  std::vector<Check> checks;
  std::uint64_t seed = 0;
  int dim = 1;
  std::size_t fields = 0, pairs = 0, samples = 0;

  bool all_pass() const;
  std::size_t failures() const;
  // machine-readable JSON; byte-identical across runs with the same config
  std::string text() const;
  void add(const std::string& id, const std::string& reference, double measured,
           double bound);
};

// Per-module invariant suites. Sizes come from the config; every random draw
// derives from cfg.seed through per-suite forks, and all reductions run in a
// fixed order, so the assembled report is deterministic.
void geometry_suite(const io::RunConfig& cfg, Report& out);
void sequence_suite(const io::RunConfig& cfg, Report& out);
void blaschke_suite(const io::RunConfig& cfg, Report& out);
void cauchy_suite(const io::RunConfig& cfg, Report& out);
void interp_suite(const io::RunConfig& cfg, Report& out);
void pipeline_suite(const io::RunConfig& cfg, Report& out);

// All suites in fixed order. cfg.sabotage negates the quadrature kernel and
// must trip the sign-anchored Cauchy checks (mutation canary).
Report run_all(const io::RunConfig& cfg);

}  // namespace dbar::verify
