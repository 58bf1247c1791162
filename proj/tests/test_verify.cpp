#include <algorithm>
#include <string>

#include "dbar/io.hpp"
#include "dbar/verify.hpp"
#include "doctest.h"

using namespace dbar;

namespace {

io::RunConfig quick_config() {
  io::RunConfig cfg;
  cfg.verify_fields = 2;
  cfg.verify_pairs = 12;
  cfg.verify_samples = 80;
  return cfg;
}

bool has_failure(const verify::Report& r, const std::string& id) {
  for (const auto& c : r.checks)
    if (c.id == id && !c.pass) return true;
  return false;
}

}  // namespace

TEST_CASE("check normalization: pass is measured <= bound") {
  verify::Report r;
  r.add("a", "forward", 1.0, 2.0);
  r.add("b", "boundary", 2.0, 2.0);
  r.add("c", "violator", 2.0 + 1e-15, 2.0);
  CHECK(r.checks[0].pass);
  CHECK(r.checks[1].pass);
  CHECK(!r.checks[2].pass);
  CHECK(!r.all_pass());
  CHECK(r.failures() == 1);
}

TEST_CASE("suite reports are deterministic for a fixed config") {
  const io::RunConfig cfg = quick_config();
  verify::Report a, b;
  verify::geometry_suite(cfg, a);
  verify::sequence_suite(cfg, a);
  verify::geometry_suite(cfg, b);
  verify::sequence_suite(cfg, b);
  REQUIRE(a.checks.size() == b.checks.size());
  CHECK(a.text() == b.text());

  // a different seed changes measurements but not the check list
  io::RunConfig other = cfg;
  other.seed += 1;
  verify::Report c;
  verify::geometry_suite(other, c);
  verify::sequence_suite(other, c);
  REQUIRE(c.checks.size() == a.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    CHECK(c.checks[i].id == a.checks[i].id);
    CHECK(c.checks[i].pass);
  }
}

TEST_CASE("clean quadrature passes the transform suite") {
  verify::Report r;
  verify::cauchy_suite(quick_config(), r);
  for (const auto& c : r.checks) CHECK_MESSAGE(c.pass, c.id, " measured ", c.measured);
}

TEST_CASE("sabotaged quadrature trips the sign-sensitive checks") {
  io::RunConfig cfg = quick_config();
  cfg.sabotage = true;
  verify::Report r;
  verify::cauchy_suite(cfg, r);
  CHECK(!r.all_pass());
  CHECK(has_failure(r, "cauchy.indicator-oracle"));
  CHECK(has_failure(r, "cauchy.dbar-identity"));
  // the modulus bounds are phase-blind by design and must keep passing
  CHECK(!has_failure(r, "cauchy.e-sup-bound"));
  CHECK(!has_failure(r, "cauchy.e-continuity"));
}

TEST_CASE("report text is valid deterministic JSON with environment metadata") {
  verify::Report r;
  r.seed = 7;
  r.dim = 1;
  r.add("x.y", "sample check", 0.5, 1.0);
  const std::string t = r.text();
  CHECK(t.find("dbar-verification-report") != std::string::npos);
  CHECK(t.find("\"compiler\"") != std::string::npos);
  CHECK(t.find("\"x.y\"") != std::string::npos);
  CHECK(t == r.text());
}
