#include <catch2/catch_amalgamated.hpp>

#include "qmetric/suites.hpp"

using namespace qmetric;

TEST_CASE("suite: unknown name rejected, known names enumerate") {
  REQUIRE_THROWS_AS(suites::run_suite("frobnicate", 1), invalid_input);
  REQUIRE(suites::suite_names().size() == 4);
}

TEST_CASE("suite: duality bundle passes and reruns byte-identically") {
  auto rep = suites::run_suite("duality", 7);
  REQUIRE(rep.all_passed());
  REQUIRE(rep.checks.size() == 2);
  REQUIRE_FALSE(rep.structures.empty());
  REQUIRE(rep.deformations.size() == 2);

  auto again = suites::run_suite("duality", 7);
  REQUIRE(report_json(rep).dump(2) == report_json(again).dump(2));

  // a different seed still passes but samples different spaces
  auto other = suites::run_suite("duality", 8);
  REQUIRE(other.all_passed());
  REQUIRE(report_json(other).dump(2) != report_json(rep).dump(2));
}

TEST_CASE("suite: modulus bundle passes") {
  auto rep = suites::run_suite("modulus", 7);
  REQUIRE(rep.all_passed());
  for (const auto& c : rep.checks) {
    INFO(c.name << " observed " << c.observed << " bound " << c.bound);
    REQUIRE(c.passed);
  }
}

TEST_CASE("suite: experiment check names carry criterion prefixes") {
  auto cs = suites::constant_bounds(3);
  REQUIRE(cs.size() == 2);
  for (const auto& c : cs) {
    REQUIRE(c.name.rfind("c1_", 0) == 0);
    REQUIRE(c.passed);
  }
  auto ds = suites::decay_certificates(3);
  REQUIRE(ds.size() == 8);
  for (const auto& c : ds) {
    INFO(c.name << " observed " << c.observed << " bound " << c.bound);
    REQUIRE(c.passed);
  }
}
