#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "qmetric/generators.hpp"
#include "qmetric/graph.hpp"

using Catch::Approx;
using namespace qmetric;

TEST_CASE("graph: construction validates its input") {
  REQUIRE_THROWS_AS(WeightedGraph::build({}, {}), invalid_space);
  REQUIRE_THROWS_AS(WeightedGraph::build({"a", "a"}, {}), invalid_space);
  REQUIRE_THROWS_AS(WeightedGraph::build({"a", "b"}, {{"a", "a", 1.0}}),
                    invalid_space);
  REQUIRE_THROWS_AS(WeightedGraph::build({"a", "b"}, {{"a", "b", 0.0}}),
                    invalid_space);
  REQUIRE_THROWS_AS(WeightedGraph::build({"a", "b"}, {{"a", "b", -2.0}}),
                    invalid_space);
  REQUIRE_THROWS_AS(
      WeightedGraph::build({"a", "b"},
                           {{"a", "b", std::numeric_limits<double>::infinity()}}),
      invalid_space);
  REQUIRE_THROWS_AS(WeightedGraph::build({"a", "b"}, {{"a", "c", 1.0}}),
                    invalid_input);
  REQUIRE_THROWS_AS(
      WeightedGraph::build({"a", "b"}, {{"a", "b", 1.0}}, {{"ends", {"z"}}}),
      invalid_input);
  REQUIRE_THROWS_AS(
      WeightedGraph::build({"a", "b"}, {{"a", "b", 1.0}}, {}, "nope"),
      invalid_input);

  auto g = WeightedGraph::build({"a", "b"}, {{"a", "b", 1.0}}, {{"ends", {"b"}}}, "a");
  REQUIRE(g.base() == 0);
  REQUIRE(g.boundary("ends") == std::vector<std::size_t>{1});
  REQUIRE_THROWS_AS(g.boundary("missing"), invalid_input);
  REQUIRE_THROWS_AS(g.index_of("zz"), invalid_input);
}

TEST_CASE("graph: path distances, symmetry, connectivity") {
  // p0 -1- p1 -2.5- p2 -1- p3
  auto g = WeightedGraph::build(
      {"p0", "p1", "p2", "p3"},
      {{"p0", "p1", 1.0}, {"p1", "p2", 2.5}, {"p2", "p3", 1.0}});
  REQUIRE(g.connected());
  REQUIRE(g.distance(0, 3) == 4.5);
  REQUIRE(g.distance(3, 0) == 4.5);
  REQUIRE(g.distance(1, 2) == 2.5);
  REQUIRE(g.distance(2, 2) == 0.0);

  auto h = WeightedGraph::from_indices({"a", "b", "c", "d"},
                                       {{0, 1, 1.0}, {2, 3, 1.0}});
  REQUIRE_FALSE(h.connected());
  REQUIRE(h.distance(0, 2) == std::numeric_limits<double>::infinity());
  REQUIRE_THROWS_AS(space_from_graph(h), invalid_input);
}

TEST_CASE("graph: space_from_graph on a unit path is integer spacing") {
  auto g = gen::grid(2);  // 4-cycle of unit edges as a small sanity case
  auto ms = space_from_graph(g);
  REQUIRE(ms.space.size() == 4);
  REQUIRE(ms.mass == std::vector<double>(4, 1.0));
  // opposite corners of the 2x2 grid are two steps apart
  REQUIRE(ms.space.at(ms.space.index_of("g0_0"), ms.space.index_of("g1_1")) == 2.0);

  std::vector<std::tuple<std::string, std::string, double>> es;
  for (int i = 0; i + 1 < 6; ++i)
    es.emplace_back("v" + std::to_string(i), "v" + std::to_string(i + 1), 1.0);
  auto path = WeightedGraph::build({"v0", "v1", "v2", "v3", "v4", "v5"}, es);
  auto ps = space_from_graph(path);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      REQUIRE(ps.space.at(i, j) == static_cast<double>(i > j ? i - j : j - i));
}

TEST_CASE("generators: deterministic per seed, distinct across seeds") {
  auto a = gen::euclidean_sample(16, 2, 42);
  auto b = gen::euclidean_sample(16, 2, 42);
  REQUIRE(a.space.table() == b.space.table());
  REQUIRE(a.mass == b.mass);
  auto c = gen::euclidean_sample(16, 2, 43);
  REQUIRE(a.space.table() != c.space.table());
  REQUIRE_THROWS_AS(gen::euclidean_sample(1, 2, 42), invalid_input);
  REQUIRE_THROWS_AS(gen::euclidean_sample(8, 0, 42), invalid_input);
}

TEST_CASE("generators: snowflake agrees with euclidean at alpha = 1") {
  auto e = gen::euclidean_sample(24, 2, 7);
  auto s = gen::snowflake(24, 1.0, 7, 2);
  REQUIRE(e.space.table() == s.space.table());

  auto h = gen::snowflake(24, 0.5, 7, 2);
  for (std::size_t i = 0; i < 24; ++i)
    for (std::size_t j = 0; j < 24; ++j) {
      if (i == j) continue;
      REQUIRE(h.space.at(i, j) ==
              Approx(std::sqrt(e.space.at(i, j))).epsilon(1e-14));
    }

  REQUIRE_THROWS_AS(gen::snowflake(8, 0.0, 1), invalid_input);
  REQUIRE_THROWS_AS(gen::snowflake(8, 1.5, 1), invalid_input);
  REQUIRE_THROWS_AS(gen::snowflake(8, -0.3, 1), invalid_input);
}

TEST_CASE("generators: nonisotropic sum is a strict quasimetric") {
  auto ms = gen::nonisotropic(3, {1.0, 0.5}, 7);
  double k = quasimetric_constant(ms.space);
  REQUIRE(k > 1.0);
  REQUIRE(std::isfinite(k));

  // symmetric by construction
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      REQUIRE(ms.space.at(i, j) == ms.space.at(j, i));

  REQUIRE_THROWS_AS(gen::nonisotropic(8, {}, 1), invalid_input);
  REQUIRE_THROWS_AS(gen::nonisotropic(8, {1.0, 0.0}, 1), invalid_input);
  REQUIRE_THROWS_AS(gen::nonisotropic(8, {1.0, -1.0}, 1), invalid_input);
}

TEST_CASE("generators: geometric_set matches the hand-built ladder") {
  auto lib = gen::geometric_set(10);
  auto ref = oracle::geometric_set(10);
  REQUIRE(lib.space.ids() == ref.space.ids());
  REQUIRE(lib.space.table() == ref.space.table());
  REQUIRE(lib.mass == ref.mass);
}

TEST_CASE("generators: trees expose their leaves") {
  auto t = gen::tree(3, 2);
  REQUIRE(t.size() == 15);
  REQUIRE(t.edges().size() == 14);
  REQUIRE(t.base() == 0);
  const auto& leaves = t.boundary("leaves");
  REQUIRE(leaves.size() == 8);
  for (std::size_t leaf : leaves) REQUIRE(t.distance(t.base(), leaf) == 3.0);
  REQUIRE(t.connected());

  auto star = gen::tree(1, 3);
  REQUIRE(star.size() == 4);
  REQUIRE(star.boundary("leaves").size() == 3);
  REQUIRE(star.distance(1, 2) == 2.0);

  REQUIRE_THROWS_AS(gen::tree(3, 0), invalid_input);
}

TEST_CASE("generators: cycle and grid distances") {
  auto c = gen::cycle(12);
  REQUIRE(c.size() == 12);
  REQUIRE(c.edges().size() == 12);
  REQUIRE(c.distance(0, 6) == 6.0);
  REQUIRE(c.distance(0, 11) == 1.0);
  REQUIRE(c.distance(0, 4) == 4.0);
  REQUIRE_THROWS_AS(gen::cycle(2), invalid_input);

  auto g = gen::grid(3);
  REQUIRE(g.size() == 9);
  REQUIRE(g.edges().size() == 12);
  REQUIRE(g.distance(g.index_of("g0_0"), g.index_of("g2_2")) == 4.0);
  REQUIRE(g.distance(g.index_of("g0_0"), g.index_of("g0_2")) == 2.0);
  REQUIRE_THROWS_AS(gen::grid(1), invalid_input);
}

TEST_CASE("generators: hyperbolic patch is a deterministic metric sample") {
  auto a = gen::hyperbolic_patch(20, 5);
  auto b = gen::hyperbolic_patch(20, 5);
  REQUIRE(a.space.table() == b.space.table());
  REQUIRE(quasimetric_constant(a.space) <= 2.0 + 1e-12);
  REQUIRE(a.space.diameter() > 0.0);
}

TEST_CASE("generators: random quasimetric hits the requested constant") {
  for (double kt : {1.3, 2.0, 2.9}) {
    auto ms = gen::random_quasimetric(32, kt, 11);
    REQUIRE(quasimetric_constant(ms.space) == Approx(kt).epsilon(1e-9));
  }
  double total = 0.0;
  for (double m : gen::random_quasimetric(32, 2.0, 11).mass) total += m;
  REQUIRE(total == Approx(1.0).epsilon(1e-12));
  REQUIRE_THROWS_AS(gen::random_quasimetric(32, 0.5, 1), invalid_input);
}
