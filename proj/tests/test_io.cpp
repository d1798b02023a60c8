#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "qmetric/io.hpp"
#include "qmetric/transforms.hpp"

using Catch::Approx;
using namespace qmetric;

TEST_CASE("space json round-trips bit-exactly") {
  auto ms = gen::random_quasimetric(12, 1.7, 99);
  auto j = space_json(ms);
  auto back = space_from_json(j);
  REQUIRE(back.space.ids() == ms.space.ids());
  REQUIRE(back.space.table() == ms.space.table());
  REQUIRE(back.mass == ms.mass);

  // through a file, including the infinity tag of a sphericalized space
  auto sph = sphericalize(ms, 0);
  const char* path = "io_roundtrip_space.json";
  write_space(path, sph);
  auto read = read_space(path);
  std::remove(path);
  REQUIRE(read.space.table() == sph.space.table());
  REQUIRE(read.space.infinity_index() == sph.space.infinity_index());
  REQUIRE(read.mass == sph.mass);

  // masses are optional on input: uniform by default
  j.erase("mass");
  auto uniform = space_from_json(j);
  REQUIRE(uniform.mass[0] == Approx(1.0 / 12.0));
}

TEST_CASE("space json validation") {
  ordered_json j;
  j["points"] = {"a", "b"};
  REQUIRE_THROWS_AS(space_from_json(j), invalid_input);
  j["dist"] = {{0.0, 1.0}};
  REQUIRE_THROWS_AS(space_from_json(j), invalid_input);
  j["dist"] = {{0.0, 1.0}, {1.0}};
  REQUIRE_THROWS_AS(space_from_json(j), invalid_input);
  j["dist"] = {{0.0, 1.0}, {2.0, 0.0}};  // asymmetric
  REQUIRE_THROWS_AS(space_from_json(j), invalid_space);
}

TEST_CASE("graph json round-trips") {
  auto g = gen::tree(3, 2);
  auto j = graph_json(g);
  auto back = graph_from_json(j);
  REQUIRE(back.ids() == g.ids());
  REQUIRE(back.base() == g.base());
  REQUIRE(back.boundary("leaves") == g.boundary("leaves"));
  REQUIRE(back.edges().size() == g.edges().size());
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    REQUIRE(back.edges()[e].u == g.edges()[e].u);
    REQUIRE(back.edges()[e].v == g.edges()[e].v);
    REQUIRE(back.edges()[e].length == g.edges()[e].length);
  }
  for (std::size_t v = 0; v < g.size(); ++v)
    REQUIRE(back.distance(0, v) == g.distance(0, v));

  const char* path = "io_roundtrip_graph.json";
  write_graph(path, g);
  auto read = read_graph(path);
  std::remove(path);
  REQUIRE(read.ids() == g.ids());

  ordered_json bad;
  bad["vertices"] = {"a", "b"};
  REQUIRE_THROWS_AS(graph_from_json(bad), invalid_input);
  bad["edges"] = {{"a", "b"}};  // missing length
  REQUIRE_THROWS_AS(graph_from_json(bad), invalid_input);
}

TEST_CASE("generator dispatch covers every kind") {
  GeneratorSpec spec;
  spec.kind = "euclidean_sample";
  spec.n = 8;
  auto e = generate(spec, 5);
  REQUIRE(e.space.has_value());
  REQUIRE_FALSE(e.graph.has_value());
  REQUIRE(e.space->size() == 8);

  // snowflake alpha = 1 is the euclidean table itself
  spec.kind = "snowflake";
  spec.alpha = 1.0;
  auto s1 = generate(spec, 5);
  REQUIRE(s1.space->space.table() == e.space->space.table());

  spec.kind = "nonisotropic";
  spec.n = 6;
  spec.alphas = {1.0, 0.5};
  auto ni = generate(spec, 5);
  REQUIRE(quasimetric_constant(ni.space->space) > 1.0);

  spec.kind = "tree";
  spec.depth = 3;
  spec.branching = 2;
  auto t = generate(spec, 5);
  REQUIRE(t.graph.has_value());
  REQUIRE(t.graph->boundary("leaves").size() == 8);

  spec.kind = "cycle";
  spec.n = 6;
  REQUIRE(generate(spec, 5).graph->size() == 6);
  spec.kind = "grid";
  spec.n = 3;
  REQUIRE(generate(spec, 5).graph->size() == 9);
  spec.kind = "geometric_set";
  spec.depth = 5;
  REQUIRE(generate(spec, 5).space->size() == 7);
  spec.kind = "hyperbolic_patch";
  spec.n = 10;
  REQUIRE(generate(spec, 5).space->size() == 10);

  spec.kind = "moebius_strip";
  REQUIRE_THROWS_AS(generate(spec, 5), invalid_input);
}

TEST_CASE("report json is deterministic and carries pass state") {
  Report rep;
  rep.command = "demo";
  rep.seed = 42;
  rep.input_hashes.emplace_back("space", fnv1a_hex("payload"));
  rep.checks.push_back({"alpha", true, 0.5, 1.0, "below bound"});
  rep.checks.push_back({"beta", true, 0.99, 1.0, ""});
  REQUIRE(rep.all_passed());
  auto once = report_json(rep).dump(2);
  auto twice = report_json(rep).dump(2);
  REQUIRE(once == twice);
  REQUIRE(once.find("\"version\": \"0.1.0\"") != std::string::npos);

  rep.checks.push_back({"gamma", false, 2.0, 1.0, ""});
  REQUIRE_FALSE(rep.all_passed());
  REQUIRE(report_json(rep)["all_passed"] == false);

  // FNV-1a 64-bit offset basis for the empty string
  REQUIRE(fnv1a_hex("") == "cbf29ce484222325");
  REQUIRE(fnv1a_hex("a") != fnv1a_hex("b"));
}

TEST_CASE("scan csv format") {
  ScanResult scan;
  scan.rows.push_back({"near", 0.5, 1.25, 7, true, false});
  scan.rows.push_back({"apart", std::numeric_limits<double>::infinity(), 0.0, 0,
                       true, true});
  scan.envelope.emplace_back(0.5, 1.25);
  auto csv = scan_csv(scan);
  REQUIRE(csv.find("pair_id,delta,modulus,iterations,converged\n") == 0);
  REQUIRE(csv.find("near,0.5,1.25,7,1\n") != std::string::npos);
  REQUIRE(csv.find("apart,inf,0,0,1\n") != std::string::npos);

  const char* path = "io_scan.csv";
  write_scan_csv(path, scan);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  in.close();
  std::remove(path);
  REQUIRE(line == "pair_id,delta,modulus,iterations,converged");
}

TEST_CASE("deformation and structure records serialize") {
  auto ms = gen::geometric_set(6);
  auto sph = sphericalize(ms, 0);
  auto rec = deformation_record("sphericalize", ms.space, sph.space, "p0");
  auto j = record_json(rec);
  REQUIRE(j["kind"] == "sphericalize");
  REQUIRE(j["base_point"] == "p0");
  REQUIRE(j["input_k"].get<double>() >= 1.0);

  auto srep = structure_report(ms, scan_radii(ms.space));
  auto sj = structure_json(srep);
  REQUIRE(sj["quasimetric_k"].get<double>() >= 1.0);
  REQUIRE(sj.contains("fit"));
  REQUIRE(sj["radii"].size() == srep.radii.size());
}
