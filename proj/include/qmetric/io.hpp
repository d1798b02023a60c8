#pragma once

// JSON files for spaces, graphs, deformation records and reports; CSV for
// scan scatter data.  Doubles rely on the shortest round-trip rendering of
// the JSON library, so write-then-read reproduces tables bit-exactly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qmetric/generators.hpp"
#include "qmetric/graph.hpp"
#include "qmetric/modulus.hpp"
#include "qmetric/space.hpp"
#include "qmetric/transforms.hpp"

namespace qmetric {

inline constexpr const char* version = "0.1.0";

using ordered_json = nlohmann::ordered_json;

// -- spaces -----------------------------------------------------------------

inline ordered_json space_json(const MeasuredSpace& ms) {
  const auto& s = ms.space;
  ordered_json j;
  j["points"] = s.ids();
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < s.size(); ++k) row.push_back(s.at(i, k));
    rows.push_back(std::move(row));
  }
  j["dist"] = std::move(rows);
  j["mass"] = ms.mass;
  if (auto inf = s.infinity_index()) j["infinity"] = s.id(*inf);
  return j;
}

inline MeasuredSpace space_from_json(const ordered_json& j) {
  if (!j.contains("points") || !j.contains("dist"))
    throw invalid_input("space file needs 'points' and 'dist'");
  std::vector<std::string> ids = j.at("points").get<std::vector<std::string>>();
  const auto& rows = j.at("dist");
  if (!rows.is_array() || rows.size() != ids.size())
    throw invalid_input("space table must have one row per point");
  std::vector<double> table;
  table.reserve(ids.size() * ids.size());
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != ids.size())
      throw invalid_input("space table row length mismatch");
    for (const auto& v : row) table.push_back(v.get<double>());
  }
  std::optional<std::string> inf;
  if (j.contains("infinity")) inf = j.at("infinity").get<std::string>();
  auto space = QuasimetricSpace::from_table(std::move(ids), std::move(table), inf);
  if (j.contains("mass")) {
    auto m = j.at("mass").get<std::vector<double>>();
    return MeasuredSpace::attach(std::move(space), std::move(m));
  }
  return with_uniform_masses(std::move(space));
}

// -- graphs -----------------------------------------------------------------

inline ordered_json graph_json(const WeightedGraph& g) {
  ordered_json j;
  j["vertices"] = g.ids();
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges())
    edges.push_back(ordered_json::array({g.id(e.u), g.id(e.v), e.length}));
  j["edges"] = std::move(edges);
  if (!g.boundary_sets().empty()) {
    ordered_json b = ordered_json::object();
    for (const auto& [name, members] : g.boundary_sets()) {
      std::vector<std::string> ids;
      for (auto v : members) ids.push_back(g.id(v));
      b[name] = std::move(ids);
    }
    j["boundary"] = std::move(b);
  }
  j["base"] = g.id(g.base());
  return j;
}

inline WeightedGraph graph_from_json(const ordered_json& j) {
  if (!j.contains("vertices") || !j.contains("edges"))
    throw invalid_input("graph file needs 'vertices' and 'edges'");
  auto ids = j.at("vertices").get<std::vector<std::string>>();
  std::vector<std::tuple<std::string, std::string, double>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3)
      throw invalid_input("graph edge must be [u, v, length]");
    edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>(),
                       e[2].get<double>());
  }
  std::map<std::string, std::vector<std::string>> boundary;
  if (j.contains("boundary"))
    boundary = j.at("boundary")
                   .get<std::map<std::string, std::vector<std::string>>>();
  std::string base;
  if (j.contains("base")) base = j.at("base").get<std::string>();
  return WeightedGraph::build(ids, edges, std::move(boundary), base);
}

// -- generators ---------------------------------------------------------------

// kind selects the example family; unused params are ignored by each kind
struct GeneratorSpec {
  std::string kind;
  std::size_t n = 64;
  std::size_t dim = 1;            // euclidean_sample, snowflake
  double alpha = 0.5;             // snowflake
  std::vector<double> alphas;     // nonisotropic
  std::size_t depth = 6;          // geometric_set, tree
  std::size_t branching = 2;      // tree
};

// exactly one of the two members is set: point-set kinds yield a space,
// combinatorial kinds a graph
struct Generated {
  std::optional<MeasuredSpace> space;
  std::optional<WeightedGraph> graph;
};

inline Generated generate(const GeneratorSpec& spec, std::uint64_t seed) {
  Generated out;
  if (spec.kind == "euclidean_sample")
    out.space = gen::euclidean_sample(spec.n, spec.dim, seed);
  else if (spec.kind == "snowflake")
    out.space = gen::snowflake(spec.n, spec.alpha, seed, spec.dim);
  else if (spec.kind == "nonisotropic")
    out.space = gen::nonisotropic(spec.n, spec.alphas, seed);
  else if (spec.kind == "geometric_set")
    out.space = gen::geometric_set(spec.depth);
  else if (spec.kind == "hyperbolic_patch")
    out.space = gen::hyperbolic_patch(spec.n, seed);
  else if (spec.kind == "tree")
    out.graph = gen::tree(spec.depth, spec.branching);
  else if (spec.kind == "cycle")
    out.graph = gen::cycle(spec.n);
  else if (spec.kind == "grid")
    out.graph = gen::grid(spec.n);
  else
    throw invalid_input("unknown generator kind '" + spec.kind + "'");
  return out;
}

// -- analysis records ---------------------------------------------------------

inline ordered_json record_json(const DeformationRecord& r) {
  ordered_json j;
  j["kind"] = r.kind;
  if (!r.base_point.empty()) j["base_point"] = r.base_point;
  if (r.epsilon != 0.0) j["epsilon"] = r.epsilon;
  j["input_k"] = r.input_k;
  j["output_k"] = r.output_k;
  return j;
}

inline ordered_json structure_json(const StructureReport& rep) {
  ordered_json j;
  j["quasimetric_k"] = rep.quasimetric_k;
  j["diameter"] = rep.diameter;
  if (rep.perfectness.tau)
    j["perfectness_tau"] = *rep.perfectness.tau;
  else
    j["perfectness_tau"] = nullptr;
  j["doubling_constant"] = rep.doubling.constant;
  if (rep.fit) {
    j["fit"] = {{"exponent", rep.fit->exponent},
                {"constant", rep.fit->constant},
                {"residual", rep.fit->residual},
                {"samples", rep.fit->samples},
                {"skipped", rep.fit->skipped}};
  } else {
    j["fit"] = nullptr;
  }
  j["radii"] = rep.radii;
  return j;
}

// -- reports ------------------------------------------------------------------

// one assertion: observed value against the bound it must satisfy
struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double bound = 0.0;
  std::string note;
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_hashes;
  std::vector<std::pair<std::string, StructureReport>> structures;
  std::vector<DeformationRecord> deformations;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline ordered_json check_json(const CheckResult& c) {
  ordered_json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["observed"] = c.observed;
  j["bound"] = c.bound;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline ordered_json report_json(const Report& r) {
  ordered_json j;
  j["command"] = r.command;
  j["version"] = version;
  j["seed"] = r.seed;
  ordered_json hashes = ordered_json::object();
  for (const auto& [name, hex] : r.input_hashes) hashes[name] = hex;
  j["inputs"] = std::move(hashes);
  if (!r.structures.empty()) {
    ordered_json ss = ordered_json::object();
    for (const auto& [name, rep] : r.structures) ss[name] = structure_json(rep);
    j["structures"] = std::move(ss);
  }
  if (!r.deformations.empty()) {
    ordered_json ds = ordered_json::array();
    for (const auto& d : r.deformations) ds.push_back(record_json(d));
    j["deformations"] = std::move(ds);
  }
  ordered_json cs = ordered_json::array();
  for (const auto& c : r.checks) cs.push_back(check_json(c));
  j["checks"] = std::move(cs);
  j["all_passed"] = r.all_passed();
  return j;
}

// -- files --------------------------------------------------------------------

inline void write_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

inline ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_input("malformed JSON in '" + path + "': " + e.what());
  }
  return j;
}

inline void write_space(const std::string& path, const MeasuredSpace& ms) {
  write_json_file(path, space_json(ms));
}
inline MeasuredSpace read_space(const std::string& path) {
  return space_from_json(read_json_file(path));
}
inline void write_graph(const std::string& path, const WeightedGraph& g) {
  write_json_file(path, graph_json(g));
}
inline WeightedGraph read_graph(const std::string& path) {
  return graph_from_json(read_json_file(path));
}
inline void write_report(const std::string& path, const Report& r) {
  write_json_file(path, report_json(r));
}

// -- scan CSV -------------------------------------------------------------------

inline std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// an empty family shows up as modulus 0 with converged 1
inline std::string scan_csv(const ScanResult& scan) {
  std::ostringstream out;
  out << "pair_id,delta,modulus,iterations,converged\n";
  for (const auto& r : scan.rows)
    out << r.pair_id << ',' << csv_number(r.delta) << ','
        << csv_number(r.modulus) << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << '\n';
  return out.str();
}

inline void write_scan_csv(const std::string& path, const ScanResult& scan) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open '" + path + "' for writing");
  out << scan_csv(scan);
}

}  // namespace qmetric
