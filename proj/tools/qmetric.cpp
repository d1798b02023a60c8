// qmetric <verb> [flags]: deformations, boundary constructions, modulus,
// and the acceptance suites on finite quasimetric measure spaces.
// Exit code 0 iff every assertion made by the invoked verb passes;
// 2 on malformed input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmetric/suites.hpp"

using namespace qmetric;

namespace {

std::vector<std::string> split_ids(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::size_t> graph_ids(const WeightedGraph& g, const std::string& csv) {
  std::vector<std::size_t> out;
  for (const auto& id : split_ids(csv)) out.push_back(g.index_of(id));
  return out;
}

// <stem>.json -> <stem>.record.json; otherwise append .record.json
std::string record_path(const std::string& out) {
  std::string stem = out;
  if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json")
    stem.resize(stem.size() - 5);
  return stem + ".record.json";
}

void emit(const ordered_json& j, const std::string& out) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json_file(out, j);
}

// transformed space plus its DeformationRecord next to it
void write_deformed(const MeasuredSpace& in, const MeasuredSpace& result,
                    const std::string& kind, const std::string& base_id,
                    double epsilon, const std::string& out) {
  auto rec = deformation_record(kind, in.space, result.space, base_id, epsilon);
  if (out.empty()) {
    emit(space_json(result), "");
  } else {
    write_space(out, result);
    write_json_file(record_path(out), record_json(rec));
  }
  std::cout << record_json(rec).dump(2) << "\n";
}

SpaceMap read_map(const std::string& path) {
  auto j = read_json_file(path);
  if (!j.contains("source") || !j.contains("target"))
    throw invalid_input("map file needs 'source' and 'target'");
  auto src = read_space(j.at("source").get<std::string>());
  auto tgt = read_space(j.at("target").get<std::string>());
  if (!j.contains("pairs"))
    return SpaceMap::identity(src.space, tgt.space);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& p : j.at("pairs")) {
    if (!p.is_array() || p.size() != 2)
      throw invalid_input("map pair must be [source_id, target_id]");
    pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  return SpaceMap::from_pairs(src.space, tgt.space, pairs);
}

ordered_json boundary_json(const BoundaryQuasimetric& b) {
  ordered_json j;
  j["flavor"] = b.flavor;
  j["epsilon"] = b.epsilon;
  j["delta"] = b.delta;
  j["in_range"] = b.in_range;
  if (!b.omega.empty()) j["omega"] = b.omega;
  j["size"] = b.table.size();
  j["quasimetric_k"] = b.k;
  j["sandwich_ok"] = b.sandwich_ok;
  return j;
}

ordered_json fit_json(const AhlforsFit& f) {
  return ordered_json{{"exponent", f.exponent},
                      {"constant", f.constant},
                      {"residual", f.residual},
                      {"samples", f.samples},
                      {"skipped", f.skipped}};
}

ordered_json solution_json(const WeightedGraph& g, const ModulusSolution& sol) {
  ordered_json j;
  j["value"] = sol.value;
  j["dual_bound"] = sol.dual_bound;
  j["shortest_violation"] = sol.shortest_violation;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["empty_family"] = sol.empty_family;
  ordered_json dens = ordered_json::array();
  for (std::size_t e = 0; e < sol.g.size(); ++e)
    dens.push_back(ordered_json::array(
        {g.id(g.edges()[e].u), g.id(g.edges()[e].v), sol.g[e]}));
  j["density"] = std::move(dens);
  return j;
}

std::size_t parse_grid_suite(const std::string& suite) {
  if (suite.rfind("grid:", 0) != 0 || suite.size() == 5)
    throw invalid_input("unknown scan suite '" + suite + "' (expected grid:n)");
  std::size_t n = 0;
  for (char c : suite.substr(5)) {
    if (c < '0' || c > '9')
      throw invalid_input("bad grid size in '" + suite + "'");
    n = n * 10 + static_cast<std::size_t>(c - '0');
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite quasimetric measure spaces: sphericalization, "
               "flattening, boundaries, modulus"};
  app.require_subcommand(1);
  int rc = 0;

  std::string in_file, out_file, map_file;
  std::string base_id, omega, boundary_set = "leaves";
  std::string kind, points_csv, e_csv, f_csv, suite_spec, suite_name;
  std::uint64_t gen_seed = 2026, suite_seed = 2026;
  std::uint64_t profile_seed = 1, profile_budget = default_profile_budget;
  double alpha = 0.5, eps = 0.5, q = 2.0;
  double rt_tol = 1e-12, du_tol = 0.15, cc_tol = 0.05;
  double wh = 1.0, wH = 1.0, lambda = 8.0;
  std::size_t nn = 64, dim = 1, depth = 6, branching = 2;
  std::vector<double> alphas, radii, radii_b, radii_h;
  std::string profile_kind = "qs";

  auto* g_cmd = app.add_subcommand("generate", "write an example space or graph");
  g_cmd->add_option("--kind", kind, "generator family")->required();
  g_cmd->add_option("--n", nn);
  g_cmd->add_option("--dim", dim);
  g_cmd->add_option("--alpha", alpha);
  g_cmd->add_option("--alphas", alphas)->delimiter(',');
  g_cmd->add_option("--depth", depth);
  g_cmd->add_option("--branching", branching);
  g_cmd->add_option("--seed", gen_seed);
  g_cmd->add_option("--out", out_file);
  g_cmd->callback([&] {
    GeneratorSpec spec{kind, nn, dim, alpha, alphas, depth, branching};
    auto made = generate(spec, gen_seed);
    emit(made.space ? space_json(*made.space) : graph_json(*made.graph), out_file);
  });

  auto* rep_cmd = app.add_subcommand("report", "structure report of a space file");
  rep_cmd->add_option("file", in_file)->required();
  rep_cmd->add_option("--radii", radii)->delimiter(',');
  rep_cmd->add_option("--out", out_file);
  rep_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto r = radii.empty() ? scan_radii(ms.space) : radii;
    emit(structure_json(structure_report(ms, r)), out_file);
  });

  auto add_transform = [&](const std::string& name, const std::string& help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("file", in_file)->required();
    c->add_option("--out", out_file);
    return c;
  };

  auto* sph_cmd = add_transform("sphericalize", "sphericalize at --base");
  sph_cmd->add_option("--base", base_id)->required();
  sph_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto out = sphericalize(ms, ms.space.index_of(base_id));
    write_deformed(ms, out, "sphericalize", base_id, 0.0, out_file);
  });

  auto* fl_cmd = add_transform("flatten", "flatten at --base");
  fl_cmd->add_option("--base", base_id)->required();
  fl_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto out = flatten(ms, ms.space.index_of(base_id));
    write_deformed(ms, out, "flatten", base_id, 0.0, out_file);
  });

  auto* rt_cmd = add_transform("roundtrip", "flatten then sphericalize at --base");
  rt_cmd->add_option("--base", base_id)->required();
  rt_cmd->add_option("--tol", rt_tol);
  rt_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto rt = roundtrip(ms, ms.space.index_of(base_id), rt_tol);
    ordered_json j;
    j["max_rel_err"] = rt.max_rel_err;
    j["bilipschitz_low"] = rt.bilipschitz_low;
    j["bilipschitz_high"] = rt.bilipschitz_high;
    j["bilipschitz_bound"] = rt.bilipschitz_bound;
    j["ok"] = rt.ok;
    std::cout << j.dump(2) << "\n";
    if (!out_file.empty()) write_space(out_file, rt.result);
    rc = rt.ok ? 0 : 1;
  });

  auto* ch_cmd = add_transform("chain-metrize", "largest metric below the quasimetric");
  ch_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto chained = MeasuredSpace::attach(chain_metrize(ms.space), ms.mass);
    write_deformed(ms, chained, "chain", "", 0.0, out_file);
  });

  auto* ds_cmd = add_transform("david-semmes", "deformation beta = mu(B cup B)^eps");
  ds_cmd->add_option("--epsilon", eps)->required();
  ds_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto out = david_semmes(ms, eps);
    write_deformed(ms, out, "david_semmes", "", eps, out_file);
  });

  auto* cr_cmd = app.add_subcommand("cross-ratio",
                                    "rho(a,c)rho(b,d)/(rho(a,b)rho(c,d))");
  cr_cmd->add_option("file", in_file)->required();
  cr_cmd->add_option("--points", points_csv, "four ids a,b,c,d")->required();
  cr_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto ids = split_ids(points_csv);
    if (ids.size() != 4)
      throw invalid_input("cross-ratio needs exactly four point ids");
    double v = cross_ratio(ms.space, ms.space.index_of(ids[0]),
                           ms.space.index_of(ids[1]), ms.space.index_of(ids[2]),
                           ms.space.index_of(ids[3]));
    std::cout << ordered_json{{"cross_ratio", v}}.dump(2) << "\n";
  });

  auto* pr_cmd = app.add_subcommand("profile", "distortion profile of a map file");
  pr_cmd->add_option("file", map_file)->required();
  pr_cmd->add_option("--kind", profile_kind)->check(CLI::IsMember({"qs", "qm"}));
  pr_cmd->add_option("--budget", profile_budget);
  pr_cmd->add_option("--seed", profile_seed);
  pr_cmd->add_option("--out", out_file, "scatter CSV (t, t_prime, envelope)");
  pr_cmd->callback([&] {
    auto map = read_map(map_file);
    auto prof = profile_kind == "qs" ? qs_profile(map, profile_budget, profile_seed)
                                     : qm_profile(map, profile_budget, profile_seed);
    ordered_json j;
    j["kind"] = profile_kind;
    j["samples"] = prof.samples.size();
    j["exhaustive"] = prof.exhaustive;
    j["evidence"] = prof.evidence;
    j["envelope_at_1"] = prof.envelope_at(1.0);
    std::cout << j.dump(2) << "\n";
    if (!out_file.empty()) {
      std::ofstream csv(out_file);
      if (!csv) throw invalid_input("cannot open '" + out_file + "' for writing");
      csv << "t,t_prime,envelope\n";
      for (std::size_t i = 0; i < prof.samples.size(); ++i)
        csv << csv_number(prof.samples[i].first) << ','
            << csv_number(prof.samples[i].second) << ','
            << csv_number(prof.envelope[i]) << '\n';
    }
  });

  auto* wq_cmd = app.add_subcommand("weak-qm", "(h,H)-weak quasimobius check");
  wq_cmd->set_help_flag("--help", "print help");  // frees -h for the h bound
  wq_cmd->add_option("file", map_file)->required();
  wq_cmd->add_option("--h", wh)->required();
  wq_cmd->add_option("--H", wH)->required();
  wq_cmd->add_option("--budget", profile_budget);
  wq_cmd->add_option("--seed", profile_seed);
  wq_cmd->callback([&] {
    auto res = weak_qm_check(read_map(map_file), wh, wH, profile_budget,
                             profile_seed);
    ordered_json j{{"ok", res.ok}, {"worst", res.worst}};
    if (res.witness) {
      ordered_json w = ordered_json::array();
      for (auto i : *res.witness) w.push_back(i);
      j["witness"] = std::move(w);
    }
    std::cout << j.dump(2) << "\n";
    rc = res.ok ? 0 : 1;
  });

  auto* tp_cmd = app.add_subcommand("three-point",
                                    "lambda-separated triple on both sides");
  tp_cmd->add_option("file", map_file)->required();
  tp_cmd->add_option("--lambda", lambda)->required();
  tp_cmd->callback([&] {
    auto res = three_point_condition(read_map(map_file), lambda);
    ordered_json j{{"ok", res.ok}, {"best_lambda", res.best_lambda}};
    ordered_json w = ordered_json::array();
    for (auto i : res.witness) w.push_back(i);
    j["witness"] = std::move(w);
    std::cout << j.dump(2) << "\n";
    rc = res.ok ? 0 : 1;
  });

  auto* dc_cmd = app.add_subcommand("decay",
                                    "closed-form decay certificate and grid scan");
  dc_cmd->add_option("file", in_file)->required();
  dc_cmd->add_option("--radii", radii)->delimiter(',');
  dc_cmd->callback([&] {
    auto ms = read_space(in_file);
    auto rep = decay_exponent(ms, radii.empty() ? scan_radii(ms.space) : radii);
    ordered_json j;
    j["tau"] = rep.tau;
    j["k"] = rep.k;
    j["c"] = rep.c;
    j["delta1"] = rep.delta1;
    j["delta2"] = rep.delta2;
    j["alpha"] = rep.alpha;
    j["c0"] = rep.c0;
    j["empirical_max"] = rep.empirical_max;
    j["empirical_degenerate"] = rep.empirical_degenerate;
    std::cout << j.dump(2) << "\n";
    rc = !rep.empirical_degenerate && rep.empirical_max <= rep.c0 ? 0 : 1;
  });

  auto* dl_cmd = app.add_subcommand("delta", "four-point hyperbolicity constant");
  dl_cmd->add_option("file", in_file)->required();
  dl_cmd->callback([&] {
    auto g = read_graph(in_file);
    auto rep = delta_hyperbolicity(g, g.base());
    ordered_json j;
    j["delta"] = rep.delta;
    j["base"] = g.id(rep.base);
    j["alternate_max"] = rep.alternate_max;
    std::cout << j.dump(2) << "\n";
  });

  auto add_boundary = [&](const std::string& name, const std::string& help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("file", in_file)->required();
    c->add_option("--eps", eps)->required();
    c->add_option("--boundary", boundary_set);
    c->add_option("--out", out_file);
    return c;
  };

  auto* bd_cmd = add_boundary("bourdon", "Bourdon quasimetric on a boundary set");
  bd_cmd->callback([&] {
    auto g = read_graph(in_file);
    auto b = bourdon(g, boundary_set, eps);
    std::cout << boundary_json(b).dump(2) << "\n";
    if (!out_file.empty()) write_space(out_file, with_counting_masses(b.table));
    rc = b.k > 2.0 || b.sandwich_ok ? 0 : 1;
  });

  auto* hm_cmd = add_boundary("hamenstadt",
                              "Hamenstadt quasimetric punctured at --omega");
  hm_cmd->add_option("--omega", omega)->required();
  hm_cmd->callback([&] {
    auto g = read_graph(in_file);
    auto h = hamenstadt(g, boundary_set, omega, eps);
    std::cout << boundary_json(h).dump(2) << "\n";
    if (!out_file.empty()) write_space(out_file, with_counting_masses(h.table));
    rc = h.k > 2.0 || h.sandwich_ok ? 0 : 1;
  });

  auto* du_cmd = add_boundary("duality", "Hamenstadt side vs flattened Bourdon side");
  du_cmd->add_option("--omega", omega)->required();
  du_cmd->add_option("--tol", du_tol);
  du_cmd->add_option("--radii-bourdon", radii_b)->delimiter(',');
  du_cmd->add_option("--radii-hamenstadt", radii_h)->delimiter(',');
  du_cmd->callback([&] {
    auto g = read_graph(in_file);
    auto rep = regularity_duality_check(
        g, boundary_set, omega, eps,
        radii_b.empty() ? std::nullopt : std::optional(radii_b),
        radii_h.empty() ? std::nullopt : std::optional(radii_h), du_tol);
    ordered_json j;
    j["identity_max_rel_err"] = rep.identity_max_rel_err;
    j["bourdon_fit"] = fit_json(rep.bourdon_fit);
    j["hamenstadt_fit"] = fit_json(rep.hamenstadt_fit);
    j["tolerance"] = rep.tolerance;
    j["exponents_agree"] = rep.exponents_agree;
    emit(j, out_file);
    rc = rep.exponents_agree && rep.identity_max_rel_err <= 1e-9 ? 0 : 1;
  });

  auto* mo_cmd = app.add_subcommand("modulus", "Q-modulus of the E-F path family");
  mo_cmd->add_option("file", in_file)->required();
  mo_cmd->add_option("--E", e_csv, "source vertex ids")->required();
  mo_cmd->add_option("--F", f_csv, "target vertex ids")->required();
  mo_cmd->add_option("--Q", q)->required();
  mo_cmd->add_option("--out", out_file);
  mo_cmd->callback([&] {
    auto g = read_graph(in_file);
    auto sol = modulus(
        ModulusProblem::make(g, graph_ids(g, e_csv), graph_ids(g, f_csv), q));
    emit(solution_json(g, sol), out_file);
    rc = sol.converged ? 0 : 1;
  });

  auto* ls_cmd = app.add_subcommand("loewner-scan", "modulus vs relative separation");
  ls_cmd->add_option("--suite", suite_spec, "grid:n")->required();
  ls_cmd->add_option("--Q", q);
  ls_cmd->add_option("--out", out_file, "CSV path");
  ls_cmd->callback([&] {
    std::size_t n = parse_grid_suite(suite_spec);
    auto g = gen::grid(n);
    auto scan = loewner_scan(g, concentric_square_pairs(n), q);
    if (out_file.empty())
      std::cout << scan_csv(scan);
    else
      write_scan_csv(out_file, scan);
    for (const auto& row : scan.rows)
      if (!row.converged) rc = 1;
  });

  auto* cc_cmd = app.add_subcommand("conformal-check",
                                    "modulus invariance under i_a reweighting");
  cc_cmd->add_option("file", in_file)->required();
  cc_cmd->add_option("--base", base_id)->required();
  cc_cmd->add_option("--E", e_csv)->required();
  cc_cmd->add_option("--F", f_csv)->required();
  cc_cmd->add_option("--Q", q);
  cc_cmd->add_option("--tol", cc_tol);
  cc_cmd->callback([&] {
    auto g = read_graph(in_file);
    auto rep = conformal_invariance_check(g, g.index_of(base_id),
                                          graph_ids(g, e_csv),
                                          graph_ids(g, f_csv), q);
    ordered_json j;
    j["base_modulus"] = rep.base_modulus;
    j["deformed_modulus"] = rep.deformed_modulus;
    j["discrepancy"] = rep.discrepancy;
    std::cout << j.dump(2) << "\n";
    rc = rep.discrepancy <= cc_tol ? 0 : 1;
  });

  auto* rs_cmd = app.add_subcommand("run-suite", "one acceptance suite");
  rs_cmd->add_option("name", suite_name, "preservation|duality|boundary|modulus")
      ->required();
  rs_cmd->add_option("--seed", suite_seed);
  rs_cmd->add_option("--out", out_file, "report JSON path");
  rs_cmd->callback([&] {
    auto rep = suites::run_suite(suite_name, suite_seed);
    if (out_file.empty()) {
      std::cout << report_json(rep).dump(2) << "\n";
    } else {
      write_report(out_file, rep);
      for (const auto& c : rep.checks)
        std::printf("%s %s observed=%.6g bound=%.6g\n",
                    c.passed ? "pass" : "FAIL", c.name.c_str(), c.observed,
                    c.bound);
    }
    rc = rep.all_passed() ? 0 : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
