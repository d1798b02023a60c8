#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "qmetric/space.hpp"
#include "qmetric/transforms.hpp"

using namespace qmetric;

TEST_CASE("sphericalize: frozen three-point example") {
  // points 0, 1, 3 on the line with unit masses, base a = 0
  auto ms = with_counting_masses(oracle::space_from_1d({0.0, 1.0, 3.0}));
  auto out = sphericalize(ms, 0);

  REQUIRE(out.size() == 4);
  REQUIRE(out.space.infinity_index() == std::optional<std::size_t>{3});
  REQUIRE(out.space.id(3) == std::string(infinity_id));

  // rho_a(1,3) = 2 / ((1+1)(1+3))
  REQUIRE(out.space.at(1, 2) == Catch::Approx(0.25).epsilon(1e-12));
  // rho_a(a, x) = rho / (1+rho)
  REQUIRE(out.space.at(0, 1) == Catch::Approx(0.5).epsilon(1e-12));
  // distances to infinity: 1/(1+rho(x,a)); in particular rho_a(a, inf) = 1
  REQUIRE(out.space.at(0, 3) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(out.space.at(1, 3) == Catch::Approx(0.5).epsilon(1e-12));
  REQUIRE(out.space.at(2, 3) == Catch::Approx(0.25).epsilon(1e-12));

  // masses: mass / mu(B(a, 1+rho(a,z)))^2 with open balls of mass 1, 2, 3
  REQUIRE(out.mass[0] == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(out.mass[1] == Catch::Approx(0.25).epsilon(1e-12));
  REQUIRE(out.mass[2] == Catch::Approx(1.0 / 9.0).epsilon(1e-12));
  REQUIRE(out.mass[3] == 0.0);
}

TEST_CASE("sphericalize: preconditions") {
  auto ms = with_uniform_masses(oracle::space_from_1d({0.0, 1.0, 3.0}));
  REQUIRE_THROWS_AS(sphericalize(ms, 9), invalid_input);
  auto tagged = sphericalize(ms, 0);
  REQUIRE_THROWS_AS(sphericalize(tagged, 0), invalid_input);

  auto clash = MeasuredSpace::attach(
      QuasimetricSpace::from_table({"a", "@infinity"}, {0, 1, 1, 0}), {1.0, 1.0});
  REQUIRE_THROWS_AS(sphericalize(clash, 0), invalid_input);
}

TEST_CASE("sphericalize: diameter and constant bounds") {
  for (unsigned seed : {1u, 4u}) {
    auto ms = oracle::line_sample(48, seed);
    double k_in = quasimetric_constant(ms.space);
    auto out = sphericalize(ms, 0);
    REQUIRE(out.space.diameter() <= k_in * (1.0 + 1e-12));
    REQUIRE(quasimetric_constant(out.space) <= 4.0 * k_in * k_in * (1.0 + 1e-9));
  }
  auto gs = oracle::geometric_set(8);
  double k_in = quasimetric_constant(gs.space);
  auto out = sphericalize(gs, 0);
  REQUIRE(quasimetric_constant(out.space) <= 4.0 * k_in * k_in * (1.0 + 1e-9));
}

TEST_CASE("flatten: unit-spaced line agrees with the regular density at Q=1") {
  auto ms = oracle::unit_spaced(8);
  auto ball_mode = flatten(ms, 0);
  TransformOptions density{MeasureMode::regular_density, 1.0};
  auto density_mode = flatten(ms, 0, density);

  REQUIRE(ball_mode.size() == 7);
  // rho^c(p1,p2) = 1/(1*2)
  REQUIRE(ball_mode.space.at(0, 1) == Catch::Approx(0.5).epsilon(1e-12));
  for (std::size_t k = 1; k <= 7; ++k) {
    // mu(B(p0, k)) = k exactly, so both normalizers give 1/k^2
    REQUIRE(ball_mode.mass[k - 1] == Catch::Approx(1.0 / double(k * k)).epsilon(1e-12));
    REQUIRE(density_mode.mass[k - 1] ==
            Catch::Approx(ball_mode.mass[k - 1]).epsilon(1e-12));
  }

  // same check for the sphericalized measure: mu(B(p0, 1+k)) = k+1
  auto sp = sphericalize(ms, 0);
  TransformOptions sp_density{MeasureMode::regular_density, 1.0};
  auto sp2 = sphericalize(ms, 0, sp_density);
  for (std::size_t k = 0; k < 8; ++k) {
    REQUIRE(sp.mass[k] ==
            Catch::Approx(1.0 / double((k + 1) * (k + 1))).epsilon(1e-12));
    REQUIRE(sp2.mass[k] == Catch::Approx(sp.mass[k]).epsilon(1e-12));
  }
}

TEST_CASE("flatten: algebraic inverse and constant bound") {
  auto ms = oracle::line_sample(48, 7);
  const auto& s = ms.space;
  std::size_t c = 5;
  auto out = flatten(ms, c);
  std::size_t m = out.size();
  std::vector<std::size_t> keep;
  for (std::size_t x = 0; x < s.size(); ++x)
    if (x != c) keep.push_back(x);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      double back = out.space.at(i, j) * s.at(keep[i], c) * s.at(keep[j], c);
      REQUIRE(back == Catch::Approx(s.at(keep[i], keep[j])).epsilon(1e-12));
    }
  double k_in = quasimetric_constant(s);
  REQUIRE(quasimetric_constant(out.space) <= k_in * k_in * (1.0 + 1e-9));

  REQUIRE_THROWS_AS(flatten(ms, 99), invalid_input);
  auto single = with_uniform_masses(
      QuasimetricSpace::from_table({"only"}, {0.0}));
  REQUIRE_THROWS_AS(flatten(single, 0), invalid_input);
}

TEST_CASE("inversion matches flatten distances") {
  auto ms = oracle::line_sample(24, 2);
  auto inv = inversion(ms.space, 3);
  auto fl = flatten(ms, 3);
  REQUIRE(inv.size() == fl.size());
  for (std::size_t i = 0; i < inv.size(); ++i)
    for (std::size_t j = 0; j < inv.size(); ++j)
      REQUIRE(inv.at(i, j) == fl.space.at(i, j));
}

TEST_CASE("flatten: geometric set becomes the dyadic ladder") {
  // flattening {2^-k} at 0 sends 2^-k to 2^k with mass 2^k
  auto gs = oracle::geometric_set(10);
  std::size_t c = gs.size() - 1;  // the accumulation point 0 sits last
  auto out = flatten(gs, c);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double u = 1.0 / gs.space.at(c, i);
    REQUIRE(out.mass[i] == Catch::Approx(u).epsilon(1e-12));
  }
  // Ahlfors exponent stays near 1 on the ladder's own scales
  std::vector<double> radii;
  for (int m = 2; m <= 8; ++m) radii.push_back(std::pow(2.0, m));
  auto fit = ahlfors_fit(out, radii);
  REQUIRE(std::abs(fit.exponent - 1.0) < 0.2);
}

TEST_CASE("sphericalize: regularity is preserved on the line") {
  auto ms = oracle::line_sample(1024, 11);
  auto base_fit = ahlfors_fit(ms, scan_radii(ms.space));
  auto out = sphericalize(ms, 0);
  auto out_fit = ahlfors_fit(out, scan_radii(out.space));
  REQUIRE(std::abs(out_fit.exponent - base_fit.exponent) < 0.15);
}

TEST_CASE("doubling does not blow up when n doubles") {
  auto small = sphericalize(oracle::line_sample(256, 13), 0);
  auto large = sphericalize(oracle::line_sample(512, 13), 0);
  double c_small = measure_doubling_constant(small, scan_radii(small.space)).constant;
  double c_large = measure_doubling_constant(large, scan_radii(large.space)).constant;
  REQUIRE(c_large <= 1.5 * c_small);

  std::vector<double> dyadic{4.0, 8.0, 16.0, 32.0};
  auto gs8 = oracle::geometric_set(8);
  auto gs16 = oracle::geometric_set(16);
  auto f_small = flatten(gs8, gs8.size() - 1);
  auto f_large = flatten(gs16, gs16.size() - 1);
  double fc_small = measure_doubling_constant(f_small, dyadic).constant;
  double fc_large = measure_doubling_constant(f_large, dyadic).constant;
  REQUIRE(fc_large <= 1.5 * fc_small);
}

TEST_CASE("roundtrip: closed form and bilipschitz bound") {
  auto ms = oracle::line_sample(48, 5);
  auto rep = roundtrip(ms, 7);
  REQUIRE(rep.ok);
  REQUIRE(rep.max_rel_err <= 1e-12);
  REQUIRE(rep.bilipschitz_low >= 1.0 - 1e-12);
  REQUIRE(rep.bilipschitz_high <= rep.bilipschitz_bound * (1.0 + 1e-12));

  // c lands on the appended infinity: rho_rt(x, c) = rho(x,c)/(1+rho(x,c))
  const auto& s = ms.space;
  auto inf = rep.result.space.infinity_index();
  REQUIRE(inf.has_value());
  std::size_t x = 0;  // first kept point sits at slot 0
  double want = s.at(x, 7) / (1.0 + s.at(x, 7));
  REQUIRE(rep.result.space.at(0, *inf) == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("roundtrip: unit-diameter space has bound 4; two points are exact") {
  auto ms = with_uniform_masses(oracle::space_from_1d({0.0, 0.4, 1.0}));
  auto rep = roundtrip(ms, 0);
  REQUIRE(rep.bilipschitz_bound == Catch::Approx(4.0));
  REQUIRE(rep.ok);

  auto two = with_uniform_masses(oracle::space_from_1d({0.0, 1.0}));
  auto rep2 = roundtrip(two, 0);
  REQUIRE(rep2.ok);
  REQUIRE(rep2.max_rel_err <= 1e-12);
}

TEST_CASE("chain metrization") {
  // metric input is untouched
  auto line = oracle::unit_spaced(9);
  auto d = chain_metrize(line.space);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j)
      REQUIRE(d.at(i, j) == line.space.at(i, j));

  // 10-1-1 triple: the two-step chain wins
  auto s = QuasimetricSpace::from_table({"x", "y", "z"},
                                        {0, 1, 10, 1, 0, 1, 10, 1, 0});
  auto m = chain_metrize(s);
  REQUIRE(m.at(0, 2) == Catch::Approx(2.0).epsilon(1e-12));

  // sandwich for K <= 2 inputs, triangle inequality always
  auto snow = oracle::snowflake_of(oracle::line_sample(40, 3).space, 0.5);
  REQUIRE(quasimetric_constant(snow) <= 2.0 + 1e-12);
  auto dd = chain_metrize(snow);
  for (std::size_t i = 0; i < snow.size(); ++i)
    for (std::size_t j = 0; j < snow.size(); ++j) {
      REQUIRE(dd.at(i, j) <= snow.at(i, j) * (1.0 + 1e-12));
      REQUIRE(2.0 * dd.at(i, j) >= snow.at(i, j) * (1.0 - 1e-12));
      for (std::size_t k = 0; k < snow.size(); ++k)
        REQUIRE(dd.at(i, j) <= (dd.at(i, k) + dd.at(k, j)) * (1.0 + 1e-12));
    }
  REQUIRE(quasimetric_constant(dd) <= 2.0 + 1e-12);
}

TEST_CASE("david-semmes: frozen two-point value and shape") {
  auto two = with_counting_masses(oracle::space_from_1d({0.0, 1.0}));
  auto out = david_semmes(two, 0.5);
  // open balls of radius 1 hold only the centers: beta = (1+1)^0.5
  REQUIRE(out.space.at(0, 1) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(out.space.at(0, 0) == 0.0);
  REQUIRE(out.mass == two.mass);
  REQUIRE_THROWS_AS(david_semmes(two, 0.0), invalid_input);
  REQUIRE_THROWS_AS(david_semmes(two, -1.0), invalid_input);
}

TEST_CASE("david-semmes: deformation exponent 1/epsilon") {
  auto ms = oracle::unit_spaced(256);
  auto out = david_semmes(ms, 0.5);
  auto fit = ahlfors_fit(out, scan_radii(out.space));
  REQUIRE(std::abs(fit.exponent - 2.0) < 0.3);
}

TEST_CASE("david-semmes: quasimetric constant bound") {
  // K_beta <= C_sup^((2 log2 K + 2) eps) with C_sup over all critical radii
  for (const auto& ms : {oracle::unit_spaced(32), oracle::line_sample(48, 9),
                         oracle::geometric_set(8)}) {
    std::vector<double> all;
    for (std::size_t i = 0; i < ms.size(); ++i)
      for (std::size_t j = 0; j < ms.size(); ++j)
        if (i != j) all.push_back(ms.space.at(i, j));
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    double c_sup = measure_doubling_constant(ms, all).constant;
    double k_in = quasimetric_constant(ms.space);
    double eps = 0.5;
    auto out = david_semmes(ms, eps);
    double k_out = quasimetric_constant(out.space);
    double bound = std::pow(c_sup, (2.0 * std::log2(std::max(k_in, 1.0)) + 2.0) * eps);
    REQUIRE(k_out <= bound * (1.0 + 1e-9));
  }
}

TEST_CASE("deformation records carry the constant bounds") {
  auto ms = oracle::line_sample(32, 6);
  auto sp = sphericalize(ms, 0);
  auto rec = deformation_record("sphericalize", ms.space, sp.space, ms.space.id(0));
  REQUIRE(rec.kind == "sphericalize");
  REQUIRE(rec.input_k >= 1.0);
  REQUIRE(rec.output_k <= 4.0 * rec.input_k * rec.input_k * (1.0 + 1e-9));

  auto fl = flatten(ms, 0);
  auto rec2 = deformation_record("flatten", ms.space, fl.space, ms.space.id(0));
  REQUIRE(rec2.output_k <= rec2.input_k * rec2.input_k * (1.0 + 1e-9));

  auto ch = chain_metrize(ms.space);
  auto rec3 = deformation_record("chain", ms.space, ch);
  REQUIRE(rec3.output_k <= 2.0 + 1e-9);
}
