#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbec/convergence.hpp"
#include "support.hpp"

using namespace rbec;

namespace {

StudyConfig oscillator_study() {
  StudyConfig c;
  c.params.beta = 0.0;
  c.params.omega = 0.0;
  c.params.gamma_x = 1.0;
  c.params.gamma_y = 1.0;
  c.params.half_width = 8.0;
  c.levels = {8, 16};
  c.reference = 32;
  return c;
}

const ConvergenceTable& oscillator_table() {
  static const ConvergenceTable t = run_study(oscillator_study());
  return t;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("EOC of exact power laws") {
  const std::vector<double> h{1.0, 0.5, 0.25, 0.125};
  for (double p : {1.0, 2.0, 1.5}) {
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * std::pow(x, p));
    const auto eoc = compute_eoc(h, e);
    REQUIRE(eoc.size() == 3);
    for (const auto& r : eoc) {
      REQUIRE(r.has_value());
      CHECK(*r == doctest::Approx(p).epsilon(1e-13));
    }
  }
  // Non-halving steps: log(4) / log(3)
  const auto odd = compute_eoc({0.9, 0.3}, {4.0, 1.0});
  CHECK(*odd[0] == doctest::Approx(std::log(4.0) / std::log(3.0)));
}

TEST_CASE("EOC is undefined for zero errors and rejects bad input") {
  const auto eoc = compute_eoc({1.0, 0.5, 0.25}, {1.0, 0.0, 0.0});
  CHECK_FALSE(eoc[0].has_value());
  CHECK_FALSE(eoc[1].has_value());
  CHECK(compute_eoc({1.0}, {1.0}).empty());
  CHECK_THROWS_AS(compute_eoc({1.0, 0.5}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(compute_eoc({0.5, 1.0}, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(compute_eoc({1.0, 0.0}, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(compute_eoc({1.0, 0.5}, {1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("study configuration validation lists every violation") {
  StudyConfig c = oscillator_study();
  CHECK_NOTHROW(c.validate());
  CHECK(c.reference_subdivisions() == 32);
  c.reference = 0;
  CHECK(c.reference_subdivisions() == 32);

  c.levels = {8, 12, 12};
  c.reference = 8;
  c.order = 3;
  c.density_flag_threshold = 0.0;
  try {
    c.validate();
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("order") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
    CHECK(msg.find("12") != std::string::npos);
    CHECK(msg.find("reference") != std::string::npos);
    CHECK(msg.find("threshold") != std::string::npos);
  }
  c = oscillator_study();
  c.levels.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("a level measured against itself has zero error") {
  const StudyConfig c = oscillator_study();
  auto space = make_space(8.0, 16, 1);
  const GpeOperators ops(space, c.params);
  const GroundStateResult r = solve_ground_state(ops, c.solver, initial_guess(space, c.params, ops.mass()));
  const GroundStateResult rotated = [&] {
    GroundStateResult x(r.u.scaled(std::polar(1.0, 2.0)));
    x.lambda = r.lambda;
    x.energy = r.energy;
    return x;
  }();
  const LevelRow row = measure_level(rotated, r, ops, c.density_flag_threshold);
  CHECK(row.err_l2 <= 1e-12);
  CHECK(row.err_h1 <= 1e-12);
  CHECK(row.err_l2_unaligned > 1.0);  // |e^{2i} - 1| ~ 1.68
  CHECK(row.density_error <= 1e-12);
  CHECK(row.energy_diff == 0.0);
  CHECK_FALSE(row.flagged);
}

TEST_CASE("a displaced density is flagged as a distinct configuration") {
  const StudyConfig c = oscillator_study();
  auto space = make_space(8.0, 16, 1);
  const GpeOperators ops(space, c.params);
  auto gauss = [&](double shift) {
    return normalize(interpolate(space, [shift](const Point2& x) {
                       return Complex(std::exp(-0.5 * ((x.x1 - shift) * (x.x1 - shift) + x.x2 * x.x2)), 0.0);
                     }),
                     ops.mass());
  };
  GroundStateResult ref(gauss(0.0)), moved(gauss(2.0));
  const LevelRow row = measure_level(moved, ref, ops, 0.5);
  CHECK(row.density_error > 0.5);
  CHECK(row.flagged);
  CHECK(row.flag_reason.find("distinct") != std::string::npos);
  const LevelRow near = measure_level(GroundStateResult(gauss(0.05)), ref, ops, 0.5);
  CHECK_FALSE(near.flagged);
}

TEST_CASE("oscillator study produces ordered rows, consistent errors and EOC rows") {
  const ConvergenceTable& t = oscillator_table();
  REQUIRE(t.rows.size() == 2);
  REQUIRE(t.eoc.size() == 1);
  CHECK(t.rows[0].subdivisions == 8);
  CHECK(t.rows[0].h == doctest::Approx(2.0));
  CHECK(t.rows[1].h == doctest::Approx(1.0));
  CHECK(t.reference.subdivisions == 32);
  CHECK(t.reference.lambda == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  for (const LevelRow& r : t.rows) {
    CHECK(r.err_l2 > 0.0);
    CHECK(r.err_h1 >= r.err_l2);
    CHECK(r.err_h1 >= r.err_h1_seminorm);
    CHECK(r.err_l2 <= r.err_l2_unaligned + 1e-14);
    CHECK(r.energy_diff >= 0.0);  // nested conforming spaces
    CHECK(r.err_energy() == std::abs(r.energy_diff));
    CHECK(r.err_lambda() == std::abs(r.lambda_diff));
    CHECK_FALSE(r.flagged);
  }
  const auto expect = compute_eoc({t.rows[0].h, t.rows[1].h}, {t.rows[0].err_l2, t.rows[1].err_l2});
  CHECK(*t.eoc[0].l2 == doctest::Approx(*expect[0]).epsilon(1e-14));
  CHECK_FALSE(t.strategy.empty());
}

TEST_CASE("CSV layout: header, data rows, eoc rows") {
  const ConvergenceTable& t = oscillator_table();
  std::ostringstream out;
  write_csv(out, t);
  const auto l = lines(out.str());
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "h,errL2,errH1,errEnergy,errLambda");
  std::istringstream row(l[1]);
  std::vector<double> values;
  for (std::string cell; std::getline(row, cell, ',');) values.push_back(std::stod(cell));
  REQUIRE(values.size() == 5);
  CHECK(values[0] == doctest::Approx(t.rows[0].h).epsilon(1e-9));
  CHECK(values[1] == doctest::Approx(t.rows[0].err_l2).epsilon(1e-9));
  CHECK(values[3] == doctest::Approx(t.rows[0].err_energy()).epsilon(1e-9));
  CHECK(l[3].rfind("eoc,", 0) == 0);

  ConvergenceTable flagged = t;
  flagged.rows[0].flagged = true;
  flagged.rows[0].flag_reason = "test reason";
  flagged.eoc[0].energy.reset();
  std::ostringstream out2;
  write_csv(out2, flagged);
  const auto l2 = lines(out2.str());
  REQUIRE(l2.size() == 5);
  CHECK(l2[3].find("undefined") != std::string::npos);
  CHECK(l2[4].rfind("# flagged", 0) == 0);
  CHECK(l2[4].find("test reason") != std::string::npos);
}

TEST_CASE("metadata is valid JSON echoing configuration and reference") {
  const ConvergenceTable& t = oscillator_table();
  const auto j = nlohmann::json::parse(metadata_json(oscillator_study(), t));
  CHECK(j.at("reference").at("subdivisions").get<int>() == 32);
  CHECK(j.at("reference").at("lambda").get<double>() == t.reference.lambda);
  CHECK(j.at("levels").size() == 2);
  CHECK(j.contains("strategy"));
}
