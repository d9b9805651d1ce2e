#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "causal/error.hpp"
#include "causal/oracle.hpp"
#include "causal/pom.hpp"
#include "support/fixtures.hpp"

using namespace causal;
using namespace causal::testing;

namespace {

PomTable categorical_table(std::vector<std::tuple<std::string, int, double>>
                               rows_by_stratum) {
  std::vector<PomRow> rows;
  std::size_t id = 0;
  for (const auto& [x, t, y] : rows_by_stratum) {
    PomRow r;
    r.unit = "u" + std::to_string(id++);
    r.covariates.emplace_back(x);
    r.treatment = t;
    r.outcome = y;
    rows.push_back(std::move(r));
  }
  return PomTable({{"x", CovariateKind::Categorical}}, std::move(rows));
}

PomTable real_table(std::vector<std::tuple<double, int, double>> entries) {
  std::vector<PomRow> rows;
  std::size_t id = 0;
  for (const auto& [x, t, y] : entries) {
    PomRow r;
    r.unit = "u" + std::to_string(id++);
    r.covariates.emplace_back(x);
    r.treatment = t;
    r.outcome = y;
    rows.push_back(std::move(r));
  }
  return PomTable({{"x", CovariateKind::Real}}, std::move(rows));
}

}  // namespace

TEST_CASE("table validation") {
  CHECK_THROWS_AS(ate(categorical_table({})), QueryError);
  std::vector<PomRow> dup(2);
  dup[0].unit = dup[1].unit = "same";
  dup[0].covariates.emplace_back(std::string("a"));
  dup[1].covariates.emplace_back(std::string("a"));
  CHECK_THROWS_WITH_AS(
      PomTable({{"x", CovariateKind::Categorical}}, dup),
      doctest::Contains("duplicate unit"), ModelError);

  PomRow bad;
  bad.unit = "u";
  bad.treatment = 2;
  bad.covariates.emplace_back(std::string("a"));
  CHECK_THROWS_AS(PomTable({{"x", CovariateKind::Categorical}}, {bad}),
                  ModelError);
}

TEST_CASE("positivity flags one-armed strata") {
  const PomTable t = categorical_table({{"a", 1, 1.0},
                                        {"a", 1, 2.0},
                                        {"a", 1, 3.0},
                                        {"b", 1, 1.0},
                                        {"b", 0, 0.0}});
  const auto violations = check_positivity(t);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].stratum == "a");
  CHECK(violations[0].n_treated == 3);
  CHECK_FALSE(violations[0].singleton);
}

TEST_CASE("positivity passes when every stratum is mixed") {
  const PomTable t = categorical_table(
      {{"a", 1, 1.0}, {"a", 0, 0.5}, {"b", 1, 2.0}, {"b", 0, 0.1}});
  CHECK(check_positivity(t).empty());
}

TEST_CASE("singleton strata are labelled as such") {
  const PomTable t = categorical_table(
      {{"a", 1, 1.0}, {"a", 0, 0.5}, {"solo", 1, 9.0}});
  const auto violations = check_positivity(t);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].stratum == "solo");
  CHECK(violations[0].singleton);
}

TEST_CASE("positivity requires categorical covariates") {
  const PomTable t = real_table({{0.0, 1, 1.0}, {1.0, 0, 0.0}});
  CHECK_THROWS_AS(check_positivity(t), QueryError);
}

TEST_CASE("exact matching imputes the opposite arm") {
  const PomTable pair =
      categorical_table({{"a", 1, 3.0}, {"a", 0, 1.0}});
  const auto report = exact_match_impute(pair);
  REQUIRE(report.units.size() == 2);
  CHECK(report.units[0].imputed == 1.0);
  CHECK(report.units[1].imputed == 3.0);
  CHECK(report.method == "exact");
}

TEST_CASE("unmatched units carry a missing flag, not an error") {
  const PomTable t = categorical_table({{"a", 1, 3.0}, {"b", 0, 1.0}});
  const auto report = exact_match_impute(t);
  for (const auto& u : report.units) {
    CHECK_FALSE(u.imputed.has_value());
    CHECK(u.match_count == 0);
  }
}

TEST_CASE("multiple matches aggregate by mean") {
  const PomTable t = categorical_table(
      {{"a", 1, 10.0}, {"a", 0, 1.0}, {"a", 0, 2.0}, {"a", 0, 3.0}});
  const auto report = exact_match_impute(t);
  CHECK(report.units[0].imputed == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(report.units[0].match_count == 3);
}

TEST_CASE("caliper matching filters by standardised distance") {
  // Covariate sd over {0, 0.1, 5} drives the standardisation; radius picked
  // so only the near unit matches.
  const PomTable t =
      real_table({{0.0, 1, 1.0}, {0.1, 0, 4.0}, {5.0, 0, 9.0}});
  double sd;
  {
    const double mean = (0.0 + 0.1 + 5.0) / 3.0;
    const double var = ((0.0 - mean) * (0.0 - mean) +
                        (0.1 - mean) * (0.1 - mean) +
                        (5.0 - mean) * (5.0 - mean)) / 2.0;
    sd = std::sqrt(var);
  }
  const auto report = caliper_match_impute(t, 0.5);
  // Unit u0 at distance 0.1/sd ~ 0.035 matches u1 only.
  CHECK(0.1 / sd <= 0.5);
  CHECK(5.0 / sd > 0.5);
  CHECK(report.units[0].match_count == 1);
  CHECK(report.units[0].imputed == 4.0);
}

TEST_CASE("caliper radius monotonicity") {
  Rng rng(71);
  std::vector<std::tuple<double, int, double>> entries;
  for (int i = 0; i < 30; ++i) {
    entries.push_back({rng.uniform(-3, 3), static_cast<int>(rng.below(2)),
                       rng.uniform(0, 1)});
  }
  const PomTable t = real_table(entries);
  const auto small = caliper_match_impute(t, 0.25);
  const auto medium = caliper_match_impute(t, 1.0);
  const auto large = caliper_match_impute(t, 1e9);
  double opposite_mean[2] = {0, 0};
  std::size_t opposite_count[2] = {0, 0};
  for (const auto& row : t.rows()) {
    opposite_mean[row.treatment] += row.outcome;
    ++opposite_count[row.treatment];
  }
  for (std::size_t i = 0; i < t.rows().size(); ++i) {
    CHECK(small.units[i].match_count <= medium.units[i].match_count);
    CHECK(medium.units[i].match_count <= large.units[i].match_count);
    // An unbounded radius recovers the opposite-arm global mean.
    const int other = 1 - t.rows()[i].treatment;
    CHECK(*large.units[i].imputed ==
          doctest::Approx(opposite_mean[other] /
                          static_cast<double>(opposite_count[other]))
              .epsilon(1e-12));
  }
}

TEST_CASE("a radius below the minimum spacing matches nothing") {
  const PomTable t = real_table({{0.0, 1, 1.0}, {10.0, 0, 2.0}});
  const auto report = caliper_match_impute(t, 1e-6);
  for (const auto& u : report.units) CHECK(u.match_count == 0);
  CHECK_THROWS_AS(caliper_match_impute(t, 0.0), QueryError);
}

TEST_CASE("zero-variance dimensions are dropped and reported") {
  std::vector<PomRow> rows;
  for (int i = 0; i < 4; ++i) {
    PomRow r;
    r.unit = "u" + std::to_string(i);
    r.covariates.emplace_back(static_cast<double>(i));
    r.covariates.emplace_back(7.0);  // constant dimension
    r.treatment = i % 2;
    r.outcome = i;
    rows.push_back(std::move(r));
  }
  const PomTable t(
      {{"x1", CovariateKind::Real}, {"x2", CovariateKind::Real}}, rows);
  const auto report = caliper_match_impute(t, 1.0);
  REQUIRE(report.dropped_dimensions.size() == 1);
  CHECK(report.dropped_dimensions[0] == "x2");
}

TEST_CASE("ate on a Y = T + X generator is exactly one") {
  std::vector<std::tuple<std::string, int, double>> entries;
  for (int x = 0; x < 3; ++x) {
    for (int rep = 0; rep < 4; ++rep) {
      entries.push_back({std::to_string(x), 1, 1.0 + x});
      entries.push_back({std::to_string(x), 0, 0.0 + x});
    }
  }
  const AteResult r = ate(categorical_table(entries));
  CHECK(r.ate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.excluded.empty());
}

TEST_CASE("ate is zero when outcomes ignore treatment within strata") {
  const AteResult r = ate(categorical_table({{"a", 1, 2.0},
                                             {"a", 0, 2.0},
                                             {"b", 1, 5.0},
                                             {"b", 0, 5.0}}));
  CHECK(r.ate == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a single stratum collapses to the arm-mean difference") {
  const AteResult r = ate(categorical_table(
      {{"a", 1, 4.0}, {"a", 1, 6.0}, {"a", 0, 1.0}, {"a", 0, 3.0}}));
  CHECK(r.e_y1 == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(r.e_y0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.ate == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("violating strata are excluded and reported") {
  const AteResult r = ate(categorical_table({{"a", 1, 4.0},
                                             {"a", 0, 1.0},
                                             {"broken", 1, 100.0},
                                             {"broken", 1, 200.0}}));
  REQUIRE(r.excluded.size() == 1);
  CHECK(r.excluded[0].stratum == "broken");
  CHECK(r.ate == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.excluded_weight == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("att identity on a hand fixture") {
  // ATT = mean over treated of (observed - imputed counterfactual), which
  // for exact matching equals the stratified treated-weighted difference.
  const PomTable t = categorical_table({{"a", 1, 5.0},
                                        {"a", 0, 2.0},
                                        {"a", 0, 4.0},
                                        {"b", 1, 1.0},
                                        {"b", 1, 3.0},
                                        {"b", 0, 1.0}});
  const auto report = exact_match_impute(t);
  double att = 0.0;
  std::size_t treated = 0;
  for (std::size_t i = 0; i < t.rows().size(); ++i) {
    if (t.rows()[i].treatment != 1) continue;
    ++treated;
    att += t.rows()[i].outcome - *report.units[i].imputed;
  }
  att /= static_cast<double>(treated);
  // Stratum a: treated mean 5, control mean 3 -> diff 2 (1 treated unit).
  // Stratum b: treated mean 2, control mean 1 -> diff 1 (2 treated units).
  CHECK(att == doctest::Approx((2.0 * 1 + 1.0 * 2) / 3.0).epsilon(1e-12));
}

TEST_CASE("adjusted expectation matches the interventional oracle") {
  const CptModel m = confounded_cpt();
  for (const std::string t_value : {"0", "1"}) {
    const double adjusted =
        adjusted_expectation(m, "T", "Y", {"X"}, t_value);
    const auto oracle = interventional_oracle(m, {{"T", t_value}}, "Y");
    double expected = 0.0;
    for (const auto& [value, p] : oracle) expected += std::stod(value) * p;
    CHECK(std::abs(adjusted - expected) <= 1e-12);
  }
}

TEST_CASE("empty adjustment set reduces to a plain conditional mean") {
  // Chain T -> Y has no back-door path.
  const Dag g({"T", "Y"}, {{"T", "Y"}});
  std::map<std::string, std::vector<std::string>> domains{
      {"T", {"0", "1"}}, {"Y", {"0", "1"}}};
  std::map<std::string, std::vector<CptRow>> tables;
  tables["T"] = {{{}, {0.5, 0.5}}};
  tables["Y"] = {{{{"T", "0"}}, {0.7, 0.3}}, {{{"T", "1"}}, {0.15, 0.85}}};
  const CptModel m(g, std::move(domains), std::move(tables));
  CHECK(adjusted_expectation(m, "T", "Y", {}, "1") ==
        doctest::Approx(0.85).epsilon(1e-12));
}

TEST_CASE("an outcome independent of everything has a flat expectation") {
  const Dag g({"T", "Y"}, {});
  std::map<std::string, std::vector<std::string>> domains{
      {"T", {"0", "1"}}, {"Y", {"0", "1"}}};
  std::map<std::string, std::vector<CptRow>> tables;
  tables["T"] = {{{}, {0.5, 0.5}}};
  tables["Y"] = {{{}, {0.4, 0.6}}};
  const CptModel m(g, std::move(domains), std::move(tables));
  CHECK(adjusted_expectation(m, "T", "Y", {}, "0") ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(adjusted_expectation(m, "T", "Y", {}, "1") ==
        doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("adjusted expectation validates the adjustment set and domain") {
  const CptModel m = confounded_cpt();
  // Empty set fails the criterion on the confounded structure.
  CHECK_THROWS_AS(adjusted_expectation(m, "T", "Y", {}, "1"), QueryError);

  // Non-numeric outcome domain.
  const Dag g({"T", "Y"}, {{"T", "Y"}});
  std::map<std::string, std::vector<std::string>> domains{
      {"T", {"0", "1"}}, {"Y", {"lo", "hi"}}};
  std::map<std::string, std::vector<CptRow>> tables;
  tables["T"] = {{{}, {0.5, 0.5}}};
  tables["Y"] = {{{{"T", "0"}}, {0.7, 0.3}}, {{{"T", "1"}}, {0.15, 0.85}}};
  const CptModel labels(g, std::move(domains), std::move(tables));
  CHECK_THROWS_WITH_AS(adjusted_expectation(labels, "T", "Y", {}, "1"),
                       doctest::Contains("not numeric"), QueryError);
}

TEST_CASE("matching estimates track the adjusted expectation on samples") {
  const CptModel m = confounded_cpt();
  const auto rows = m.simulate(20000, 4242);
  const PomTable table = pom_from_simulation(rows, "T", "Y", {"X"});
  const AteResult estimate = ate(table);
  const double e1 = adjusted_expectation(m, "T", "Y", {"X"}, "1");
  const double e0 = adjusted_expectation(m, "T", "Y", {"X"}, "0");
  CHECK(std::abs(estimate.e_y1 - e1) <= 3.0 * estimate.se_y1);
  CHECK(std::abs(estimate.e_y0 - e0) <= 3.0 * estimate.se_y0);
}
