#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "causal/error.hpp"
#include "causal/oracle.hpp"
#include "causal/scm.hpp"
#include "support/fixtures.hpp"

using namespace causal;
using namespace causal::testing;

TEST_CASE("evaluate propagates noise through the structural functions") {
  const LinearScm m = triangle_scm();
  const Assignment x = m.evaluate({{"X1", 0.5}, {"X2", 0.75}, {"X3", 0.75}});
  CHECK(x.at("X1") == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(x.at("X2") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x.at("X3") == doctest::Approx(1.5).epsilon(1e-15));

  const Assignment zero = m.evaluate({{"X1", 0.0}, {"X2", 0.0}, {"X3", 0.0}});
  for (const auto& [node, v] : zero) CHECK(v == 0.0);

  // u = (1, 0, 0): x2 = 0.5, x3 = 0.7 + 0.4 * 0.5 = 0.9.
  const Assignment e1 = m.evaluate({{"X1", 1.0}, {"X2", 0.0}, {"X3", 0.0}});
  CHECK(e1.at("X2") == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e1.at("X3") == doctest::Approx(0.9).epsilon(1e-15));

  CHECK_THROWS_AS(m.evaluate({{"X1", 1.0}}), ModelError);
}

TEST_CASE("abduct inverts evaluate") {
  const LinearScm m = triangle_scm();
  const Assignment u = m.abduct({{"X1", 0.5}, {"X2", 1.0}, {"X3", 1.5}});
  CHECK(u.at("X1") == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(u.at("X2") == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(u.at("X3") == doctest::Approx(0.75).epsilon(1e-15));

  const Assignment zero = m.abduct({{"X1", 0.0}, {"X2", 0.0}, {"X3", 0.0}});
  for (const auto& [node, v] : zero) CHECK(v == 0.0);
  CHECK_THROWS_AS(m.abduct({{"X1", 0.0}}), ModelError);
}

TEST_CASE("abduction round-trips on random observations") {
  Rng rng(31);
  const LinearScm m = triangle_scm();
  for (int i = 0; i < 50; ++i) {
    Assignment x{{"X1", rng.uniform(-5, 5)},
                 {"X2", rng.uniform(-5, 5)},
                 {"X3", rng.uniform(-5, 5)}};
    const Assignment u = m.abduct(x);
    const Assignment back = m.evaluate(u);
    for (const auto& [node, v] : x) {
      CHECK(back.at(node) == doctest::Approx(v).epsilon(1e-12));
    }
    // And the other composition order on noise space.
    const Assignment u2 = m.abduct(m.evaluate(u));
    for (const auto& [node, v] : u) {
      CHECK(u2.at(node) == doctest::Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("intervention performs graph surgery and pins constants") {
  const LinearScm m = triangle_scm();
  const LinearScm cut = m.intervene({{"X2", 2.0}});
  CHECK_FALSE(cut.graph().has_edge("X1", "X2"));
  CHECK(cut.graph().has_edge("X1", "X3"));
  CHECK(cut.graph().has_edge("X2", "X3"));
  CHECK(cut.is_forced("X2"));
  CHECK(cut.forced_value("X2") == 2.0);
  // Non-intervened mechanisms are untouched.
  CHECK(cut.coeff("X1", "X3") == m.coeff("X1", "X3"));
  CHECK(cut.coeff("X2", "X3") == m.coeff("X2", "X3"));
  CHECK(cut.noise("X3").mean == m.noise("X3").mean);

  const LinearScm root = m.intervene({{"X1", 1.0}});
  CHECK(root.graph().edge_count() == m.graph().edge_count());

  const LinearScm all = m.intervene({{"X1", 0.}, {"X2", 0.}, {"X3", 0.}});
  CHECK(all.graph().edge_count() == 0);
}

TEST_CASE("counterfactual reproduces the worked ladder numbers") {
  const LinearScm m = triangle_scm();
  const Assignment observed{{"X1", 0.5}, {"X2", 1.0}, {"X3", 1.5}};
  const Assignment world = m.counterfactual(observed, {{"X2", 2.0}});
  CHECK(world.at("X3") == doctest::Approx(1.9).epsilon(1e-14));
  CHECK(world.at("X1") == 0.5);
  CHECK(world.at("X2") == 2.0);
}

TEST_CASE("counterfactual with the observed value is the identity") {
  const LinearScm m = triangle_scm();
  const Assignment observed{{"X1", 0.5}, {"X2", 1.0}, {"X3", 1.5}};
  const Assignment same = m.counterfactual(observed, {{"X2", 1.0}});
  CHECK(same.at("X1") == observed.at("X1"));
  CHECK(same.at("X2") == observed.at("X2"));
  CHECK(same.at("X3") == observed.at("X3"));
}

TEST_CASE("intervening a sink leaves the other nodes untouched") {
  const LinearScm m = triangle_scm();
  const Assignment observed{{"X1", 0.5}, {"X2", 1.0}, {"X3", 1.5}};
  const Assignment world = m.counterfactual(observed, {{"X3", 7.0}});
  CHECK(world.at("X1") == 0.5);
  CHECK(world.at("X2") == 1.0);
  CHECK(world.at("X3") == 7.0);
}

TEST_CASE("counterfactual equals evaluate-after-abduct") {
  Rng rng(32);
  const LinearScm m = triangle_scm();
  for (int i = 0; i < 30; ++i) {
    const Assignment observed{{"X1", rng.uniform(-3, 3)},
                              {"X2", rng.uniform(-3, 3)},
                              {"X3", rng.uniform(-3, 3)}};
    const double v = rng.uniform(-3, 3);
    const Assignment direct = m.counterfactual(observed, {{"X2", v}});
    const LinearScm cut = m.intervene({{"X2", v}});
    const Assignment composed = cut.evaluate(m.abduct(observed));
    for (const auto& [node, value] : direct) {
      CHECK(value == doctest::Approx(composed.at(node)).epsilon(1e-12));
    }
  }
}

TEST_CASE("consistency: forcing the observed value is bit-exact") {
  Rng rng(33);
  for (int trial = 0; trial < 40; ++trial) {
    const Dag g = random_dag(rng, 3, 8);
    LinearScm::CoeffMap coeff;
    for (const auto& [from, to] : g.edges()) {
      coeff[{from, to}] = rng.uniform(-1.5, 1.5);
    }
    const LinearScm m(g, coeff);
    Assignment observed;
    for (const auto& node : g.nodes()) observed[node] = rng.uniform(-10, 10);
    for (const auto& node : g.nodes()) {
      const Assignment world =
          m.counterfactual(observed, {{node, observed.at(node)}});
      for (const auto& [other, value] : observed) {
        CHECK(world.at(other) == value);  // exact, not approximate
      }
    }
  }
}

TEST_CASE("modularity: untouched mechanisms compare equal after surgery") {
  Rng rng(34);
  const Dag g = random_dag(rng, 4, 7);
  LinearScm::CoeffMap coeff;
  for (const auto& [from, to] : g.edges()) {
    coeff[{from, to}] = rng.uniform(-2, 2);
  }
  const LinearScm m(g, coeff);
  const auto& nodes = g.nodes();
  const std::string pick = nodes[rng.below(nodes.size())];
  const LinearScm cut = m.intervene({{pick, 3.25}});
  for (const auto& node : nodes) {
    if (node == pick) continue;
    for (const auto& parent : g.parents(node)) {
      CHECK(cut.coeff(parent, node) == m.coeff(parent, node));
    }
    CHECK(cut.noise(node).mean == m.noise(node).mean);
    CHECK(cut.noise(node).stddev == m.noise(node).stddev);
  }
}

TEST_CASE("cpt intervention keeps rows normalised and tables bit-identical") {
  const CptModel m = confounded_cpt();
  const CptModel cut = m.intervene({{"T", "1"}});
  CHECK_FALSE(cut.graph().has_edge("X", "T"));
  CHECK(cut.table("Y") == m.table("Y"));
  CHECK(cut.table("X") == m.table("X"));
  CHECK(cut.table("T") == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(m.intervene({{"T", "5"}}), ModelError);
}

TEST_CASE("simulate is deterministic and honours zero variance") {
  const LinearScm m = triangle_scm();
  const auto a = m.simulate(20, 99);
  const auto b = m.simulate(20, 99);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (const auto& [node, v] : a[i]) CHECK(b[i].at(node) == v);
  }

  const LinearScm quiet(
      triangle_dag(),
      {{{"X1", "X2"}, 0.5}, {{"X1", "X3"}, 0.7}, {{"X2", "X3"}, 0.4}},
      {{"X1", {"U1", 2.0, 0.0}}, {"X2", {"U2", 0.0, 0.0}},
       {"X3", {"U3", 0.0, 0.0}}});
  const auto rows = quiet.simulate(5, 1);
  const Assignment at_mean =
      quiet.evaluate({{"X1", 2.0}, {"X2", 0.0}, {"X3", 0.0}});
  for (const auto& row : rows) {
    for (const auto& [node, v] : row) CHECK(v == at_mean.at(node));
  }
  CHECK_THROWS_AS(m.simulate(0, 1), ModelError);
  CHECK_THROWS_AS(
      LinearScm(triangle_dag(),
                {{{"X1", "X2"}, 0.5}, {{"X1", "X3"}, 0.7}, {{"X2", "X3"}, 0.4}},
                {{"X1", {"U1", 0.0, -1.0}}}),
      ModelError);
}

TEST_CASE("cpt simulation matches exact marginals within 5 standard errors") {
  const CptModel m = confounded_cpt();
  const std::size_t n = 1000;
  const auto rows = m.simulate(n, 7);
  const JointTable joint = enumerate_joint(m);
  for (const auto& node : m.graph().nodes()) {
    const auto exact = joint.marginal(node);
    std::map<std::string, double> freq;
    for (const auto& row : rows) freq[row.at(node)] += 1.0;
    for (auto& [value, count] : freq) count /= static_cast<double>(n);
    for (const auto& [value, p] : exact) {
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      CHECK(std::abs(freq[value] - p) <= 5.0 * se + 1e-12);
    }
  }
  // Same seed twice gives identical datasets.
  const auto again = m.simulate(50, 12345);
  const auto again2 = m.simulate(50, 12345);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i] == again2[i]);
  }
}

TEST_CASE("fit_linear runs least squares per node") {
  // Single edge T -> Y on the four-point extrapolation data. The least
  // squares solution solves S_xy / S_xx = 3/5 with matching intercept;
  // derived by hand from the normal equations.
  const Dag g({"T", "Y"}, {{"T", "Y"}});
  std::vector<Assignment> data{{{"T", 0.0}, {"Y", 0.5}},
                               {{"T", 1.0}, {"Y", 1.0}},
                               {{"T", 2.0}, {"Y", 2.5}},
                               {{"T", 3.0}, {"Y", 2.0}}};
  const LinearScm fit = fit_linear(data, g);
  CHECK(fit.coeff("T", "Y") == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(fit.noise("Y").mean == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("fit_linear recovers exact linear data with zero residual") {
  const Dag g({"T", "Y"}, {{"T", "Y"}});
  std::vector<Assignment> data;
  for (double t : {0.0, 1.0, 2.0, 3.0}) {
    data.push_back({{"T", t}, {"Y", 0.5 * t + 0.5}});
  }
  const LinearScm fit = fit_linear(data, g);
  CHECK(fit.coeff("T", "Y") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.noise("Y").mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.noise("Y").stddev == doctest::Approx(0.0).epsilon(1e-9));
  // Plug-in prediction at the noise means under do(T = 4).
  const Assignment pred = fit.mean_prediction({{"T", 4.0}});
  CHECK(pred.at("Y") == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("fit_linear handles constant outcomes and rank deficiency") {
  const Dag g({"T", "Y"}, {{"T", "Y"}});
  std::vector<Assignment> constant{{{"T", 0.0}, {"Y", 3.0}},
                                   {{"T", 1.0}, {"Y", 3.0}},
                                   {{"T", 2.0}, {"Y", 3.0}},
                                   {{"T", 3.0}, {"Y", 3.0}}};
  const LinearScm fit = fit_linear(constant, g);
  CHECK(fit.coeff("T", "Y") == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.noise("Y").mean == doctest::Approx(3.0).epsilon(1e-12));

  std::vector<Assignment> degenerate{{{"T", 1.0}, {"Y", 1.0}},
                                     {{"T", 1.0}, {"Y", 2.0}},
                                     {{"T", 1.0}, {"Y", 3.0}}};
  CHECK_THROWS_WITH_AS(fit_linear(degenerate, g),
                       doctest::Contains("rank-deficient"), ModelError);
  CHECK_THROWS_AS(fit_linear({{{"T", 1.0}, {"Y", 1.0}}}, g), ModelError);
}

TEST_CASE("fit_linear recovers an equation whose noise vanishes") {
  // Upstream nodes keep real variation so the design stays full rank; the
  // sink equation itself is noiseless and must be recovered exactly.
  const Dag g = triangle_dag();
  LinearScm truth(
      g, {{{"X1", "X2"}, 0.5}, {{"X1", "X3"}, 0.7}, {{"X2", "X3"}, 0.4}},
      {{"X1", {"U1", 0.3, 1.0}},
       {"X2", {"U2", -0.2, 0.7}},
       {"X3", {"U3", 0.1, 0.0}}});
  const auto data = truth.simulate(200, 77);
  const LinearScm fit = fit_linear(data, g);
  CHECK(fit.coeff("X1", "X3") == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(fit.coeff("X2", "X3") == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(std::abs(fit.noise("X3").mean - 0.1) < 1e-9);
  CHECK(fit.noise("X3").stddev < 1e-7);
  // The noisy equations are recovered to sampling accuracy only.
  CHECK(fit.coeff("X1", "X2") == doctest::Approx(0.5).epsilon(0.5));
}

TEST_CASE("discrete unit-level counterfactuals are rejected distinctly") {
  const CptModel m = confounded_cpt();
  CHECK_THROWS_AS(m.counterfactual({{"X", "0"}}, {{"T", "1"}}),
                  UnsupportedError);
}

TEST_CASE("cpt validation names the offending node and row") {
  std::map<std::string, std::vector<std::string>> domains{{"A", {"0", "1"}}};
  std::map<std::string, std::vector<CptRow>> tables;
  tables["A"] = {{{}, {0.5, 0.4}}};
  CHECK_THROWS_WITH_AS(CptModel(Dag({"A"}, {}), domains, tables),
                       doctest::Contains("sums to"), ModelError);
}
