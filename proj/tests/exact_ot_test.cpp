#include "dot/exact_ot.hpp"

#include "dot/coupling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dot/rng.hpp"
#include "oracles.hpp"

using dot::DiscreteMeasure;
using dot::MarginalTuple;

namespace {

DiscreteMeasure random_measure(dot::Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> pts;
  std::vector<double> w(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(d);
    for (auto& c : p) c = rng.uniform01();
    pts.push_back(std::move(p));
    w[i] = 0.1 + rng.uniform01();
    s += w[i];
  }
  for (auto& x : w) x /= s;
  // renormalize the dust so the sum is exactly 1 within 1e-12
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) acc += w[i];
  w[n - 1] = 1.0 - acc;
  return DiscreteMeasure(std::move(pts), std::move(w));
}

// feasibility residuals of a plan against its prescribed marginals
double plan_residual(const dot::TransportPlan& plan, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu) {
  double r = 0.0;
  for (std::size_t i = 0; i < plan.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < plan.cols; ++j) s += plan.at(i, j);
    r = std::max(r, std::abs(s - mu.weight(i)));
  }
  for (std::size_t j = 0; j < plan.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < plan.rows; ++i) s += plan.at(i, j);
    r = std::max(r, std::abs(s - nu.weight(j)));
  }
  return r;
}

double plan_cost(const dot::TransportPlan& plan, const DiscreteMeasure& mu,
                 const DiscreteMeasure& nu, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j)
      s += std::pow(dot::euclidean_dist(mu.point(i), nu.point(j)), p) * plan.at(i, j);
  return s;
}

}  // namespace

TEST(ExactOt, IdenticalMeasuresGiveZero) {
  dot::Rng rng(5);
  const auto mu = random_measure(rng, 6, 2);
  const auto res = dot::wasserstein(mu, mu, 2.0);
  EXPECT_NEAR(res.value, 0.0, 1e-12);
  // diagonal coupling
  for (std::size_t i = 0; i < mu.size(); ++i)
    EXPECT_NEAR(res.plan.at(i, i), mu.weight(i), 1e-12);
}

TEST(ExactOt, DiracToDirac) {
  const auto a = DiscreteMeasure::dirac({0.0, 0.0});
  const auto b = DiscreteMeasure::dirac({3.0, 4.0});
  const auto res = dot::wasserstein(a, b, 1.0);
  EXPECT_NEAR(res.value, 5.0, 1e-12);
  EXPECT_NEAR(res.plan.at(0, 0), 1.0, 1e-15);
}

TEST(ExactOt, MatchesPermutationEnumerationOn5x5) {
  dot::Rng rng(17);
  for (int inst = 0; inst < 5; ++inst) {
    const std::size_t n = 5;
    std::vector<std::vector<double>> pa, pb;
    for (std::size_t i = 0; i < n; ++i) pa.push_back({rng.uniform01(), rng.uniform01()});
    for (std::size_t i = 0; i < n; ++i) pb.push_back({rng.uniform01(), rng.uniform01()});
    std::vector<double> w(n, 1.0 / n);
    const DiscreteMeasure mu(pa, w), nu(pb, w);

    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cost[i * n + j] = dot::sqr(dot::euclidean_dist(mu.point(i), nu.point(j)));

    const double brute = oracles::permutation_ot_value(cost, n);
    const auto res = dot::wasserstein(mu, nu, 2.0);
    EXPECT_NEAR(std::pow(res.value, 2.0), brute, 1e-9 * std::max(1.0, brute));
  }
}

TEST(ExactOt, FeasibilityAndComplementarySlackness) {
  dot::Rng rng(23);
  for (int inst = 0; inst < 10; ++inst) {
    const auto mu = random_measure(rng, 4 + rng.uniform_index(10), 2);
    const auto nu = random_measure(rng, 4 + rng.uniform_index(10), 2);
    const auto res = dot::wasserstein(mu, nu, 2.0);
    EXPECT_LE(plan_residual(res.plan, mu, nu), 1e-10);

    // dual feasibility u_i + v_j <= c_ij and tightness on the support
    double worst_infeas = 0.0, worst_slack = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      for (std::size_t j = 0; j < nu.size(); ++j) {
        const double c = dot::sqr(dot::euclidean_dist(mu.point(i), nu.point(j)));
        const double rc = c - res.plan.row_price[i] - res.plan.col_price[j];
        worst_infeas = std::min(worst_infeas, rc);
        if (res.plan.at(i, j) > 1e-12) worst_slack = std::max(worst_slack, std::abs(rc));
      }
    EXPECT_GE(worst_infeas, -1e-9);
    EXPECT_LE(worst_slack, 1e-9);

    // strong duality: dual objective equals the plan cost
    double dual = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) dual += res.plan.row_price[i] * mu.weight(i);
    for (std::size_t j = 0; j < nu.size(); ++j) dual += res.plan.col_price[j] * nu.weight(j);
    EXPECT_NEAR(dual, plan_cost(res.plan, mu, nu, 2.0), 1e-9);
  }
}

TEST(ExactOt, BeatsRandomFeasiblePlans) {
  dot::Rng rng(31);
  const auto mu = random_measure(rng, 7, 2);
  const auto nu = random_measure(rng, 9, 2);
  const auto res = dot::wasserstein(mu, nu, 2.0);
  const double opt = plan_cost(res.plan, mu, nu, 2.0);

  for (int t = 0; t < 100; ++t) {
    // random greedy fill over a shuffled cell order gives a feasible plan
    std::vector<std::size_t> cells(mu.size() * nu.size());
    std::iota(cells.begin(), cells.end(), 0);
    for (std::size_t k = cells.size(); k > 1; --k)
      std::swap(cells[k - 1], cells[rng.uniform_index(k)]);
    std::vector<double> row = mu.weights(), col = nu.weights();
    dot::TransportPlan plan;
    plan.rows = mu.size();
    plan.cols = nu.size();
    plan.mass.assign(cells.size(), 0.0);
    for (std::size_t c : cells) {
      const std::size_t i = c / nu.size(), j = c % nu.size();
      const double m = std::min(row[i], col[j]);
      if (m > 0) {
        plan.mass[c] = m;
        row[i] -= m;
        col[j] -= m;
      }
    }
    EXPECT_LE(plan_residual(plan, mu, nu), 1e-9);
    EXPECT_LE(opt, plan_cost(plan, mu, nu, 2.0) + 1e-9);
  }
}

TEST(ExactOt, TriangleInequality) {
  dot::Rng rng(41);
  for (int inst = 0; inst < 20; ++inst) {
    const auto a = random_measure(rng, 5, 2);
    const auto b = random_measure(rng, 6, 2);
    const auto c = random_measure(rng, 7, 2);
    for (double p : {1.0, 2.0}) {
      const double ab = dot::wasserstein(a, b, p).value;
      const double bc = dot::wasserstein(b, c, p).value;
      const double ac = dot::wasserstein(a, c, p).value;
      EXPECT_LE(ac, ab + bc + 1e-9);
    }
  }
}

TEST(ExactOt, DimensionMismatchAndCapacity) {
  const auto a = DiscreteMeasure::dirac({0.0});
  const auto b = DiscreteMeasure::dirac({0.0, 0.0});
  EXPECT_THROW(dot::wasserstein(a, b, 2.0), dot::config_error);
  const auto big = DiscreteMeasure::uniform_line(600);
  EXPECT_THROW(dot::wasserstein(big, big, 2.0), dot::capacity_error);
}

TEST(ExactOt, TupleDistanceOfTranslates) {
  dot::Rng rng(51);
  const auto a = random_measure(rng, 6, 2);
  std::vector<std::vector<double>> shifted_a, shifted_b;
  const auto b = random_measure(rng, 5, 2);
  for (std::size_t i = 0; i < a.size(); ++i)
    shifted_a.push_back({a.point(i)[0] + 0.125, a.point(i)[1]});
  for (std::size_t i = 0; i < b.size(); ++i)
    shifted_b.push_back({b.point(i)[0], b.point(i)[1] - 0.25});
  const DiscreteMeasure ta(shifted_a, a.weights());
  const DiscreteMeasure tb(shifted_b, b.weights());

  MarginalTuple t1({a, b}), t2({ta, tb});
  EXPECT_NEAR(dot::marginal_tuple_distance(t1, t1, 2.0), 0.0, 1e-12);
  // translations: W_2(mu_i, translate) = |t_i|, aggregate in l^2
  const double expect = std::sqrt(dot::sqr(0.125) + dot::sqr(0.25));
  EXPECT_NEAR(dot::marginal_tuple_distance(t1, t2, 2.0), expect, 1e-9);
}

TEST(ExactOt, CouplingDistanceReducesToFlattenedWasserstein) {
  dot::Rng rng(71);
  for (int inst = 0; inst < 5; ++inst) {
    MarginalTuple ta({random_measure(rng, 3, 1), random_measure(rng, 4, 1)}, 2.0);
    MarginalTuple tb({random_measure(rng, 3, 1), random_measure(rng, 4, 1)}, 2.0);
    auto make_coupling = [&](const MarginalTuple& t) {
      std::vector<double> tensor(t.product_size());
      for (auto& v : tensor) v = std::exp(rng.gaussian());
      return dot::ipf_project(std::move(tensor), t, 1e-12);
    };
    const dot::Coupling ca = make_coupling(ta);
    const dot::Coupling cb = make_coupling(tb);
    // d_{X,2} on the product equals the euclidean metric on concatenated
    // coordinates, so W_2 of the flattened measures is an independent route
    const double direct = dot::coupling_distance(ca, cb, 2.0);
    auto flatten = [](const dot::Coupling& c) {
      const auto prod = dot::product(c.marginals());
      std::vector<std::vector<double>> pts;
      std::vector<double> w;
      for (std::size_t f = 0; f < c.mass().size(); ++f)
        if (c.mass()[f] > 0) {
          pts.push_back({prod.point(f).begin(), prod.point(f).end()});
          w.push_back(c.mass()[f]);
        }
      double s = 0;
      for (double x : w) s += x;
      for (auto& x : w) x /= s;
      double acc = 0;
      for (std::size_t i = 0; i + 1 < w.size(); ++i) acc += w[i];
      w[w.size() - 1] = 1.0 - acc;
      return dot::DiscreteMeasure(std::move(pts), std::move(w));
    };
    const double reduced = dot::wasserstein(flatten(ca), flatten(cb), 2.0).value;
    EXPECT_NEAR(direct, reduced, 1e-9);
  }
}

TEST(ExactOt, TupleDistanceCompositionOracle) {
  dot::Rng rng(61);
  const auto a1 = random_measure(rng, 5, 1);
  const auto a2 = random_measure(rng, 6, 1);
  const auto b1 = random_measure(rng, 7, 1);
  const auto b2 = random_measure(rng, 4, 1);
  MarginalTuple ta({a1, a2}), tb({b1, b2});
  const double w1 = dot::wasserstein(a1, b1, 2.0).value;
  const double w2 = dot::wasserstein(a2, b2, 2.0).value;
  EXPECT_NEAR(dot::marginal_tuple_distance(ta, tb, 2.0),
              std::sqrt(w1 * w1 + w2 * w2), 1e-12);
}
