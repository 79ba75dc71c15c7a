#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "dot/error.hpp"
#include "dot/measure.hpp"
#include "dot/numerics.hpp"

namespace dot {

// Dense coupling matrix between two discrete measures, with the dual prices
// that certify its optimality.
struct TransportPlan {
  std::size_t rows = 0, cols = 0;
  std::vector<double> mass;  // rows x cols, row-major
  std::vector<double> row_price, col_price;

  double& at(std::size_t i, std::size_t j) { return mass[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }
};

namespace detail {

// Exact transportation LP via successive shortest paths with potentials
// (uncapacitated bipartite min-cost flow).  Invariants maintained per
// augmentation: c_ij - u_i - v_j >= 0 everywhere, and mass_ij > 0 only on
// tight arcs, i.e., the complementary-slackness certificate.  Dijkstra ties
// break on node index, so the plan is deterministic.
inline TransportPlan solve_transport(const std::vector<double>& cost, std::size_t m,
                                     std::size_t n, const std::vector<double>& supply,
                                     const std::vector<double>& demand) {
  TransportPlan plan;
  plan.rows = m;
  plan.cols = n;
  plan.mass.assign(m * n, 0.0);
  plan.row_price.assign(m, 0.0);
  plan.col_price.assign(n, 0.0);

  std::vector<double> rem_supply = supply;
  std::vector<double> rem_demand = demand;
  std::vector<double>& u = plan.row_price;
  std::vector<double>& v = plan.col_price;

  const double mass_floor = 1e-15;  // residual dust threshold
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t guard = 60 * (m + n) + 64;

  std::vector<double> dist(m + n);
  std::vector<int> parent(m + n);
  std::vector<char> done(m + n);

  std::size_t round = 0;
  for (; round < guard; ++round) {
    bool have_supply = false;
    for (std::size_t i = 0; i < m; ++i)
      if (rem_supply[i] > mass_floor) {
        have_supply = true;
        break;
      }
    if (!have_supply) break;

    // multi-source Dijkstra on the residual graph (rows: [0,m), cols: [m,m+n))
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (std::size_t i = 0; i < m; ++i)
      if (rem_supply[i] > mass_floor) {
        dist[i] = 0.0;
        pq.emplace(0.0, i);
      }
    while (!pq.empty()) {
      auto [d, node] = pq.top();
      pq.pop();
      if (done[node]) continue;
      done[node] = 1;
      if (node < m) {
        const std::size_t i = node;
        for (std::size_t j = 0; j < n; ++j) {
          const double rc = std::max(0.0, cost[i * n + j] - u[i] - v[j]);
          if (d + rc < dist[m + j]) {
            dist[m + j] = d + rc;
            parent[m + j] = static_cast<int>(i);
            pq.emplace(dist[m + j], m + j);
          }
        }
      } else {
        const std::size_t j = node - m;
        for (std::size_t i = 0; i < m; ++i) {
          if (plan.mass[i * n + j] <= mass_floor) continue;
          // mass-carrying arcs are tight, so the reverse length is zero
          if (d < dist[i]) {
            dist[i] = d;
            parent[i] = static_cast<int>(m + j);
            pq.emplace(dist[i], i);
          }
        }
      }
    }

    // nearest column with remaining demand
    std::size_t sink = n;
    double best = inf;
    for (std::size_t j = 0; j < n; ++j) {
      if (rem_demand[j] > mass_floor && dist[m + j] < best) {
        best = dist[m + j];
        sink = j;
      }
    }
    if (sink == n) break;

    // dual update: shifts capped at the sink distance keep all reduced
    // costs nonnegative and make the chosen path tight
    for (std::size_t i = 0; i < m; ++i)
      if (dist[i] < inf) u[i] -= std::min(dist[i], best);
    for (std::size_t j = 0; j < n; ++j)
      if (dist[m + j] < inf) v[j] += std::min(dist[m + j], best);

    // bottleneck along the path (backward arcs and the source supply)
    double amount = rem_demand[sink];
    std::size_t source_row;
    {
      std::size_t node = m + sink;
      while (parent[node] >= 0) {
        const std::size_t par = static_cast<std::size_t>(parent[node]);
        if (node < m) amount = std::min(amount, plan.mass[node * n + (par - m)]);
        node = par;
      }
      source_row = node;
      amount = std::min(amount, rem_supply[source_row]);
    }
    if (!(amount > 0.0)) break;

    {
      std::size_t node = m + sink;
      while (parent[node] >= 0) {
        const std::size_t par = static_cast<std::size_t>(parent[node]);
        if (node >= m)
          plan.mass[par * n + (node - m)] += amount;
        else
          plan.mass[node * n + (par - m)] -= amount;
        node = par;
      }
    }
    rem_supply[source_row] -= amount;
    rem_demand[sink] -= amount;
  }

  double leftover = 0.0;
  for (double s : rem_supply) leftover = std::max(leftover, s);
  if (leftover > 1e-9)
    throw numeric_error("transportation solver failed to drain supply (leftover " +
                        std::to_string(leftover) + ")");
  return plan;
}

}  // namespace detail

struct WassersteinResult {
  double value = 0.0;  // (sum d^p mass)^(1/p)
  TransportPlan plan;
};

// Exact W_p between discrete measures (1 <= p < inf).
inline WassersteinResult wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     double p, std::size_t max_side = 500) {
  if (mu.dim() != nu.dim()) throw config_error("wasserstein: ambient dimension mismatch");
  if (!(p >= 1.0) || !std::isfinite(p)) throw config_error("wasserstein: requires 1 <= p < inf");
  if (mu.size() > max_side || nu.size() > max_side)
    throw capacity_error("wasserstein: support exceeds limit of " + std::to_string(max_side));

  const std::size_t m = mu.size(), n = nu.size();
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = std::pow(euclidean_dist(mu.point(i), nu.point(j)), p);

  WassersteinResult res;
  res.plan = detail::solve_transport(cost, m, n, mu.weights(), nu.weights());
  KahanSum s;
  for (std::size_t k = 0; k < m * n; ++k) s.add(cost[k] * res.plan.mass[k]);
  res.value = std::pow(std::max(0.0, s.value()), 1.0 / p);
  return res;
}

// W_p(mu; mu~) = (sum_i W_p(mu_i, mu~_i)^p)^(1/p); the Delta of the
// stability bound.
inline double marginal_tuple_distance(const MarginalTuple& a, const MarginalTuple& b, double p,
                                      std::size_t max_side = 500) {
  if (a.count() != b.count()) throw config_error("marginal tuples differ in N");
  KahanSum s;
  for (std::size_t i = 0; i < a.count(); ++i) {
    if (a.marginal(i).dim() != b.marginal(i).dim())
      throw config_error("marginal tuples differ in slot dimension");
    s.add(std::pow(wasserstein(a.marginal(i), b.marginal(i), p, max_side).value, p));
  }
  return std::pow(s.value(), 1.0 / p);
}

}  // namespace dot
