#pragma once

// Independent reference solvers for the tests. They share nothing with the
// library's transport code beyond the surface metric.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "abclab/geometry.hpp"
#include "abclab/measure.hpp"

namespace oracle {

/// Transportation problem by successive shortest paths with Bellman-Ford on
/// the residual graph. Masses are real; each augmentation saturates a
/// supply, a demand or a reverse arc, so the loop terminates.
inline double transport_cost(const std::vector<double>& a, const std::vector<double>& b,
                             const std::vector<std::vector<double>>& cost) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t S = n + m, T = n + m + 1, V = n + m + 2;
  std::vector<double> supply = a, demand = b;
  std::vector<std::vector<double>> flow(n, std::vector<double>(m, 0.0));
  const double tiny = 1e-15;
  const double inf = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100000; ++iter) {
    double left = 0.0;
    for (double s : supply) left += s;
    if (left <= 1e-14) break;
    std::vector<double> d(V, inf);
    std::vector<std::size_t> pred(V, V);
    d[S] = 0.0;
    for (std::size_t round = 0; round < V; ++round) {
      bool changed = false;
      auto relax = [&](std::size_t u, std::size_t v, double w) {
        if (d[u] + w < d[v] - 1e-15) {
          d[v] = d[u] + w;
          pred[v] = u;
          changed = true;
        }
      };
      for (std::size_t i = 0; i < n; ++i)
        if (supply[i] > tiny && d[S] < inf) relax(S, i, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        if (d[i] < inf)
          for (std::size_t j = 0; j < m; ++j) relax(i, n + j, cost[i][j]);
      for (std::size_t j = 0; j < m; ++j)
        if (d[n + j] < inf) {
          for (std::size_t i = 0; i < n; ++i)
            if (flow[i][j] > tiny) relax(n + j, i, -cost[i][j]);
          if (demand[j] > tiny) relax(n + j, T, 0.0);
        }
      if (!changed) break;
    }
    if (d[T] == inf) break;
    double push = inf;
    for (std::size_t v = T; v != S; v = pred[v]) {
      std::size_t u = pred[v];
      if (u == S) push = std::min(push, supply[v]);
      else if (v == T) push = std::min(push, demand[u - n]);
      else if (u >= n && u < n + m) push = std::min(push, flow[v][u - n]);
    }
    for (std::size_t v = T; v != S; v = pred[v]) {
      std::size_t u = pred[v];
      if (u == S) supply[v] -= push;
      else if (v == T) demand[u - n] -= push;
      else if (u < n) flow[u][v - n] += push;
      else flow[v][u - n] -= push;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) total += flow[i][j] * cost[i][j];
  return total;
}

inline double kantorovich(const abclab::DiscreteMeasure& mu, const abclab::DiscreteMeasure& nu) {
  std::vector<std::vector<double>> c(mu.size(), std::vector<double>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) c[i][j] = abclab::dist(mu.point(i), nu.point(j));
  return transport_cost(mu.weights(), nu.weights(), c);
}

/// W1 on a line: the integral of |F - G| over the merged breakpoints.
inline double cdf_distance(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b) {
  std::vector<std::pair<double, double>> ev;
  for (auto [x, w] : a) ev.emplace_back(x, w);
  for (auto [x, w] : b) ev.emplace_back(x, -w);
  std::sort(ev.begin(), ev.end());
  double total = 0.0, diff = 0.0;
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    diff += ev[k].second;
    total += std::abs(diff) * (ev[k + 1].first - ev[k].first);
  }
  return total;
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) s += (x = u(rng));
  for (auto& x : w) x /= s;
  return w;
}

inline abclab::DiscreteMeasure random_measure(abclab::SurfaceKind kind, std::size_t n, std::mt19937_64& rng) {
  auto pts = abclab::lebesgue_sample(kind, n, rng());
  return abclab::DiscreteMeasure(std::move(pts), random_weights(rng, n));
}

}  // namespace oracle
