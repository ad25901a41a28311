#pragma once

// Exact Kantorovich (W1) distance between discrete measures, pushforwards
// and empirical measures.

#include <vector>

#include "abclab/errors.hpp"
#include "abclab/map_expr.hpp"
#include "abclab/measure.hpp"
#include "abclab/network_simplex.hpp"

namespace abclab {

inline constexpr std::size_t kDefaultSupportCap = 4096;

struct TransportEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<TransportEntry> entries;  // indices refer to the merged measures
  DiscreteMeasure source;
  DiscreteMeasure target;
  double objective = 0.0;
};

struct KantorovichResult {
  double value = 0.0;
  TransportPlan plan;
};

inline KantorovichResult kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     std::size_t support_cap = kDefaultSupportCap) {
  if (mu.kind() != nu.kind()) throw KindMismatch("measures live on different surfaces");
  DiscreteMeasure a = mu.merged();
  DiscreteMeasure b = nu.merged();
  if (a.size() + b.size() > support_cap) throw SupportTooLarge("combined support exceeds the transport cap");

  const auto n = static_cast<int>(a.size());
  const auto m = static_cast<int>(b.size());
  NetworkSimplex ns(n + m);
  ns.reserve_arcs(a.size() * b.size());
  for (int i = 0; i < n; ++i) ns.set_supply(i, a.weight(i));
  for (int j = 0; j < m; ++j) ns.set_supply(n + j, -b.weight(j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) ns.add_arc(i, n + j, dist(a.point(i), b.point(j)));
  if (ns.run() != NetworkSimplex::Status::Optimal) throw std::runtime_error("transport problem not solved");

  KantorovichResult r;
  r.plan.source = a;
  r.plan.target = b;
  int arc = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j, ++arc) {
      double f = ns.flow(arc);
      if (f > 0.0) {
        r.plan.entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), f});
        r.plan.objective += f * dist(a.point(i), b.point(j));
      }
    }
  r.value = r.plan.objective;
  return r;
}

inline double kantorovich_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                std::size_t support_cap = kDefaultSupportCap) {
  return kantorovich(mu, nu, support_cap).value;
}

inline DiscreteMeasure pushforward(const MapExpr& f, const DiscreteMeasure& mu) {
  if (f.kind() != mu.kind()) throw KindMismatch("map and measure live on different surfaces");
  std::vector<SurfacePoint> pts;
  pts.reserve(mu.size());
  for (const auto& p : mu.points()) pts.push_back(evaluate(f, p));
  return DiscreteMeasure(std::move(pts), mu.weights());
}

/// e^f_n(x) = (1/n) sum_{k=1..n} delta_{f^k(x)}.
inline DiscreteMeasure empirical_measure(const MapExpr& f, const SurfacePoint& x, std::size_t n, bool merge = false) {
  if (n == 0) throw std::invalid_argument("orbit length must be positive");
  std::vector<SurfacePoint> pts;
  pts.reserve(n);
  AnnulusPoint a = annulus_chart(x);
  for (std::size_t k = 0; k < n; ++k) {
    a = apply_chart(f, a);
    pts.push_back(project_pi(a, f.kind()));
  }
  DiscreteMeasure e = DiscreteMeasure::uniform(std::move(pts));
  return merge ? e.merged() : e;
}

}  // namespace abclab
