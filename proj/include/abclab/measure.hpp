#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "abclab/geometry.hpp"

namespace abclab {

/// Probability measure supported on finitely many points of one surface.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  DiscreteMeasure(std::vector<SurfacePoint> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    check();
  }

  static DiscreteMeasure dirac(const SurfacePoint& p) { return DiscreteMeasure({p}, {1.0}); }

  static DiscreteMeasure uniform(std::vector<SurfacePoint> points) {
    std::vector<double> w(points.size(), 1.0 / static_cast<double>(points.size()));
    return DiscreteMeasure(std::move(points), std::move(w));
  }

  SurfaceKind kind() const { return points_.front().kind; }
  std::size_t size() const { return points_.size(); }
  const std::vector<SurfacePoint>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const SurfacePoint& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// Identical atoms folded together, zero-weight atoms dropped. Order is
  /// lexicographic in the coordinates so the result is canonical.
  DiscreteMeasure merged() const {
    std::map<std::array<double, 3>, double> acc;
    for (std::size_t i = 0; i < size(); ++i)
      if (weights_[i] > 0.0) acc[points_[i].c] += weights_[i];
    std::vector<SurfacePoint> pts;
    std::vector<double> w;
    pts.reserve(acc.size());
    w.reserve(acc.size());
    for (const auto& [c, m] : acc) {
      pts.push_back({kind(), c});
      w.push_back(m);
    }
    DiscreteMeasure out;
    out.points_ = std::move(pts);
    out.weights_ = std::move(w);
    return out;
  }

 private:
  void check() const {
    if (points_.empty() || points_.size() != weights_.size())
      throw std::invalid_argument("measure needs equally many points and weights, at least one");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::invalid_argument("negative measure weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("measure weights must sum to 1");
    for (const auto& p : points_)
      if (p.kind != points_.front().kind) throw KindMismatch("measure mixes surfaces");
  }

  std::vector<SurfacePoint> points_;
  std::vector<double> weights_;
};

/// Discretized mu_y = pi_* Leb_{T x {y}}: m equal atoms at the midpoints
/// j/m + 1/(2m), optionally shifted by a phase in [0, 1/m).
inline DiscreteMeasure mu_y_measure(double y, SurfaceKind kind, std::size_t m, double phase = 0.5) {
  if (m == 0) throw std::invalid_argument("support size must be positive");
  std::vector<SurfacePoint> pts;
  pts.reserve(m);
  const double md = static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j)
    pts.push_back(project_pi(AnnulusPoint((static_cast<double>(j) + phase) / md, y), kind));
  return DiscreteMeasure::uniform(std::move(pts));
}

}  // namespace abclab
