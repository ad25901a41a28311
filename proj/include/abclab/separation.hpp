#pragma once

// Pairwise Kantorovich distances between images h_* mu_y of horizontal
// circles, and the mass function y -> Leb_I{y' : d_K(h_* mu_y, h_* mu_y') <= eta}.

#include <algorithm>
#include <vector>

#include "abclab/parallel.hpp"
#include "abclab/transport.hpp"

namespace abclab {

/// n midpoints of [lo, hi].
inline std::vector<double> midpoint_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (static_cast<double>(i) + 0.5) * step;
  return out;
}

/// Symmetric matrix of d_K(h_* mu_{y_i}, h_* mu_{y_j}), m atoms per circle.
inline std::vector<std::vector<double>> separation_matrix(const MapExpr& h, const std::vector<double>& ys,
                                                          std::size_t m,
                                                          std::size_t support_cap = kDefaultSupportCap) {
  if (2 * m > support_cap) throw SupportTooLarge("circle support exceeds the transport cap");
  const std::size_t n = ys.size();
  std::vector<DiscreteMeasure> images(n);
  parallel_for(n, [&](std::size_t i) { images[i] = pushforward(h, mu_y_measure(ys[i], h.kind(), m)); });
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    values[k] = kantorovich_value(images[pairs[k].first], images[pairs[k].second], support_cap);
  });
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    d[pairs[k].first][pairs[k].second] = values[k];
    d[pairs[k].second][pairs[k].first] = values[k];
  }
  return d;
}

/// Fraction of the y' grid within eta of row i.
inline double row_mass(const std::vector<double>& row, double eta) {
  std::size_t count = 0;
  for (double v : row)
    if (v <= eta) ++count;
  return static_cast<double>(count) / static_cast<double>(row.size());
}

/// Leb_I{y' : d_K(h_* mu_y, h_* mu_y') <= eta} on the midpoint grid of
/// [-1, 1] with y_grid points.
inline double separation_mass(const MapExpr& h, double y, double eta, std::size_t y_grid, std::size_t m,
                              std::size_t support_cap = kDefaultSupportCap) {
  if (!(y > -1.0 && y < 1.0)) throw DomainError("separation mass needs y in (-1,1)");
  if (2 * m > support_cap) throw SupportTooLarge("circle support exceeds the transport cap");
  const auto ys = midpoint_grid(-1.0, 1.0, y_grid);
  const DiscreteMeasure base = pushforward(h, mu_y_measure(y, h.kind(), m));
  std::vector<double> row(ys.size());
  parallel_for(ys.size(), [&](std::size_t j) {
    row[j] = kantorovich_value(base, pushforward(h, mu_y_measure(ys[j], h.kind(), m)), support_cap);
  });
  return row_mass(row, eta);
}

}  // namespace abclab
