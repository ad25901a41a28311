#pragma once

// Distances to Leb_M through a midpoint grid in annulus coordinates.
//
// A measure is first quantized onto the grid cells (every bit of mass moved
// to its cell center, the cost of which is tallied exactly for atoms and
// bounded for segments). The quantized measure is then transported to the
// equal-weight grid measure on a sparse graph: a 16-direction stencil between
// cells plus, on S and D, hub nodes at the fixed points of the circle action
// linked to every cell. Any flow on that graph decomposes into paths no
// shorter than the straight distance, so the graph optimum bounds the grid
// W1 from above.
//
// The grid may cover a single fundamental domain [0, w) of a rotation
// R_w with w = 1/q. For R_w-invariant measures a coupling on the quotient
// lifts to the whole surface at the same cost, so the domain value bounds
// the full one.

#include <array>
#include <cmath>
#include <vector>

#include "abclab/errors.hpp"
#include "abclab/measure.hpp"
#include "abclab/network_simplex.hpp"
#include "abclab/segments.hpp"
#include "abclab/transport.hpp"

namespace abclab {

class LebesgueGrid {
 public:
  LebesgueGrid(SurfaceKind kind, std::size_t k_theta, std::size_t k_y, double width = 1.0)
      : kind_(kind), kt_(k_theta), ky_(k_y), width_(width) {
    if (k_theta == 0 || k_y == 0) throw std::invalid_argument("grid needs at least one cell");
    if (!(width > 0.0 && width <= 1.0)) throw std::invalid_argument("grid width must lie in (0,1]");
    centers_.reserve(size());
    for (std::size_t j = 0; j < ky_; ++j)
      for (std::size_t i = 0; i < kt_; ++i) centers_.push_back(project_pi(chart_center(i, j), kind_));
    radius_ = compute_radius();
    if (kind_ == SurfaceKind::Sphere) hubs_ = {sphere_point(0, 0, -1), sphere_point(0, 0, 1)};
    if (kind_ == SurfaceKind::Disk) hubs_ = {disk_point(0, 0)};
  }

  /// Square grid k x k over the whole surface.
  static LebesgueGrid square(SurfaceKind kind, std::size_t k) { return LebesgueGrid(kind, k, k); }

  SurfaceKind kind() const { return kind_; }
  std::size_t k_theta() const { return kt_; }
  std::size_t k_y() const { return ky_; }
  double width() const { return width_; }
  std::size_t size() const { return kt_ * ky_; }
  double cell_theta() const { return width_ / static_cast<double>(kt_); }
  double cell_y() const { return 2.0 / static_cast<double>(ky_); }

  AnnulusPoint chart_center(std::size_t i, std::size_t j) const {
    AnnulusPoint a;
    a.theta = (static_cast<double>(i) + 0.5) * cell_theta();
    a.y = -1.0 + (static_cast<double>(j) + 0.5) * cell_y();
    return a;
  }
  const SurfacePoint& center(std::size_t idx) const { return centers_[idx]; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * kt_ + i; }

  /// Fixed points of the circle action (poles of S, center of D). They carry
  /// no grid mass but serve as transport hubs and as bins for mass sitting
  /// on or next to them. Histogram slots size()..size()+hubs-1.
  const std::vector<SurfacePoint>& hubs() const { return hubs_; }
  std::size_t slots() const { return size() + hubs_.size(); }

  /// Bin for a point at chart height y whose nearest cell center is `center`
  /// at distance d: the hub if that is closer.
  std::pair<std::size_t, double> nearest_slot(std::size_t cell, double d, const SurfacePoint& p) const {
    std::size_t slot = cell;
    for (std::size_t h = 0; h < hubs_.size(); ++h) {
      double dh = dist(p, hubs_[h]);
      if (dh < d) {
        d = dh;
        slot = size() + h;
      }
    }
    return {slot, d};
  }

  /// Bound on d_K(Leb_grid, Leb): mean distance from a cell's points to its
  /// center, averaged over cells (8 x 8 midpoint rule per cell).
  double radius() const { return radius_; }

  /// Equal-weight grid measure restricted to one fundamental domain.
  DiscreteMeasure measure() const { return DiscreteMeasure::uniform(centers_); }

  /// Cell containing chart point a, with theta read modulo the grid width.
  std::pair<std::size_t, std::size_t> locate(double theta, double y) const {
    double t = theta / width_;
    t -= std::floor(t);
    auto i = static_cast<std::size_t>(t * static_cast<double>(kt_));
    auto j = static_cast<std::size_t>(std::floor((y + 1.0) / cell_y()));
    return {std::min(i, kt_ - 1), std::min(j, ky_ - 1)};
  }

 private:
  double compute_radius() const {
    constexpr int s = 8;
    double total = 0.0;
    for (std::size_t j = 0; j < ky_; ++j) {
      // Every cell in a row has the same radius by rotation invariance.
      AnnulusPoint c = chart_center(0, j);
      SurfacePoint cp = project_pi(c, kind_);
      double acc = 0.0;
      for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
          AnnulusPoint p;
          p.theta = (static_cast<double>(a) + 0.5) / s * cell_theta();
          p.y = -1.0 + (static_cast<double>(j) + (static_cast<double>(b) + 0.5) / s) * cell_y();
          acc += dist(project_pi(p, kind_), cp);
        }
      total += acc / (s * s);
    }
    return total / static_cast<double>(ky_);
  }

  SurfaceKind kind_;
  std::size_t kt_, ky_;
  double width_;
  std::vector<SurfacePoint> centers_;
  std::vector<SurfacePoint> hubs_;
  double radius_ = 0.0;
};

/// Mass of a measure binned onto grid cells, with the cost of moving every
/// bit of mass to its cell center.
struct GridHistogram {
  std::vector<double> mass;
  double quantization_cost = 0.0;
};

inline GridHistogram quantize(const LebesgueGrid& grid, const DiscreteMeasure& mu) {
  if (mu.kind() != grid.kind()) throw KindMismatch("measure and grid live on different surfaces");
  GridHistogram h;
  h.mass.assign(grid.slots(), 0.0);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    AnnulusPoint a = annulus_chart(mu.point(k));
    auto [i, j] = grid.locate(a.theta, a.y);
    // Measured against the center of the cell in the same domain copy.
    AnnulusPoint c = grid.chart_center(i, j);
    c.theta += std::floor(a.theta / grid.width()) * grid.width();
    double d = dist(mu.point(k), project_pi(c, grid.kind()));
    auto [slot, cost] = grid.nearest_slot(grid.index(i, j), d, mu.point(k));
    h.mass[slot] += mu.weight(k);
    h.quantization_cost += mu.weight(k) * cost;
  }
  return h;
}

namespace detail {

/// Bins the piece [pos, next) of a segment at height y carrying mass w.
/// Distance to the cell center grows with the angular gap at fixed height,
/// so the farthest point of the piece is one of its ends; hub distances
/// depend on the height alone.
inline void bin_piece(const LebesgueGrid& grid, GridHistogram& h, double pos, double next, double y, double w) {
  double mid = 0.5 * (pos + next);
  auto [i, j] = grid.locate(mid, y);
  const std::size_t idx = grid.index(i, j);
  AnnulusPoint c = grid.chart_center(i, j);
  const double copy = std::floor(mid / grid.width()) * grid.width();
  c.theta += copy;
  double end = std::abs(pos - c.theta) > std::abs(next - c.theta) ? pos : next;
  SurfacePoint ep = project_pi(AnnulusPoint(end, y), grid.kind());
  const SurfacePoint cp = copy == std::floor(copy) ? grid.center(idx) : project_pi(c, grid.kind());
  auto [slot, cost] = grid.nearest_slot(idx, dist(ep, cp), ep);
  h.mass[slot] += w;
  h.quantization_cost += w * cost;
}

/// Bins [pos, end) cell by cell; `weight` is mass per unit length.
inline void bin_run(const LebesgueGrid& grid, GridHistogram& h, double pos, double end, double y, double weight) {
  const double ct = grid.cell_theta();
  while (pos < end) {
    double next = std::min(end, (std::floor(pos / ct) + 1.0) * ct);
    if (next <= pos) next = std::nextafter(pos, 3.0);
    bin_piece(grid, h, pos, next, y, weight * (next - pos));
    pos = next;
  }
}

}  // namespace detail

namespace detail {

/// Cells a segment covers completely all cost the same by rotation
/// invariance, so only the two end cells are binned one by one.
inline void bin_segment(const LebesgueGrid& grid, GridHistogram& h, const Segment& s) {
  if (s.mass <= 0.0 || s.length <= 0.0) return;
  const double ct = grid.cell_theta();
  const double density = s.mass / s.length;
  const double end = s.start + s.length;
  const double k0 = std::ceil(s.start / ct);
  const double k1 = std::floor(end / ct);
  if (k1 <= k0) {
    bin_run(grid, h, s.start, end, s.y, density);
    return;
  }
  if (k0 * ct > s.start) bin_piece(grid, h, s.start, k0 * ct, s.y, density * (k0 * ct - s.start));
  if (end > k1 * ct) bin_piece(grid, h, k1 * ct, end, s.y, density * (end - k1 * ct));
  const double n = k1 - k0;
  const auto kt = static_cast<double>(grid.k_theta());
  auto [i0, j] = grid.locate(0.5 * ct, s.y);
  AnnulusPoint c = grid.chart_center(i0, j);
  SurfacePoint cp = project_pi(c, grid.kind());
  double far = 0.0;
  for (double t : {0.0, 0.5 * ct, ct}) far = std::max(far, dist(project_pi(AnnulusPoint(t, s.y), grid.kind()), cp));
  auto [slot, cost] = grid.nearest_slot(grid.index(i0, j), far, project_pi(AnnulusPoint(0.5 * ct, s.y), grid.kind()));
  const double cell_mass = density * ct;
  h.quantization_cost += n * cell_mass * cost;
  if (slot >= grid.size()) {
    h.mass[slot] += n * cell_mass;
    return;
  }
  const double laps = std::floor(n / kt);
  const auto extra = static_cast<std::size_t>(n - laps * kt);
  auto first = static_cast<std::size_t>(std::fmod(k0, kt));
  for (std::size_t i = 0; i < grid.k_theta(); ++i) h.mass[grid.index(i, j)] += laps * cell_mass;
  for (std::size_t e = 0; e < extra; ++e) h.mass[grid.index((first + e) % grid.k_theta(), j)] += cell_mass;
}

}  // namespace detail

inline GridHistogram quantize(const LebesgueGrid& grid, const SegmentMeasure& m) {
  if (m.kind != grid.kind()) throw KindMismatch("measure and grid live on different surfaces");
  GridHistogram h;
  h.mass.assign(grid.slots(), 0.0);
  for (const Segment& s : m.segments) detail::bin_segment(grid, h, s);
  return h;
}

namespace detail {

inline constexpr std::array<std::array<int, 2>, 8> kStencil{{{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {1, 2}, {2, -1}, {1, -2}}};

}  // namespace detail

/// Upper bound of W1(hist, Leb_grid) from the sparse transport graph.
inline double grid_transport(const LebesgueGrid& grid, const std::vector<double>& hist) {
  if (hist.size() != grid.slots()) throw std::invalid_argument("histogram does not match the grid");
  const SurfaceKind kind = grid.kind();
  const auto cells = static_cast<int>(grid.size());
  const auto n_nodes = static_cast<int>(grid.slots());
  double total = 0.0;
  for (double m : hist) total += m;
  const double w = total / static_cast<double>(grid.size());
  bool any = false;
  NetworkSimplex ns(n_nodes);
  for (int c = 0; c < n_nodes; ++c) {
    double s = hist[static_cast<std::size_t>(c)] - (c < cells ? w : 0.0);
    if (std::abs(s) > 1e-15) any = true;
    ns.set_supply(c, s);
  }
  if (!any) return 0.0;
  const auto kt = static_cast<long>(grid.k_theta());
  const auto ky = static_cast<long>(grid.k_y());
  const bool wrap = kt > 2;
  ns.reserve_arcs(grid.size() * (detail::kStencil.size() * 2 + 2 * grid.hubs().size()));
  for (long j = 0; j < ky; ++j)
    for (long i = 0; i < kt; ++i) {
      auto from = static_cast<int>(grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      AnnulusPoint a = grid.chart_center(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      SurfacePoint pa = grid.center(static_cast<std::size_t>(from));
      for (const auto& d : detail::kStencil) {
        for (int sign : {1, -1}) {
          long di = sign * d[0], dj = sign * d[1];
          long ti = i + di, tj = j + dj;
          if (tj < 0 || tj >= ky) continue;
          if (!wrap && (ti < 0 || ti >= kt)) continue;
          long wi = ((ti % kt) + kt) % kt;
          auto to = static_cast<int>(grid.index(static_cast<std::size_t>(wi), static_cast<std::size_t>(tj)));
          if (to == from) continue;
          // Distance to the neighbour's copy in the adjacent domain when the
          // stencil wraps.
          AnnulusPoint b(a.theta + static_cast<double>(di) * grid.cell_theta(),
                         grid.chart_center(0, static_cast<std::size_t>(tj)).y);
          ns.add_arc(from, to, dist(pa, project_pi(b, kind)));
        }
      }
    }
  for (std::size_t h = 0; h < grid.hubs().size(); ++h) {
    int hub = cells + static_cast<int>(h);
    for (int c = 0; c < cells; ++c) {
      double cost = dist(grid.center(static_cast<std::size_t>(c)), grid.hubs()[h]);
      ns.add_arc(c, hub, cost);
      ns.add_arc(hub, c, cost);
    }
  }
  if (ns.run() != NetworkSimplex::Status::Optimal) throw std::runtime_error("grid transport not solved");
  return ns.total_cost();
}

struct LebesgueDistance {
  double value = 0.0;   // bound on d_K(mu, Leb_grid)
  double radius = 0.0;  // bound on d_K(Leb_grid, Leb)
  /// Conservative bound on d_K(mu, Leb).
  double upper() const { return value + radius; }
};

inline LebesgueDistance kantorovich_to_lebesgue(const DiscreteMeasure& mu, const LebesgueGrid& grid) {
  GridHistogram h = quantize(grid, mu);
  return {h.quantization_cost + grid_transport(grid, h.mass), grid.radius()};
}

inline LebesgueDistance kantorovich_to_lebesgue(const DiscreteMeasure& mu, std::size_t resolution,
                                                std::size_t support_cap = kDefaultSupportCap) {
  if (resolution * resolution > support_cap) throw SupportTooLarge("Lebesgue grid exceeds the support cap");
  return kantorovich_to_lebesgue(mu, LebesgueGrid::square(mu.kind(), resolution));
}

inline LebesgueDistance kantorovich_to_lebesgue(const SegmentMeasure& m, const LebesgueGrid& grid) {
  GridHistogram h = quantize(grid, m);
  return {h.quantization_cost + grid_transport(grid, h.mass) + m.error_bound, grid.radius()};
}

/// d_K(f_* m, Leb_grid) with the image streamed straight into the grid.
/// `pieces`, when given, receives the piece count of the exact image.
inline LebesgueDistance pushforward_to_lebesgue(const MapExpr& f, const SegmentMeasure& m, const LebesgueGrid& grid,
                                                const PushOptions& opt = {}, double* pieces = nullptr) {
  if (m.kind != f.kind() || m.kind != grid.kind()) throw KindMismatch("measure, map and grid live on different surfaces");
  SegmentPusher pusher(f, opt);
  GridHistogram h;
  h.mass.assign(grid.slots(), 0.0);
  for (const Segment& s : m.segments) pusher.push(s, [&](const Segment& t) { detail::bin_segment(grid, h, t); });
  if (pieces) *pieces = pusher.pieces();
  return {h.quantization_cost + grid_transport(grid, h.mass) + m.error_bound + pusher.error_bound(), grid.radius()};
}

}  // namespace abclab
