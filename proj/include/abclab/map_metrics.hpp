#pragma once

// Sampled C0 / C1 distances between maps and bi-Lipschitz constants. All
// sampled values are lower bounds of the true suprema.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "abclab/errors.hpp"
#include "abclab/map_expr.hpp"

namespace abclab {

namespace detail {

inline double chord_factor(SurfaceKind kind, double region_eta) {
  switch (kind) {
    case SurfaceKind::Annulus: return 1.0;
    case SurfaceKind::Sphere: return 1.0;  // the equator lies in every M_eta
    case SurfaceKind::Disk: return std::sqrt(1.0 - region_eta / 2.0);
  }
  return 1.0;
}

}  // namespace detail

/// Exact sup over M_eta of dist(R_a x, R_b x): attained on the widest circle.
inline double rotation_c0_distance(SurfaceKind kind, double a, double b, double region_eta) {
  const double d = std::abs(torus_delta(a, b));
  if (kind == SurfaceKind::Annulus) return d;
  return 2.0 * detail::chord_factor(kind, region_eta) * std::sin(std::numbers::pi * d);
}

inline double c0_distance(const MapExpr& f, const MapExpr& g, double region_eta, std::size_t samples,
                          std::uint64_t seed) {
  if (f.kind() != g.kind()) throw KindMismatch("maps act on different surfaces");
  if (f.is_pure_rotation() && g.is_pure_rotation())
    return rotation_c0_distance(f.kind(), f.rotation_value(), g.rotation_value(), region_eta);
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    AnnulusPoint a = sample_annulus_region(rng, region_eta);
    best = std::max(best, dist(project_pi(apply_chart(f, a), f.kind()), project_pi(apply_chart(g, a), g.kind())));
  }
  return best;
}

using Jacobian = std::array<std::array<double, 2>, 2>;

/// Largest singular value of a 2x2 matrix.
inline double operator_norm(const Jacobian& m) {
  double a = m[0][0], b = m[0][1], c = m[1][0], d = m[1][1];
  double s = a * a + b * b + c * c + d * d;
  double det = a * d - b * c;
  double disc = std::sqrt(std::max(0.0, s * s / 4.0 - det * det));
  return std::sqrt(s / 2.0 + disc);
}

/// Central-difference Jacobian of f in (theta, y) coordinates. Returns false
/// when the stencil straddles a discontinuity of f.
inline bool chart_jacobian(const MapExpr& f, const AnnulusPoint& x, double h, Jacobian& out) {
  std::uint64_t s0 = 0;
  apply_chart(f, x, false, &s0);
  std::array<AnnulusPoint, 4> img;
  const std::array<std::array<double, 2>, 4> dirs{{{h, 0}, {-h, 0}, {0, h}, {0, -h}}};
  for (int k = 0; k < 4; ++k) {
    AnnulusPoint p(x.theta + dirs[k][0], x.y + dirs[k][1]);
    std::uint64_t s = 0;
    img[k] = apply_chart(f, p, false, &s);
    if (s != s0) return false;
  }
  for (int col = 0; col < 2; ++col) {
    const AnnulusPoint& plus = img[2 * col];
    const AnnulusPoint& minus = img[2 * col + 1];
    out[0][col] = torus_delta(minus.theta, plus.theta) / (2.0 * h);
    out[1][col] = (plus.y - minus.y) / (2.0 * h);
  }
  return true;
}

inline double default_fd_step(SurfaceKind kind) { return 1e-5 * diameter(kind); }

/// Sup of dist(f, g) plus sup of ||Df - Dg|| over samples where both maps
/// are differentiable across the stencil.
inline double c1_distance(const MapExpr& f, const MapExpr& g, double region_eta, std::size_t samples, double h_fd,
                          std::uint64_t seed) {
  if (f.kind() != g.kind()) throw KindMismatch("maps act on different surfaces");
  if (f.is_pure_rotation() && g.is_pure_rotation()) return c0_distance(f, g, region_eta, samples, seed);
  std::mt19937_64 rng(seed);
  const double margin = std::max(region_eta, 2.0 * h_fd);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    AnnulusPoint x = sample_annulus_region(rng, margin);
    Jacobian jf{}, jg{};
    if (!chart_jacobian(f, x, h_fd, jf) || !chart_jacobian(g, x, h_fd, jg)) continue;
    c0 = std::max(c0, dist(project_pi(apply_chart(f, x), f.kind()), project_pi(apply_chart(g, x), g.kind())));
    Jacobian diff{};
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) diff[r][c] = jf[r][c] - jg[r][c];
    c1 = std::max(c1, operator_norm(diff));
  }
  return c0 + c1;
}

/// Sampled bi-Lipschitz constant over nearby pairs lying in the same
/// continuity piece of f (and of f^-1 for the inverse ratio).
inline double bilipschitz_estimate(const MapExpr& f, std::size_t samples, std::uint64_t seed,
                                   double pair_radius = 1e-3, double region_eta = 1e-3) {
  std::mt19937_64 rng(seed);
  const SurfaceKind kind = f.kind();
  double q = 1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    AnnulusPoint x = sample_annulus_region(rng, region_eta + pair_radius);
    double ang = 2.0 * std::numbers::pi * uniform01(rng);
    double r = pair_radius * (0.1 + 0.9 * uniform01(rng));
    AnnulusPoint x2(x.theta + r * std::cos(ang), x.y + r * std::sin(ang));
    for (bool inv : {false, true}) {
      std::uint64_t s1 = 0, s2 = 0;
      AnnulusPoint y1 = apply_chart(f, x, inv, &s1);
      AnnulusPoint y2 = apply_chart(f, x2, inv, &s2);
      if (s1 != s2) continue;
      double d = dist(project_pi(x, kind), project_pi(x2, kind));
      double e = dist(project_pi(y1, kind), project_pi(y2, kind));
      if (d <= 0.0 || e <= 0.0) continue;
      q = std::max({q, e / d, d / e});
    }
  }
  return q;
}

/// Exhaustive bi-Lipschitz ratio over pairs of box corners in one
/// fundamental domain, each corner moved by its own box's translation.
/// Coincident corners of different boxes are skipped.
inline double box_exchange_q_certificate(const BoxExchangeSpec& box, SurfaceKind kind,
                                         std::size_t max_boxes = 2048) {
  if (box.boxes_per_domain() > max_boxes) throw ResolutionExceeded("too many boxes for the exhaustive certificate");
  const double w = 1.0 / box.n_theta();
  const double h = box.row_height();
  const double inset = 1e-9;
  std::vector<SurfacePoint> src, dst;
  for (std::uint32_t i = 0; i < box.boxes_per_domain(); ++i) {
    BoxCell c{0, i % box.cols_per_domain(), i / box.cols_per_domain()};
    auto [dt, dy] = box.shift(c, false);
    for (int cx = 0; cx < 2; ++cx)
      for (int cy = 0; cy < 2; ++cy) {
        double t = (c.col + cx) * w + (cx ? -inset : inset);
        double y = box.y_lo() + (c.row + cy) * h + (cy ? -inset : inset);
        src.push_back(project_pi(AnnulusPoint(t, y), kind));
        dst.push_back(project_pi(AnnulusPoint(t + dt, y + dy), kind));
      }
  }
  double q = 1.0;
  const double tiny = 1e-6 * std::min(w, h);
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = i + 1; j < src.size(); ++j) {
      double d = dist(src[i], src[j]);
      double e = dist(dst[i], dst[j]);
      if (d <= tiny || e <= tiny) continue;
      q = std::max({q, e / d, d / e});
    }
  return q;
}

}  // namespace abclab
