#pragma once

// Surfaces A = T x [-1,1], the unit sphere S and the unit disk D, together
// with the area-preserving projection pi : A -> M and its inverse on the
// punctured surface.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "abclab/errors.hpp"

namespace abclab {

enum class SurfaceKind { Annulus, Sphere, Disk };

inline std::string_view to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Annulus: return "annulus";
    case SurfaceKind::Sphere: return "sphere";
    case SurfaceKind::Disk: return "disk";
  }
  return "?";
}

inline SurfaceKind surface_from_string(std::string_view s) {
  if (s == "annulus") return SurfaceKind::Annulus;
  if (s == "sphere") return SurfaceKind::Sphere;
  if (s == "disk") return SurfaceKind::Disk;
  throw ParseError("unknown surface kind '" + std::string(s) + "'");
}

inline constexpr std::array<SurfaceKind, 3> kAllSurfaces{SurfaceKind::Annulus, SurfaceKind::Sphere,
                                                         SurfaceKind::Disk};

/// Reduce an angle to [0,1).
inline double wrap01(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

/// Signed representative of a - b on T, in [-1/2, 1/2).
inline double torus_delta(double a, double b) {
  double d = wrap01(a - b);
  return d >= 0.5 ? d - 1.0 : d;
}

struct AnnulusPoint {
  double theta = 0.0;
  double y = 0.0;

  AnnulusPoint() = default;
  AnnulusPoint(double t, double yy) : theta(wrap01(t)), y(yy) {
    if (!(y >= -1.0 - 1e-12 && y <= 1.0 + 1e-12)) throw DomainError("annulus height outside [-1,1]");
    if (y > 1.0) y = 1.0;
    if (y < -1.0) y = -1.0;
  }
};

struct SurfacePoint {
  SurfaceKind kind = SurfaceKind::Annulus;
  std::array<double, 3> c{0.0, 0.0, 0.0};

  friend bool operator==(const SurfacePoint&, const SurfacePoint&) = default;
};

inline SurfacePoint annulus_point(double theta, double y) {
  AnnulusPoint a(theta, y);
  return {SurfaceKind::Annulus, {a.theta, a.y, 0.0}};
}
inline SurfacePoint sphere_point(double x1, double x2, double x3) {
  return {SurfaceKind::Sphere, {x1, x2, x3}};
}
inline SurfacePoint disk_point(double x1, double x2) { return {SurfaceKind::Disk, {x1, x2, 0.0}}; }

/// Throws DomainError when the point violates its surface's constraint.
inline void validate(const SurfacePoint& p) {
  switch (p.kind) {
    case SurfaceKind::Annulus:
      if (p.c[0] < 0.0 || p.c[0] >= 1.0 || std::abs(p.c[1]) > 1.0 + 1e-12)
        throw DomainError("annulus point out of range");
      break;
    case SurfaceKind::Sphere: {
      double n = p.c[0] * p.c[0] + p.c[1] * p.c[1] + p.c[2] * p.c[2];
      if (std::abs(n - 1.0) > 1e-12) throw DomainError("point is not on the unit sphere");
      break;
    }
    case SurfaceKind::Disk:
      if (p.c[0] * p.c[0] + p.c[1] * p.c[1] > 1.0 + 1e-12) throw DomainError("point outside the unit disk");
      break;
  }
}

inline SurfacePoint project_pi(const AnnulusPoint& a, SurfaceKind kind) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (kind) {
    case SurfaceKind::Annulus: return {kind, {a.theta, a.y, 0.0}};
    case SurfaceKind::Sphere: {
      double r = std::sqrt(std::max(0.0, 1.0 - a.y * a.y));
      return {kind, {r * std::cos(two_pi * a.theta), r * std::sin(two_pi * a.theta), a.y}};
    }
    case SurfaceKind::Disk: {
      double r = std::sqrt((1.0 + a.y) / 2.0);
      return {kind, {r * std::cos(two_pi * a.theta), r * std::sin(two_pi * a.theta), 0.0}};
    }
  }
  return {};
}

namespace detail {

inline double angle01(double x, double y) { return wrap01(std::atan2(y, x) / (2.0 * std::numbers::pi)); }

}  // namespace detail

/// Annulus coordinates of any point of M. On the fixed set of the circle
/// action (poles, disk center) the angle is reported as 0.
inline AnnulusPoint annulus_chart(const SurfacePoint& p) {
  AnnulusPoint a;
  switch (p.kind) {
    case SurfaceKind::Annulus:
      a.theta = wrap01(p.c[0]);
      a.y = std::clamp(p.c[1], -1.0, 1.0);
      break;
    case SurfaceKind::Sphere: {
      a.y = std::clamp(p.c[2], -1.0, 1.0);
      bool pole = p.c[0] == 0.0 && p.c[1] == 0.0;
      a.theta = pole ? 0.0 : detail::angle01(p.c[0], p.c[1]);
      break;
    }
    case SurfaceKind::Disk: {
      double r2 = p.c[0] * p.c[0] + p.c[1] * p.c[1];
      a.y = std::clamp(2.0 * r2 - 1.0, -1.0, 1.0);
      a.theta = r2 == 0.0 ? 0.0 : detail::angle01(p.c[0], p.c[1]);
      break;
    }
  }
  return a;
}

/// True on the fixed points of the rotation action: poles of S, center of D.
inline bool is_singular(const SurfacePoint& p) {
  switch (p.kind) {
    case SurfaceKind::Annulus: return false;
    case SurfaceKind::Sphere: return p.c[0] == 0.0 && p.c[1] == 0.0;
    case SurfaceKind::Disk: return p.c[0] == 0.0 && p.c[1] == 0.0;
  }
  return false;
}

inline AnnulusPoint project_pi_inverse(const SurfacePoint& p) {
  if (is_singular(p)) throw DomainError("pi is not invertible at a pole or at the disk center");
  return annulus_chart(p);
}

/// Flat product metric on A (T-distance x height), chordal on S, Euclidean on D.
inline double dist(const SurfacePoint& a, const SurfacePoint& b) {
  if (a.kind != b.kind) throw KindMismatch();
  if (a.kind == SurfaceKind::Annulus) {
    double dt = std::abs(torus_delta(a.c[0], b.c[0]));
    double dy = a.c[1] - b.c[1];
    return std::sqrt(dt * dt + dy * dy);
  }
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a.c[i] - b.c[i]) * (a.c[i] - b.c[i]);
  return std::sqrt(s);
}

inline double diameter(SurfaceKind kind) {
  return kind == SurfaceKind::Annulus ? std::sqrt(0.25 + 4.0) : 2.0;
}

/// Factor turning a distance into units where diam(M) = 1/2, the scale in
/// which the ergodic tolerance schedule eps_n = 2^-(n+1) is expressed.
inline double unit_diameter_scale(SurfaceKind kind) { return 0.5 / diameter(kind); }

/// True iff the point lies in M_eta = pi(T x (-1+eta, 1-eta)).
inline bool in_region_M_eta(const SurfacePoint& p, double eta) {
  if (eta == 0.0) return true;
  if (is_singular(p)) return false;
  return std::abs(annulus_chart(p).y) < 1.0 - eta;
}

/// Deterministic uniform double in [0,1) from the top 53 bits of a draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// i.i.d. Leb_M samples: uniform (theta, y) pushed through pi.
inline std::vector<SurfacePoint> lebesgue_sample(SurfaceKind kind, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SurfacePoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = uniform01(rng);
    double y = 2.0 * uniform01(rng) - 1.0;
    out.push_back(project_pi(AnnulusPoint(t, y), kind));
  }
  return out;
}

/// Uniform sample of the annulus region T x (-1+eta, 1-eta).
inline AnnulusPoint sample_annulus_region(std::mt19937_64& rng, double eta) {
  double t = uniform01(rng);
  double y = (1.0 - eta) * (2.0 * uniform01(rng) - 1.0);
  return AnnulusPoint(t, y);
}

/// Constant C with dist(pi(t,y), pi(t,y')) <= C |y - y'|^{1/2} on every
/// surface (measured maxima: 2^{1/2} annulus, 2 sphere, 2^{-1/2} disk).
inline constexpr double kLongitudeHolderConstant = 2.0;

}  // namespace abclab
