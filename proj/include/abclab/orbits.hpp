#pragma once

// Orbits of conjugated rational rotations f = h R_{p/q} h^-1. Every orbit is
// periodic, f^j(h(w)) = h(w + j p/q), and its empirical measure over one
// period is h_* of a q-point lattice on the circle through w.

#include <cstdint>
#include <optional>

#include "abclab/lebesgue_grid.hpp"
#include "abclab/map_expr.hpp"
#include "abclab/rational.hpp"
#include "abclab/segments.hpp"

namespace abclab {

struct ConjugatedRotation {
  MapExpr h;
  Rational alpha;
};

inline std::optional<ConjugatedRotation> as_conjugated_rotation(const MapExpr& f) {
  if (f.op() == MapOp::Rotation && f.node().alpha) return ConjugatedRotation{MapExpr::identity(f.kind()), *f.node().alpha};
  if (f.op() == MapOp::Identity) return ConjugatedRotation{f, Rational(0)};
  if (f.op() != MapOp::Conjugate) return std::nullopt;
  MapExpr inner = f.second();
  if (inner.op() == MapOp::Identity) return ConjugatedRotation{f.first(), Rational(0)};
  if (inner.op() != MapOp::Rotation || !inner.node().alpha) return std::nullopt;
  return ConjugatedRotation{f.first(), *inner.node().alpha};
}

/// frac(j p / q) exactly, for q within 64 bits.
inline double frac_multiple(std::int64_t p, std::int64_t q, std::int64_t j) {
  __int128 r = (static_cast<__int128>(p) * j) % q;
  if (r < 0) r += q;
  return static_cast<double>(static_cast<long double>(r) / static_cast<long double>(q));
}

inline std::int64_t to_int64(const BigInt& v) {
  if (v > BigInt(INT64_MAX) || v < BigInt(INT64_MIN)) throw ResolutionExceeded("denominator exceeds 64 bits");
  return static_cast<std::int64_t>(v);
}

/// Certified bound on d_K(e^f_q(h(w)), Leb) for f = h R_{p/q} h^-1, where w
/// lies on the circle at height y.
inline LebesgueDistance periodic_orbit_distance(const MapExpr& h, double y, double q, const LebesgueGrid& grid,
                                                const PushOptions& opt = {}) {
  double pieces = 0.0;
  LebesgueDistance d = pushforward_to_lebesgue(h, circle_measure(y, h.kind()), grid, opt, &pieces);
  d.value += lattice_replacement_error(h.kind(), pieces, q);
  return d;
}

}  // namespace abclab
