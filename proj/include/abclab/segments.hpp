#pragma once

// Measures made of horizontal segments in annulus coordinates, each carrying
// mass spread uniformly along its length. Circles pi_* Leb_{T x {y}} are a
// single segment, and a box exchange maps a segment to finitely many
// segments, so pushforwards of circle measures through map trees are exact
// up to the dense-split approximation documented on push_segments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "abclab/errors.hpp"
#include "abclab/map_expr.hpp"

namespace abclab {

struct Segment {
  double start = 0.0;  // theta in [0,1)
  double length = 1.0;  // in (0,1]
  double y = 0.0;
  double mass = 1.0;
  /// Length of source curve this segment stands for; 0 means its own length.
  /// A dense copy covers its full circle but stands for a comb.
  double span = 0.0;
};

struct SegmentMeasure {
  SurfaceKind kind = SurfaceKind::Annulus;
  std::vector<Segment> segments;
  /// Upper bound on d_K between this measure and the exact pushforward it
  /// stands for.
  double error_bound = 0.0;
  /// Number of translation pieces the exact pushforward would have.
  double exact_piece_count = 0.0;

  double total_mass() const {
    double m = 0.0;
    for (const auto& s : segments) m += s.mass;
    return m;
  }
};

/// Length of the circle pi(T x {y}) in the surface metric scale used for
/// theta displacements (one turn on the annulus).
inline double circle_length(SurfaceKind kind, double y) {
  const double two_pi = 2.0 * std::numbers::pi;
  switch (kind) {
    case SurfaceKind::Annulus: return 1.0;
    case SurfaceKind::Sphere: return two_pi * std::sqrt(std::max(0.0, 1.0 - y * y));
    case SurfaceKind::Disk: return two_pi * std::sqrt(std::max(0.0, (1.0 + y) / 2.0));
  }
  return 1.0;
}

inline SegmentMeasure circle_measure(double y, SurfaceKind kind) {
  SegmentMeasure m;
  m.kind = kind;
  m.segments.push_back({0.0, 1.0, y, 1.0, 0.0});
  m.exact_piece_count = 1.0;
  return m;
}

struct PushOptions {
  /// A segment meeting more box columns than this is split densely: it is
  /// replaced by one full-length copy per local column, moved by that
  /// column's translation.
  double max_exact_splits = 1048576.0;
  /// A dense split may instead cut each copy along the columns of the next
  /// box, keeping the exact comb mass in every column. It is preferred over
  /// the exact walk when it emits fewer segments and its cost per unit mass
  /// stays below dense_tolerance.
  double dense_tolerance = 0.02;
  double max_refine_columns = 65536.0;
  /// Total number of output segments one push may produce.
  std::size_t max_segments = std::size_t{1} << 26;
};

namespace detail {

/// One elementary step of a flattened map tree: a rotation (box == nullptr)
/// or a box exchange applied forwards or backwards.
struct PushOp {
  const BoxExchangeSpec* box = nullptr;
  bool inv = false;
  double shift = 0.0;
};

/// Ops in application order.
inline void flatten(const MapExpr::Node& n, bool inv, std::vector<PushOp>& ops) {
  switch (n.op) {
    case MapOp::Identity: return;
    case MapOp::Rotation: ops.push_back({nullptr, false, inv ? -n.alpha_value : n.alpha_value}); return;
    case MapOp::BoxExchange: ops.push_back({n.box.get(), inv, 0.0}); return;
    case MapOp::Compose:
      if (!inv) {
        flatten(*n.b, false, ops);
        flatten(*n.a, false, ops);
      } else {
        flatten(*n.a, true, ops);
        flatten(*n.b, true, ops);
      }
      return;
    case MapOp::Inverse: flatten(*n.a, !inv, ops); return;
    case MapOp::Conjugate:
      flatten(*n.a, true, ops);
      flatten(*n.b, inv, ops);
      flatten(*n.a, false, ops);
      return;
  }
}

}  // namespace detail

/// Streams f_* of segments depth first, so the image is never held in
/// memory. Each output segment is handed to a sink.
///
/// A dense split replaces a 1/q-periodic comb by uniform mass on its circle;
/// sending each point to the nearest tooth moves it 1/(4q) of a turn on
/// average. Partial domains at the segment ends and mass that a later box
/// column separates from its true position are charged at the diameter; a
/// later column line catches a pair 1/q apart with probability at most 2/q
/// per column.
class SegmentPusher {
 public:
  SegmentPusher(const MapExpr& f, const PushOptions& opt = {}) : f_(f), opt_(opt), kind_(f.kind()) {
    detail::flatten(f_.node(), false, ops_);
    later_.assign(ops_.size() + 1, 0.0);
    for (std::size_t i = ops_.size(); i-- > 0;)
      later_[i] = later_[i + 1] + (ops_[i].box ? ops_[i].box->n_theta() : 0.0);
    const double q_turn = kind_ == SurfaceKind::Annulus ? 1.0 : 2.0 * std::numbers::pi;
    refine_cost_.assign(ops_.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < ops_.size(); ++i) {
      const BoxExchangeSpec* next = ops_[i + 1].box;
      if (!ops_[i].box || !next || next->n_theta() > opt_.max_refine_columns) continue;
      const double q = static_cast<double>(ops_[i].box->q());
      refine_cost_[i] = 2.0 * q_turn / q + diameter(kind_) * 2.0 * later_[i + 2] / q;
    }
  }

  template <class Sink>
  void push(const Segment& s, Sink&& sink) {
    step(s, 0, sink);
  }

  /// Bound on d_K between the streamed segments and the exact image.
  double error_bound() const { return error_; }
  /// Discontinuity points of f met by the pushed segments, plus one per
  /// pushed segment.
  double pieces() const { return pieces_; }
  std::size_t emitted() const { return emitted_; }

 private:
  static double span(const Segment& s) { return s.span > 0.0 ? s.span : s.length; }

  template <class Sink>
  void forward(const Segment& s, std::size_t i, Sink& sink) {
    if (i < ops_.size()) return step(s, i, sink);
    if (++emitted_ > opt_.max_segments) throw ResolutionExceeded("segment pushforward exceeds the segment cap");
    sink(s);
  }

  template <class Sink>
  void step(const Segment& s, std::size_t i, Sink& sink) {
    if (i == ops_.size()) return forward(s, i, sink);
    if (i == 0) pieces_ += 1.0;
    const detail::PushOp& op = ops_[i];
    if (!op.box) {
      Segment t = s;
      t.start = wrap01(s.start + op.shift);
      forward(t, i + 1, sink);
      return;
    }
    const BoxExchangeSpec& box = *op.box;
    BoxCell probe = box.locate(s.start, s.y);
    if (probe.domain < 0) {
      forward(s, i + 1, sink);
      return;
    }
    const double crossings = s.length * box.n_theta();
    const BoxExchangeSpec* next = i + 1 < ops_.size() ? ops_[i + 1].box : nullptr;
    const double refine_cost = refine_cost_[i];
    const bool refine_smaller = next && box.cols_per_domain() * next->n_theta() < crossings;
    if (refine_cost <= opt_.dense_tolerance && refine_smaller) return split_refined(s, i, probe, sink);
    if (crossings <= opt_.max_exact_splits) return walk_exact(s, i, probe, sink);
    const double q = static_cast<double>(box.q());
    const double turn = kind_ == SurfaceKind::Annulus ? 1.0 : 2.0 * std::numbers::pi;
    const double partial = s.length >= 1.0 ? 0.0 : std::min(1.0, 2.0 * box.cols_per_domain() / crossings);
    const double plain_cost = turn / (4.0 * q) + diameter(kind_) * (partial + 2.0 * later_[i + 1] / q);
    if (refine_cost < plain_cost) split_refined(s, i, probe, sink);
    else split_dense(s, i, probe, sink);
  }

  /// Columns are indexed globally; the local column is the index modulo the
  /// columns per domain and the row is fixed by the height.
  template <class Sink>
  void walk_exact(const Segment& s, std::size_t i, BoxCell cell, Sink& sink) {
    const detail::PushOp& op = ops_[i];
    const BoxExchangeSpec& box = *op.box;
    const long double nt = box.n_theta();
    const long double lo = s.start;
    const long double end = lo + static_cast<long double>(s.length);
    const std::uint64_t cols = box.cols_per_domain();
    double made = 0.0;
    long double col = std::floor(lo * nt);
    auto local = col < 0x1p62L ? static_cast<std::uint64_t>(col) % cols
                               : static_cast<std::uint64_t>(std::fmod(col, static_cast<long double>(cols)));
    for (long double left = col / nt; left < end; col += 1.0L) {
      const long double right = (col + 1.0L) / nt;
      const long double a = std::max(lo, left);
      const long double b = std::min(end, right);
      left = right;
      const std::uint64_t this_col = local;
      if (++local == cols) local = 0;
      if (!(b > a)) continue;
      const double piece_len = static_cast<double>(b - a);
      if (!(piece_len > 0.0)) continue;
      cell.col = static_cast<std::uint32_t>(this_col);
      auto [dt, dy] = box.shift(cell, op.inv);
      const double frac = piece_len / s.length;
      Segment t{wrap01(static_cast<double>(a) + dt), piece_len, s.y + dy, s.mass * frac,
                s.span > 0.0 ? s.span * frac : 0.0};
      made += 1.0;
      forward(t, i + 1, sink);
    }
    // A dense copy stands for a comb; count the cuts of the comb itself.
    pieces_ += s.span > 0.0 ? s.span * static_cast<double>(nt) : std::max(0.0, made - 1.0);
  }

  template <class Sink>
  void split_dense(const Segment& s, std::size_t i, BoxCell cell, Sink& sink) {
    const detail::PushOp& op = ops_[i];
    const BoxExchangeSpec& box = *op.box;
    const std::uint32_t cols = box.cols_per_domain();
    const double q = static_cast<double>(box.q());
    const double crossings = s.length * box.n_theta();
    double shift_error = 0.0;
    std::vector<Segment> copies;
    copies.reserve(cols);
    for (std::uint32_t c = 0; c < cols; ++c) {
      cell.col = c;
      auto [dt, dy] = box.shift(cell, op.inv);
      copies.push_back({wrap01(s.start + dt), s.length, s.y + dy, s.mass / cols, span(s) / cols});
      shift_error += s.mass / cols * circle_length(kind_, s.y + dy) / (4.0 * q);
    }
    const double partial = s.length >= 1.0 ? 0.0 : std::min(1.0, 2.0 * cols / crossings);
    error_ += shift_error + s.mass * diameter(kind_) * (partial + 2.0 * later_[i + 1] / q);
    pieces_ += span(s) * box.n_theta();
    for (const Segment& t : copies) forward(t, i + 1, sink);
  }

  /// Copy c carries the comb of source column c. Each column of the next box
  /// receives the exact comb mass inside it, spread uniformly; comb and
  /// uniform mass then differ by at most two teeth on every prefix, so the
  /// transport inside each column costs 2 * mass / (q * cols) turns per
  /// copy, and only columns after the next box can separate them further.
  template <class Sink>
  void split_refined(const Segment& s, std::size_t i, BoxCell cell, Sink& sink) {
    const detail::PushOp& op = ops_[i];
    const BoxExchangeSpec& box = *op.box;
    const BoxExchangeSpec& next = *ops_[i + 1].box;
    const std::uint32_t cols = box.cols_per_domain();
    const long double q = static_cast<long double>(box.q());
    const long double w = 1.0L / (q * cols);
    const long double start = s.start;
    const long double end = start + static_cast<long double>(s.length);
    const double density = s.mass / s.length;
    const double real = span(s) / s.length;
    const double nn = next.n_theta();
    const double diam = diameter(kind_);
    const double crossings = s.length * box.n_theta();
    const double partial = s.length >= 1.0 ? 0.0 : std::min(1.0, 2.0 * cols / crossings);
    pieces_ += span(s) * box.n_theta();
    for (std::uint32_t c = 0; c < cols; ++c) {
      cell.col = c;
      auto [dt, dy] = box.shift(cell, op.inv);
      const double y2 = s.y + dy;
      const double len_y = circle_length(kind_, y2);
      if (next.locate(0.0, y2).domain < 0) {
        // The next box leaves this height alone: an ordinary dense copy.
        error_ += s.mass / cols *
                  (len_y / (4.0 * static_cast<double>(q)) + diam * (partial + 2.0 * later_[i + 2] / static_cast<double>(q)));
        forward(Segment{wrap01(s.start + dt), s.length, y2, s.mass / cols, span(s) / cols}, i + 1, sink);
        continue;
      }
      // Length of {u in [0, x) : u lies in source column c}.
      auto comb = [&](long double x) {
        long double t = x * q;
        long double k = std::floor(t);
        long double f = (t - k) / q - static_cast<long double>(c) * w;
        return k * w + std::clamp(f, 0.0L, w);
      };
      double copy_mass = 0.0;
      for (double k = 0.0; k < nn; k += 1.0) {
        const long double a = k / nn - dt;
        const long double b = (k + 1.0) / nn - dt;
        for (int m = -1; m <= 2; ++m) {
          const long double lo = std::max(start, a + m);
          const long double hi = std::min(end, b + m);
          if (!(hi > lo)) continue;
          const double inside = static_cast<double>(comb(hi) - comb(lo));
          if (!(inside > 0.0)) continue;
          Segment t{wrap01(static_cast<double>(lo) + dt), static_cast<double>(hi - lo), y2, density * inside,
                    real * inside};
          copy_mass += t.mass;
          forward(t, i + 1, sink);
        }
      }
      error_ += 2.0 * s.mass * static_cast<double>(w) * len_y +
                copy_mass * diam * 2.0 * later_[i + 2] / static_cast<double>(q);
    }
  }

  MapExpr f_;
  PushOptions opt_;
  SurfaceKind kind_;
  std::vector<detail::PushOp> ops_;
  std::vector<double> later_;  // box columns applied after op i
  std::vector<double> refine_cost_;
  double error_ = 0.0;
  double pieces_ = 0.0;
  std::size_t emitted_ = 0;
};

/// f_* m, materialized. Exact while every segment meets at most
/// max_exact_splits box columns; beyond that the dense split is used and its
/// cost is added to error_bound.
inline SegmentMeasure push_segments(const MapExpr& f, const SegmentMeasure& m, const PushOptions& opt = {}) {
  if (m.kind != f.kind()) throw KindMismatch("segment measure and map live on different surfaces");
  SegmentPusher pusher(f, opt);
  SegmentMeasure out;
  out.kind = m.kind;
  for (const Segment& s : m.segments) pusher.push(s, [&](const Segment& t) { out.segments.push_back(t); });
  out.error_bound = m.error_bound + pusher.error_bound();
  out.exact_piece_count = pusher.pieces();
  return out;
}

/// Orbit measure of a rational rotation pushed through h: the q-point
/// lattice through (phase, y) is replaced by the circle it discretizes. The
/// returned bound covers that replacement: lattice atoms stay within 1/q of
/// their arc on every piece where h is a translation, and arcs cut by a
/// discontinuity cost at most the diameter.
inline double lattice_replacement_error(SurfaceKind kind, double pieces, double q) {
  const double theta_scale = kind == SurfaceKind::Annulus ? 1.0 : 2.0 * std::numbers::pi;
  return (theta_scale + diameter(kind) * pieces) / q;
}

inline SegmentMeasure push_circle_lattice(const MapExpr& h, double y, double q, const PushOptions& opt = {}) {
  SegmentMeasure m = push_segments(h, circle_measure(y, h.kind()), opt);
  m.error_bound += lattice_replacement_error(h.kind(), m.exact_piece_count, q);
  return m;
}

}  // namespace abclab
