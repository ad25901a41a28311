#pragma once

// Immutable expression trees of exactly invertible area-preserving maps.
// Every node is evaluated in annulus coordinates; surface points enter
// through the annulus chart and leave through pi.

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "abclab/box_exchange.hpp"
#include "abclab/geometry.hpp"
#include "abclab/rational.hpp"

namespace abclab {

enum class MapOp { Identity, Rotation, BoxExchange, Compose, Inverse, Conjugate };

class MapExpr {
 public:
  struct Node {
    MapOp op = MapOp::Identity;
    std::optional<Rational> alpha;  // exact rotation number, when known
    double alpha_value = 0.0;       // rotation number modulo 1
    std::shared_ptr<const BoxExchangeSpec> box;
    std::shared_ptr<const Node> a;  // Compose: outer f; Inverse: f; Conjugate: h
    std::shared_ptr<const Node> b;  // Compose: inner g; Conjugate: f
  };

  MapExpr() : MapExpr(SurfaceKind::Annulus) {}
  explicit MapExpr(SurfaceKind kind) : kind_(kind), node_(std::make_shared<Node>()) {}

  static MapExpr identity(SurfaceKind kind) { return MapExpr(kind); }

  static MapExpr rotation(SurfaceKind kind, const Rational& alpha) {
    auto n = std::make_shared<Node>();
    n->op = MapOp::Rotation;
    n->alpha = alpha;
    n->alpha_value = alpha.frac_double();
    return MapExpr(kind, std::move(n));
  }

  static MapExpr rotation(SurfaceKind kind, double alpha) {
    auto n = std::make_shared<Node>();
    n->op = MapOp::Rotation;
    n->alpha_value = wrap01(alpha);
    return MapExpr(kind, std::move(n));
  }

  static MapExpr box_exchange(SurfaceKind kind, BoxExchangeSpec spec) {
    auto n = std::make_shared<Node>();
    n->op = MapOp::BoxExchange;
    n->box = std::make_shared<const BoxExchangeSpec>(std::move(spec));
    return MapExpr(kind, std::move(n));
  }

  /// f o g.
  static MapExpr compose(const MapExpr& f, const MapExpr& g) {
    same_kind(f, g);
    auto n = std::make_shared<Node>();
    n->op = MapOp::Compose;
    n->a = f.node_;
    n->b = g.node_;
    return MapExpr(f.kind_, std::move(n));
  }

  static MapExpr inverse(const MapExpr& f) {
    auto n = std::make_shared<Node>();
    n->op = MapOp::Inverse;
    n->a = f.node_;
    return MapExpr(f.kind_, std::move(n));
  }

  /// h o f o h^-1.
  static MapExpr conjugate(const MapExpr& h, const MapExpr& f) {
    same_kind(h, f);
    auto n = std::make_shared<Node>();
    n->op = MapOp::Conjugate;
    n->a = h.node_;
    n->b = f.node_;
    return MapExpr(h.kind_, std::move(n));
  }

  SurfaceKind kind() const { return kind_; }
  MapOp op() const { return node_->op; }
  const Node& node() const { return *node_; }
  const std::shared_ptr<const Node>& node_ptr() const { return node_; }

  /// Child expressions, same surface.
  MapExpr first() const { return MapExpr(kind_, node_->a); }
  MapExpr second() const { return MapExpr(kind_, node_->b); }

  bool is_pure_rotation() const { return op() == MapOp::Identity || op() == MapOp::Rotation; }
  /// Rotation number of a pure rotation (0 for Identity).
  double rotation_value() const { return op() == MapOp::Rotation ? node_->alpha_value : 0.0; }

  static MapExpr from_node(SurfaceKind kind, std::shared_ptr<const Node> n) { return MapExpr(kind, std::move(n)); }

 private:
  MapExpr(SurfaceKind kind, std::shared_ptr<const Node> n) : kind_(kind), node_(std::move(n)) {}

  static void same_kind(const MapExpr& f, const MapExpr& g) {
    if (f.kind_ != g.kind_) throw KindMismatch("maps act on different surfaces");
  }

  SurfaceKind kind_;
  std::shared_ptr<const Node> node_;
};

namespace detail {

inline AnnulusPoint apply_node(const MapExpr::Node& n, AnnulusPoint p, bool inv, std::uint64_t* sig) {
  switch (n.op) {
    case MapOp::Identity: return p;
    case MapOp::Rotation: {
      p.theta = wrap01(p.theta + (inv ? -n.alpha_value : n.alpha_value));
      return p;
    }
    case MapOp::BoxExchange: return n.box->apply(p, inv, sig);
    case MapOp::Compose:
      if (!inv) return apply_node(*n.a, apply_node(*n.b, p, false, sig), false, sig);
      return apply_node(*n.b, apply_node(*n.a, p, true, sig), true, sig);
    case MapOp::Inverse: return apply_node(*n.a, p, !inv, sig);
    case MapOp::Conjugate: {
      AnnulusPoint u = apply_node(*n.a, p, true, sig);
      u = apply_node(*n.b, u, inv, sig);
      return apply_node(*n.a, u, false, sig);
    }
  }
  return p;
}

}  // namespace detail

/// f in annulus coordinates.
inline AnnulusPoint apply_chart(const MapExpr& f, const AnnulusPoint& p, bool inverse = false,
                                std::uint64_t* signature = nullptr) {
  return detail::apply_node(f.node(), p, inverse, signature);
}

inline SurfacePoint evaluate(const MapExpr& f, const SurfacePoint& p) {
  if (p.kind != f.kind()) throw KindMismatch("point and map live on different surfaces");
  return project_pi(apply_chart(f, annulus_chart(p)), f.kind());
}

inline SurfacePoint inverse_evaluate(const MapExpr& f, const SurfacePoint& p) {
  if (p.kind != f.kind()) throw KindMismatch("point and map live on different surfaces");
  return project_pi(apply_chart(f, annulus_chart(p), true), f.kind());
}

/// Evaluation that also hashes the sequence of boxes visited, so two points
/// with equal signatures went through the same translation pieces.
inline SurfacePoint evaluate_traced(const MapExpr& f, const SurfacePoint& p, std::uint64_t& signature) {
  signature = 0xcbf29ce484222325ULL;
  return project_pi(apply_chart(f, annulus_chart(p), false, &signature), f.kind());
}

/// f^k(p) by iteration.
inline SurfacePoint iterate(const MapExpr& f, SurfacePoint p, std::size_t k) {
  AnnulusPoint a = annulus_chart(p);
  for (std::size_t i = 0; i < k; ++i) a = apply_chart(f, a);
  return project_pi(a, f.kind());
}

/// Sum of box columns over every box node, counted with multiplicity of use
/// in one evaluation. Bounds how many discontinuity lines a circle meets.
inline double total_box_columns(const MapExpr::Node& n) {
  switch (n.op) {
    case MapOp::BoxExchange: return n.box->n_theta();
    case MapOp::Compose: return total_box_columns(*n.a) + total_box_columns(*n.b);
    case MapOp::Inverse: return total_box_columns(*n.a);
    case MapOp::Conjugate: return 2.0 * total_box_columns(*n.a) + total_box_columns(*n.b);
    default: return 0.0;
  }
}

/// Structural equality of two expression trees.
inline bool same_tree(const MapExpr::Node& x, const MapExpr::Node& y) {
  if (&x == &y) return true;
  if (x.op != y.op) return false;
  switch (x.op) {
    case MapOp::Identity: return true;
    case MapOp::Rotation: return x.alpha == y.alpha && x.alpha_value == y.alpha_value;
    case MapOp::BoxExchange: return *x.box == *y.box;
    case MapOp::Inverse: return same_tree(*x.a, *y.a);
    case MapOp::Compose:
    case MapOp::Conjugate: return same_tree(*x.a, *y.a) && same_tree(*x.b, *y.b);
  }
  return false;
}

inline bool operator==(const MapExpr& f, const MapExpr& g) {
  return f.kind() == g.kind() && same_tree(f.node(), g.node());
}

}  // namespace abclab
