#pragma once

// JSON for maps, measures and run ledgers; CSV for matrices and curves.
// Maps are written as a node table so shared subtrees stay shared. Wall
// times go to a separate timings document, which keeps ledgers
// byte-identical across runs with the same seed.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "abclab/abc_engine.hpp"
#include "abclab/diagnostics.hpp"
#include "abclab/errors.hpp"
#include "abclab/map_expr.hpp"
#include "abclab/measure.hpp"

namespace abclab {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string_view op_name(MapOp op) {
  switch (op) {
    case MapOp::Identity: return "identity";
    case MapOp::Rotation: return "rotation";
    case MapOp::BoxExchange: return "box_exchange";
    case MapOp::Compose: return "compose";
    case MapOp::Inverse: return "inverse";
    case MapOp::Conjugate: return "conjugate";
  }
  return "identity";
}

inline MapOp op_from_name(const std::string& s) {
  for (MapOp op : {MapOp::Identity, MapOp::Rotation, MapOp::BoxExchange, MapOp::Compose, MapOp::Inverse,
                   MapOp::Conjugate})
    if (op_name(op) == s) return op;
  throw ParseError("unknown map op '" + s + "'");
}

using NodePtr = std::shared_ptr<const MapExpr::Node>;

inline std::size_t emit_node(const NodePtr& n, std::map<const MapExpr::Node*, std::size_t>& ids, Json& nodes) {
  if (auto it = ids.find(n.get()); it != ids.end()) return it->second;
  Json j;
  j["op"] = op_name(n->op);
  switch (n->op) {
    case MapOp::Identity: break;
    case MapOp::Rotation:
      if (n->alpha) j["alpha"] = n->alpha->str();
      else j["alpha_value"] = n->alpha_value;
      break;
    case MapOp::BoxExchange: {
      const BoxExchangeSpec& b = *n->box;
      j["q"] = b.q();
      j["cols"] = b.cols_per_domain();
      j["rows"] = b.rows();
      j["y_lo"] = b.y_lo();
      j["y_hi"] = b.y_hi();
      j["perm"] = b.perm();
      break;
    }
    case MapOp::Compose:
    case MapOp::Conjugate:
      j["a"] = emit_node(n->a, ids, nodes);
      j["b"] = emit_node(n->b, ids, nodes);
      break;
    case MapOp::Inverse: j["a"] = emit_node(n->a, ids, nodes); break;
  }
  nodes.push_back(std::move(j));
  ids[n.get()] = nodes.size() - 1;
  return nodes.size() - 1;
}

template <class T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline Json map_to_json(const MapExpr& f) {
  Json nodes = Json::array();
  std::map<const MapExpr::Node*, std::size_t> ids;
  std::size_t root = detail::emit_node(f.node_ptr(), ids, nodes);
  Json j;
  j["surface"] = to_string(f.kind());
  j["root"] = root;
  j["nodes"] = std::move(nodes);
  return j;
}

inline MapExpr map_from_json(const Json& j) {
  try {
    const SurfaceKind kind = surface_from_string(detail::field<std::string>(j, "surface", "map"));
    const Json& nodes = j.at("nodes");
    if (!nodes.is_array()) throw ParseError("map: 'nodes' must be an array");
    std::vector<detail::NodePtr> built;
    built.reserve(nodes.size());
    auto child = [&](const Json& n, const char* key, std::size_t self) {
      auto k = detail::field<std::size_t>(n, key, "map node " + std::to_string(self));
      if (k >= self) throw ParseError("map node " + std::to_string(self) + ": child must precede its parent");
      return built[k];
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Json& n = nodes[i];
      const std::string where = "map node " + std::to_string(i);
      MapOp op = detail::op_from_name(detail::field<std::string>(n, "op", where));
      MapExpr e(kind);
      switch (op) {
        case MapOp::Identity: break;
        case MapOp::Rotation:
          e = n.contains("alpha") ? MapExpr::rotation(kind, Rational::parse(detail::field<std::string>(n, "alpha", where)))
                                  : MapExpr::rotation(kind, detail::field<double>(n, "alpha_value", where));
          break;
        case MapOp::BoxExchange:
          e = MapExpr::box_exchange(
              kind, BoxExchangeSpec(detail::field<std::int64_t>(n, "q", where), detail::field<std::uint32_t>(n, "cols", where),
                                    detail::field<std::uint32_t>(n, "rows", where), detail::field<double>(n, "y_lo", where),
                                    detail::field<double>(n, "y_hi", where),
                                    detail::field<std::vector<std::uint32_t>>(n, "perm", where)));
          break;
        case MapOp::Compose:
          e = MapExpr::compose(MapExpr::from_node(kind, child(n, "a", i)), MapExpr::from_node(kind, child(n, "b", i)));
          break;
        case MapOp::Inverse: e = MapExpr::inverse(MapExpr::from_node(kind, child(n, "a", i))); break;
        case MapOp::Conjugate:
          e = MapExpr::conjugate(MapExpr::from_node(kind, child(n, "a", i)), MapExpr::from_node(kind, child(n, "b", i)));
          break;
      }
      built.push_back(e.node_ptr());
    }
    auto root = detail::field<std::size_t>(j, "root", "map");
    if (root >= built.size()) throw ParseError("map: root out of range");
    return MapExpr::from_node(kind, built[root]);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("map: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("map: ") + e.what());
  }
}

inline Json measure_to_json(const DiscreteMeasure& mu) {
  Json j;
  j["surface"] = to_string(mu.kind());
  Json pts = Json::array();
  for (const auto& p : mu.points()) pts.push_back(p.c);
  j["points"] = std::move(pts);
  j["weights"] = mu.weights();
  return j;
}

inline DiscreteMeasure measure_from_json(const Json& j) {
  try {
    const SurfaceKind kind = surface_from_string(detail::field<std::string>(j, "surface", "measure"));
    auto coords = detail::field<std::vector<std::vector<double>>>(j, "points", "measure");
    auto weights = detail::field<std::vector<double>>(j, "weights", "measure");
    std::vector<SurfacePoint> pts;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const auto& c = coords[i];
      if (c.size() != 3) throw ParseError("measure: point " + std::to_string(i) + " needs three coordinates");
      SurfacePoint p{kind, {c[0], c[1], c[2]}};
      validate(p);
      pts.push_back(p);
    }
    return DiscreteMeasure(std::move(pts), std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("measure: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("measure: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ParseError(std::string("measure: ") + e.what());
  }
}

inline Json entry_to_json(const LedgerEntry& e) {
  Json j;
  j["stage"] = e.stage;
  j["id"] = e.id;
  j["measured"] = e.measured;
  j["bound"] = e.bound;
  j["pass"] = e.pass;
  return j;
}

inline Json state_to_json(const SchemeState& s) {
  Json j;
  j["n"] = s.n;
  j["alpha"] = s.alpha.str();
  j["eps"] = s.eps;
  j["eps_prev"] = s.eps_prev;
  j["eta"] = s.eta;
  j["delta"] = s.delta;
  j["nu"] = s.nu.str();
  j["bilipschitz"] = s.bilipschitz;
  j["kicker_rows"] = s.kicker_rows;
  Json entries = Json::array();
  for (const auto& e : s.ledger) entries.push_back(entry_to_json(e));
  j["entries"] = std::move(entries);
  j["passed"] = s.passed();
  return j;
}

/// The scientific record of a run: deterministic for a fixed seed.
inline Json ledger_to_json(SchemeMode mode, SurfaceKind kind, const std::vector<SchemeState>& states,
                           const std::vector<LedgerEntry>& cauchy, const IntervalLedger& intervals,
                           double tail_bound, const std::string& failed_condition = {}) {
  Json j;
  j["mode"] = to_string(mode);
  j["surface"] = to_string(kind);
  Json st = Json::array();
  bool pass = failed_condition.empty();
  for (const auto& s : states) {
    st.push_back(state_to_json(s));
    pass = pass && s.passed();
  }
  j["stages"] = std::move(st);
  Json c = Json::array();
  for (const auto& e : cauchy) {
    c.push_back(entry_to_json(e));
    pass = pass && e.pass;
  }
  j["cauchy"] = std::move(c);
  Json iv = Json::array();
  for (const auto& r : intervals.intervals) iv.push_back({r.lo.str(), r.hi.str()});
  j["intervals"] = std::move(iv);
  j["intervals_nested"] = intervals.nested();
  j["tail_bound"] = tail_bound;
  if (!failed_condition.empty()) j["failed_condition"] = failed_condition;
  j["passed"] = pass;
  return j;
}

inline Json ledger_to_json(const SchemeRun& run, SchemeMode mode, SurfaceKind kind) {
  return ledger_to_json(mode, kind, run.states, run.cauchy, run.intervals, run.tail_bound);
}

inline Json timings_to_json(const std::vector<LedgerEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries) arr.push_back({{"stage", e.stage}, {"id", e.id}, {"seconds", e.seconds}});
  return arr;
}

inline Json ergodicity_to_json(const ErgodicityReport& r) {
  Json j;
  j["q"] = r.q;
  j["region_eta"] = r.region_eta;
  j["radius"] = r.radius;
  j["max_value"] = r.max_value;
  j["mean_value"] = r.mean_value;
  j["values"] = r.values;
  j["proxy"] = "orbit measure of the final q-periodic map";
  return j;
}

inline Json emergence_to_json(const std::vector<EmergenceReport>& reports) {
  Json arr = Json::array();
  for (const auto& r : reports)
    arr.push_back({{"scale", r.scale}, {"mean_integrand", r.mean_integrand}, {"masses", r.masses}});
  return arr;
}

inline void write_matrix_csv(std::ostream& os, const std::vector<double>& ys,
                             const std::vector<std::vector<double>>& d) {
  os << "y,y_prime,d_k\n";
  os.precision(17);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i].size(); ++j) os << ys[i] << ',' << ys[j] << ',' << d[i][j] << '\n';
}

inline void write_emergence_csv(std::ostream& os, const std::vector<EmergenceReport>& reports) {
  os << "scale,sample_id,mass,integrand,floored,saturated\n";
  os.precision(17);
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.masses.size(); ++i)
      os << r.scale << ',' << i << ',' << r.masses[i] << ',' << r.integrand[i] << ',' << (r.floored[i] ? 1 : 0)
         << ',' << (r.saturated[i] ? 1 : 0) << '\n';
}

inline void write_ergodicity_csv(std::ostream& os, const ErgodicityReport& r) {
  os << "sample_id,theta,y,d_k_grid,radius\n";
  os.precision(17);
  for (std::size_t i = 0; i < r.values.size(); ++i)
    os << i << ',' << r.samples[i].theta << ',' << r.samples[i].y << ',' << r.values[i] << ',' << r.radius << '\n';
}

}  // namespace abclab
