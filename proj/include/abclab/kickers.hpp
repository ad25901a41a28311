#pragma once

// The two commuting conjugacy increments: an equidistributing box exchange
// (ergodic scheme) and a color-sorting box exchange that separates the
// images of nearby circles (emergence scheme). Both are built on one
// R_{1/q} fundamental domain, so they commute with R_{1/q} exactly.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "abclab/box_exchange.hpp"
#include "abclab/errors.hpp"
#include "abclab/lebesgue_grid.hpp"
#include "abclab/map_expr.hpp"
#include "abclab/segments.hpp"
#include "abclab/separation.hpp"

namespace abclab {

struct ErgodicKickerOptions {
  std::size_t box_cap = std::size_t{1} << 18;  // boxes per fundamental domain
  std::size_t y_grid = 64;
  std::size_t check_k_theta = 32;
  std::size_t check_k_y = 64;
};

struct ErgodicCertificate {
  double eps = 0.0;
  std::vector<double> ys;
  std::vector<double> values;  // bound on d_K(h_* Leb_{T x {y}}, Leb_grid)
  double radius = 0.0;         // d_K(Leb_grid, Leb)
  double max_value = 0.0;
  bool holds() const { return max_value <= eps + radius; }
};

struct ErgodicKicker {
  MapExpr map;
  std::uint32_t rows = 0;
  std::uint32_t cols_per_domain = 0;
  ErgodicCertificate certificate;
};

/// Digit-interleaved transpose on an (t*m) x m domain grid: box (u*t + v, r)
/// goes to (v*m + r, u). Row r is spread over all m rows, each row receiving
/// t boxes spaced one m-th of the domain apart.
inline std::vector<std::uint32_t> transpose_permutation(std::uint32_t m, std::uint32_t t) {
  const std::uint32_t cols = t * m;
  std::vector<std::uint32_t> perm(static_cast<std::size_t>(cols) * m);
  for (std::uint32_t r = 0; r < m; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      std::uint32_t u = c / t, v = c % t;
      perm[r * cols + c] = u * cols + (v * m + r);
    }
  return perm;
}

/// max over the y-grid of I_eps of the certified d_K(h_* Leb_{T x {y}}, Leb).
inline ErgodicCertificate certify_ergodic(const MapExpr& h, std::int64_t q, double eps,
                                          const ErgodicKickerOptions& opt = {}) {
  ErgodicCertificate cert;
  cert.eps = eps;
  cert.ys = midpoint_grid(-1.0 + eps, 1.0 - eps, opt.y_grid);
  const LebesgueGrid grid(h.kind(), opt.check_k_theta, opt.check_k_y, 1.0 / static_cast<double>(q));
  cert.radius = grid.radius();
  for (double y : cert.ys) {
    double v = pushforward_to_lebesgue(h, circle_measure(y, h.kind()), grid).value;
    cert.values.push_back(v);
    cert.max_value = std::max(cert.max_value, v);
  }
  return cert;
}

inline ErgodicKicker build_ergodic_kicker(std::int64_t q, double eps, SurfaceKind kind,
                                          const ErgodicKickerOptions& opt = {}) {
  if (q < 1) throw DomainError("kicker needs q >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("kicker needs 0 < eps < 1");
  const double y_lo = -1.0 + eps / 4.0;
  const double y_hi = 1.0 - eps / 4.0;
  for (std::uint32_t m = 2;; m *= 2) {
    const auto t = static_cast<std::uint32_t>(std::max<std::int64_t>(1, (m + q - 1) / q));
    if (static_cast<std::size_t>(t) * m * m > opt.box_cap)
      throw ResolutionExceeded("ergodic kicker certificate not met under the box cap");
    BoxExchangeSpec spec(q, t * m, m, y_lo, y_hi, transpose_permutation(m, t));
    MapExpr h = MapExpr::box_exchange(kind, std::move(spec));
    ErgodicCertificate cert = certify_ergodic(h, q, eps, opt);
    if (cert.holds()) return {h, m, t * m, std::move(cert)};
  }
}

inline ErgodicKicker build_ergodic_kicker(std::int64_t q, double eps, SurfaceKind kind, std::size_t box_cap) {
  ErgodicKickerOptions opt;
  opt.box_cap = box_cap;
  return build_ergodic_kicker(q, eps, kind, opt);
}

struct EmergenceKickerOptions {
  std::size_t box_cap = std::size_t{1} << 18;
  std::uint32_t columns_per_color = 2;
  std::size_t y_grid = 64;
  std::size_t atoms = 128;  // support of each mu_y in the separation matrix
};

struct SeparationCertificate {
  std::size_t colors = 2;
  double eta_meas = 0.0;
  std::vector<double> ys;      // y-grid points of I_eps0
  std::vector<double> masses;  // Leb_I{y' : d_K(g_* mu_y, g_* mu_y') <= 3 eta_meas}
  double max_mass = 0.0;
};

struct EmergenceKicker {
  MapExpr map;
  SeparationCertificate certificate;
  double displacement_bound = 0.0;  // certified d_C0(g, id) = d_C0(g^-1, id)
  std::uint32_t block_rows = 0;
  std::uint32_t blocks_per_domain = 0;
};

namespace detail {

/// Lipschitz constants of pi in theta and in y over the chart band [lo, hi].
inline std::pair<double, double> chart_lipschitz(SurfaceKind kind, double lo, double hi) {
  const double two_pi = 2.0 * std::numbers::pi;
  switch (kind) {
    case SurfaceKind::Annulus: return {1.0, 1.0};
    case SurfaceKind::Sphere: {
      double ymin = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
      double ymax = std::max(std::abs(lo), std::abs(hi));
      return {two_pi * std::sqrt(1.0 - ymin * ymin), 1.0 / std::sqrt(1.0 - ymax * ymax)};
    }
    case SurfaceKind::Disk: {
      double rlo = std::sqrt((1.0 + lo) / 2.0);
      double rhi = std::sqrt((1.0 + hi) / 2.0);
      return {two_pi * rhi, 1.0 / (4.0 * rlo)};
    }
  }
  return {1.0, 1.0};
}

}  // namespace detail

/// Upper bound on sup_x dist(g(x), x) over one box-exchange: every point of
/// a box moves along a chart segment inside the rows it spans, whose length
/// is bounded through the Lipschitz constants of pi on those rows.
inline double box_displacement_bound(const BoxExchangeSpec& box, SurfaceKind kind) {
  double best = 0.0;
  const double h = box.row_height();
  for (std::uint32_t i = 0; i < box.boxes_per_domain(); ++i) {
    BoxCell c{0, i % box.cols_per_domain(), i / box.cols_per_domain()};
    auto [dt, dy] = box.shift(c, false);
    double lo = box.y_lo() + c.row * h;
    double lo2 = lo + dy;
    auto [lt, ly] = detail::chart_lipschitz(kind, std::min(lo, lo2), std::max(lo, lo2) + h);
    double a = std::abs(dt);
    best = std::max(best, lt * std::min(a, 1.0 - a) + ly * std::abs(dy));
  }
  return best;
}

/// Each pearl block holds `colors` sub-rows and colors*s columns; sub-row c
/// is sorted into vertical strip c of its block.
inline std::vector<std::uint32_t> pearl_permutation(std::uint32_t colors, std::uint32_t s, std::uint32_t blocks,
                                                    std::uint32_t block_rows) {
  const std::uint32_t bw = colors * s;
  const std::uint32_t cols = blocks * bw;
  const std::uint32_t rows = block_rows * colors;
  std::vector<std::uint32_t> perm(static_cast<std::size_t>(cols) * rows);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      std::uint32_t br = r / colors, sub = r % colors;
      std::uint32_t bc = c / bw, x = c % bw;
      std::uint32_t tc = bc * bw + sub * s + x % s;
      std::uint32_t tr = br * colors + x / s;
      perm[r * cols + c] = tr * cols + tc;
    }
  return perm;
}

/// Separation certificate for g: the largest eta with mass <= 1/colors on
/// every grid row of I_eps0, measured on the exact d_K matrix.
inline SeparationCertificate certify_separation(const MapExpr& g, double eps0, std::size_t colors,
                                                const EmergenceKickerOptions& opt = {}) {
  SeparationCertificate cert;
  cert.colors = colors;
  const auto ys = midpoint_grid(-1.0, 1.0, opt.y_grid);
  const auto d = separation_matrix(g, ys, opt.atoms);
  const std::size_t allowed = ys.size() / colors;  // rows with mass <= 1/colors
  double threshold = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ys.size(); ++i)
    if (std::abs(ys[i]) < 1.0 - eps0) rows.push_back(i);
  if (allowed == 0 || rows.empty()) throw InfeasibleSeparation("grid too coarse for the requested colors");
  for (std::size_t i : rows) {
    std::vector<double> sorted = d[i];
    std::sort(sorted.begin(), sorted.end());
    threshold = std::min(threshold, sorted[allowed]);
  }
  // Counts stay <= allowed for every 3 eta strictly below the threshold.
  double eta = threshold / 3.0;
  while (eta > 0.0 && 3.0 * eta >= threshold) eta = std::nextafter(eta, 0.0);
  if (!(eta > 0.0)) throw InfeasibleSeparation("no positive eta reaches mass <= 1/colors");
  cert.eta_meas = eta;
  for (std::size_t i : rows) {
    cert.ys.push_back(ys[i]);
    cert.masses.push_back(row_mass(d[i], 3.0 * eta));
    cert.max_mass = std::max(cert.max_mass, cert.masses.back());
  }
  return cert;
}

/// Support margin: g is the identity outside M_{eta0}. Pearl blocks are
/// sized so that the displacement bound stays below eps0.
inline EmergenceKicker build_emergence_kicker(std::int64_t q, double eps0, double eta0, std::size_t colors,
                                              SurfaceKind kind, const EmergenceKickerOptions& opt = {}) {
  if (q < 1) throw DomainError("kicker needs q >= 1");
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw DomainError("kicker needs 0 < eps0 < 1");
  if (!(eta0 > 0.0 && eta0 < 1.0)) throw DomainError("kicker needs 0 < eta0 < 1");
  if (colors < 2) throw DomainError("kicker needs at least two colors");
  const double y_lo = -1.0 + eta0;
  const double y_hi = 1.0 - eta0;
  auto [lt, ly] = detail::chart_lipschitz(kind, y_lo, y_hi);
  const double band = y_hi - y_lo;
  const double height = std::min(eps0 / 2.0, eps0 / (2.0 * ly));
  const double width = eps0 / (2.0 * lt);
  const auto block_rows = static_cast<std::uint32_t>(std::ceil(band / height));
  const double domain = 1.0 / static_cast<double>(q);
  const auto blocks = static_cast<std::uint32_t>(std::max(1.0, std::ceil(domain / width)));
  const auto c = static_cast<std::uint32_t>(colors);
  const double boxes = static_cast<double>(block_rows) * c * blocks * c * opt.columns_per_color;
  if (boxes > static_cast<double>(opt.box_cap))
    throw ResolutionExceeded("emergence kicker pearls exceed the box cap");
  BoxExchangeSpec spec(q, blocks * c * opt.columns_per_color, block_rows * c, y_lo, y_hi,
                       pearl_permutation(c, opt.columns_per_color, blocks, block_rows));
  EmergenceKicker out;
  out.displacement_bound = box_displacement_bound(spec, kind);
  if (out.displacement_bound > eps0) throw ResolutionExceeded("pearl displacement bound exceeds eps0");
  out.block_rows = block_rows;
  out.blocks_per_domain = blocks;
  out.map = MapExpr::box_exchange(kind, std::move(spec));
  out.certificate = certify_separation(out.map, eps0, colors, opt);
  return out;
}

}  // namespace abclab
