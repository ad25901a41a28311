#pragma once

// Piecewise-translation permutation of equal grid boxes in annulus
// coordinates. The box grid covers T x [y_lo, y_hi); outside that band the
// map is the identity. The permutation is stored for one fundamental domain
// [0, 1/q) of the rotation R_{1/q} and replicated on the other q-1 domains,
// which makes the map commute with R_{1/q} exactly.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "abclab/geometry.hpp"

namespace abclab {

struct BoxCell {
  std::int64_t domain = -1;  // -1 when outside the box band
  std::uint32_t col = 0;
  std::uint32_t row = 0;
};

class BoxExchangeSpec {
 public:
  BoxExchangeSpec() = default;

  /// `perm` acts on the cols*rows boxes of one fundamental domain, indexed
  /// row-major (index = row*cols + col).
  BoxExchangeSpec(std::int64_t q, std::uint32_t cols, std::uint32_t rows, double y_lo, double y_hi,
                  std::vector<std::uint32_t> perm)
      : q_(q), cols_(cols), rows_(rows), y_lo_(y_lo), y_hi_(y_hi), perm_(std::move(perm)) {
    if (q_ < 1 || cols_ < 1 || rows_ < 1) throw std::invalid_argument("box grid dimensions must be positive");
    if (!(-1.0 <= y_lo_ && y_lo_ < y_hi_ && y_hi_ <= 1.0)) throw std::invalid_argument("bad box band");
    if (perm_.size() != static_cast<std::size_t>(cols_) * rows_)
      throw std::invalid_argument("permutation size must equal cols*rows");
    inverse_.assign(perm_.size(), UINT32_MAX);
    for (std::uint32_t i = 0; i < perm_.size(); ++i) {
      if (perm_[i] >= perm_.size() || inverse_[perm_[i]] != UINT32_MAX)
        throw std::invalid_argument("box map is not a permutation");
      inverse_[perm_[i]] = i;
    }
    row_height_ = (y_hi_ - y_lo_) / rows_;
    turn_cols_ = static_cast<double>(cols_) * static_cast<double>(q_);
  }

  /// Builds the exchange from a permutation of the whole n_theta x n_y grid,
  /// checking exhaustively that it commutes with the shift by n_theta/q
  /// columns.
  static BoxExchangeSpec from_full_grid(std::int64_t q, std::uint32_t n_theta, std::uint32_t n_y, double y_lo,
                                        double y_hi, const std::vector<std::uint32_t>& full_perm) {
    if (q < 1 || n_theta % q != 0) throw std::invalid_argument("q must divide n_theta");
    if (full_perm.size() != static_cast<std::size_t>(n_theta) * n_y)
      throw std::invalid_argument("permutation size must equal n_theta*n_y");
    const auto cols = static_cast<std::uint32_t>(n_theta / q);
    for (std::uint32_t i = 0; i < full_perm.size(); ++i) {
      std::uint32_t r = i / n_theta, c = i % n_theta;
      std::uint32_t j = full_perm[i];
      std::uint32_t tr = j / n_theta, tc = j % n_theta;
      std::uint32_t i2 = r * n_theta + (c + cols) % n_theta;
      std::uint32_t expect = tr * n_theta + (tc + cols) % n_theta;
      if (full_perm[i2] != expect) throw std::invalid_argument("permutation does not commute with R_{1/q}");
      if (c < cols && tc / cols != 0 && q > 1) {
        // Boxes must stay in their fundamental domain to be replicated.
        throw std::invalid_argument("permutation moves boxes across fundamental domains");
      }
    }
    std::vector<std::uint32_t> local(static_cast<std::size_t>(cols) * n_y);
    for (std::uint32_t r = 0; r < n_y; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) {
        std::uint32_t j = full_perm[r * n_theta + c];
        local[r * cols + c] = (j / n_theta) * cols + (j % n_theta);
      }
    return BoxExchangeSpec(q, cols, n_y, y_lo, y_hi, std::move(local));
  }

  std::int64_t q() const { return q_; }
  std::uint32_t cols_per_domain() const { return cols_; }
  std::uint32_t rows() const { return rows_; }
  double y_lo() const { return y_lo_; }
  double y_hi() const { return y_hi_; }
  double row_height() const { return row_height_; }
  /// Total number of box columns around the circle.
  double n_theta() const { return turn_cols_; }
  const std::vector<std::uint32_t>& perm() const { return perm_; }
  const std::vector<std::uint32_t>& inverse_perm() const { return inverse_; }
  std::size_t boxes_per_domain() const { return perm_.size(); }

  BoxCell locate(double theta, double y) const {
    BoxCell cell;
    if (!(y >= y_lo_ && y < y_hi_)) return cell;
    long double scaled = static_cast<long double>(theta) * q_;
    long double dom = std::floor(scaled);
    long double local = (scaled - dom) * cols_;
    auto col = static_cast<std::int64_t>(std::floor(local));
    if (col >= cols_) col = cols_ - 1;
    if (col < 0) col = 0;
    auto row = static_cast<std::int64_t>(std::floor((y - y_lo_) / row_height()));
    if (row >= rows_) row = rows_ - 1;
    if (row < 0) row = 0;
    cell.domain = static_cast<std::int64_t>(dom) % q_;
    cell.col = static_cast<std::uint32_t>(col);
    cell.row = static_cast<std::uint32_t>(row);
    return cell;
  }

  /// Translation (dtheta, dy) applied to points of `cell` by the map (or by
  /// its inverse).
  std::pair<double, double> shift(const BoxCell& cell, bool inverse) const {
    std::uint32_t idx = cell.row * cols_ + cell.col;
    std::uint32_t tgt = inverse ? inverse_[idx] : perm_[idx];
    auto tc = static_cast<double>(tgt % cols_);
    auto tr = static_cast<double>(tgt / cols_);
    double dtheta = (tc - cell.col) / turn_cols_;
    double dy = (tr - cell.row) * row_height();
    return {dtheta, dy};
  }

  AnnulusPoint apply(const AnnulusPoint& a, bool inverse, std::uint64_t* signature = nullptr) const {
    BoxCell cell = locate(a.theta, a.y);
    if (signature) {
      std::uint64_t h = cell.domain < 0 ? 0x9e3779b97f4a7c15ULL
                                        : (static_cast<std::uint64_t>(cell.domain) * 1000003ULL +
                                           cell.row * 10007ULL + cell.col + 1);
      *signature = (*signature ^ h) * 0x100000001b3ULL;
    }
    if (cell.domain < 0) return a;
    auto [dt, dy] = shift(cell, inverse);
    AnnulusPoint out;
    out.theta = wrap01(a.theta + dt);
    out.y = std::clamp(a.y + dy, y_lo_, y_hi_);
    return out;
  }

  /// Largest displacement of any box, measured in annulus coordinates
  /// (torus distance in theta, plain distance in y).
  double max_chart_displacement() const {
    double best = 0.0;
    for (std::uint32_t i = 0; i < perm_.size(); ++i) {
      BoxCell c{0, i % cols_, i / cols_};
      auto [dt, dy] = shift(c, false);
      best = std::max(best, std::hypot(dt, dy));
    }
    return best;
  }

  friend bool operator==(const BoxExchangeSpec& a, const BoxExchangeSpec& b) {
    return a.q_ == b.q_ && a.cols_ == b.cols_ && a.rows_ == b.rows_ && a.y_lo_ == b.y_lo_ && a.y_hi_ == b.y_hi_ &&
           a.perm_ == b.perm_;
  }

 private:
  std::int64_t q_ = 1;
  std::uint32_t cols_ = 1;
  std::uint32_t rows_ = 1;
  double y_lo_ = -1.0;
  double y_hi_ = 1.0;
  double row_height_ = 2.0;
  double turn_cols_ = 1.0;
  std::vector<std::uint32_t> perm_{0};
  std::vector<std::uint32_t> inverse_{0};
};

}  // namespace abclab
