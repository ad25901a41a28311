#pragma once

// Primal network simplex for uncapacitated min-cost flow with real-valued
// supplies and costs. Spanning tree kept in parent/thread/succ_num form with
// an artificial root, block-search pivoting and strongly feasible leaving
// arc selection (the classic layout used by LEMON).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace abclab {

class NetworkSimplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  explicit NetworkSimplex(int node_count) : n_(node_count), supply_(static_cast<std::size_t>(node_count), 0.0) {
    if (node_count < 1) throw std::invalid_argument("network needs at least one node");
  }

  void reserve_arcs(std::size_t m) {
    source_.reserve(m);
    target_.reserve(m);
    cost_.reserve(m);
  }

  int add_arc(int from, int to, double cost) {
    if (from < 0 || from >= n_ || to < 0 || to >= n_) throw std::out_of_range("arc endpoint out of range");
    source_.push_back(from);
    target_.push_back(to);
    cost_.push_back(cost);
    return static_cast<int>(source_.size()) - 1;
  }

  /// Positive supply leaves the node, negative supply enters it.
  void set_supply(int node, double s) { supply_.at(static_cast<std::size_t>(node)) = s; }

  Status run() {
    init();
    while (find_entering_arc()) {
      find_join_node();
      if (!find_leaving_arc()) return Status::Unbounded;
      change_flow();
      update_tree_structure();
      update_potential();
    }
    double scale = 0.0;
    for (double s : supply_) scale += std::abs(s);
    for (std::size_t e = arc_num_; e < all_arc_num_; ++e)
      if (flow_[e] > 1e-9 * std::max(1.0, scale)) return Status::Infeasible;
    return Status::Optimal;
  }

  std::size_t arc_count() const { return arc_num_; }
  double flow(int arc) const { return flow_[static_cast<std::size_t>(arc)]; }
  double potential(int node) const { return pi_[static_cast<std::size_t>(node)]; }

  double total_cost() const {
    double c = 0.0;
    for (std::size_t e = 0; e < arc_num_; ++e)
      if (flow_[e] != 0.0) c += flow_[e] * cost_[e];
    return c;
  }

 private:
  static constexpr int kUp = 1;
  static constexpr int kDown = -1;
  static constexpr signed char kStateUpper = -1;
  static constexpr signed char kStateTree = 0;
  static constexpr signed char kStateLower = 1;

  void init() {
    arc_num_ = source_.size();
    all_arc_num_ = arc_num_ + static_cast<std::size_t>(n_);
    const std::size_t nodes = static_cast<std::size_t>(n_) + 1;
    source_.resize(all_arc_num_);
    target_.resize(all_arc_num_);
    cost_.resize(all_arc_num_);
    flow_.assign(all_arc_num_, 0.0);
    state_.assign(all_arc_num_, kStateLower);
    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    thread_.assign(nodes, 0);
    rev_thread_.assign(nodes, 0);
    succ_num_.assign(nodes, 0);
    last_succ_.assign(nodes, 0);
    pred_dir_.assign(nodes, kUp);
    pi_.assign(nodes, 0.0);

    double max_cost = 0.0;
    for (std::size_t e = 0; e < arc_num_; ++e) max_cost = std::max(max_cost, std::abs(cost_[e]));
    const double art_cost = (max_cost + 1.0) * static_cast<double>(n_);
    eps_ = 1e-13 * (max_cost + 1.0);

    const int root = n_;
    root_ = root;
    parent_[root] = -1;
    pred_[root] = -1;
    thread_[root] = 0;
    rev_thread_[0] = root;
    succ_num_[root] = n_ + 1;
    last_succ_[root] = root - 1;
    pi_[root] = 0.0;

    for (int u = 0; u < n_; ++u) {
      auto e = arc_num_ + static_cast<std::size_t>(u);
      parent_[u] = root;
      pred_[u] = static_cast<int>(e);
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kStateTree;
      if (supply_[u] >= 0.0) {
        pred_dir_[u] = kUp;
        pi_[u] = 0.0;
        source_[e] = u;
        target_[e] = root;
        flow_[e] = supply_[u];
        cost_[e] = 0.0;
      } else {
        pred_dir_[u] = kDown;
        pi_[u] = art_cost;
        source_[e] = root;
        target_[e] = u;
        flow_[e] = -supply_[u];
        cost_[e] = art_cost;
      }
    }
    block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(all_arc_num_))));
    next_arc_ = 0;
  }

  double reduced(std::size_t e) const {
    return state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
  }

  bool find_entering_arc() {
    // Artificial arcs stay eligible so that a leftover imbalance can be
    // pushed back into the real network.
    const std::size_t m = all_arc_num_;
    double min = -eps_;
    std::size_t cnt = block_size_;
    bool found = false;
    std::size_t e = next_arc_;
    for (std::size_t k = 0; k < m; ++k, e = (e + 1 == m ? 0 : e + 1)) {
      if (state_[e] != kStateTree) {
        double c = reduced(e);
        if (c < min) {
          min = c;
          in_arc_ = e;
          found = true;
        }
      }
      if (--cnt == 0) {
        if (found) {
          next_arc_ = e + 1 == m ? 0 : e + 1;
          return true;
        }
        cnt = block_size_;
      }
    }
    if (found) next_arc_ = in_arc_;
    return found;
  }

  void find_join_node() {
    int u = source_[in_arc_];
    int v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v])
        u = parent_[u];
      else
        v = parent_[v];
    }
    join_ = u;
  }

  bool find_leaving_arc() {
    int first, second;
    if (state_[in_arc_] == kStateLower) {
      first = source_[in_arc_];
      second = target_[in_arc_];
    } else {
      first = target_[in_arc_];
      second = source_[in_arc_];
    }
    const double inf = std::numeric_limits<double>::infinity();
    delta_ = inf;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      double d = pred_dir_[u] == kDown ? inf : flow_[pred_[u]];
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      double d = pred_dir_[u] == kUp ? inf : flow_[pred_[u]];
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    return result != 0;
  }

  void change_flow() {
    if (delta_ > 0.0) {
      double val = state_[in_arc_] * delta_;
      flow_[in_arc_] += val;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
      for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
    }
    state_[in_arc_] = kStateTree;
    auto out_arc = static_cast<std::size_t>(pred_[u_out_]);
    flow_[out_arc] = 0.0;
    state_[out_arc] = kStateLower;
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = static_cast<int>(in_arc_);
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
      int stem = u_in_;
      int par_stem = v_in_;
      int last = last_succ_[u_in_];
      int after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        int next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);
        int before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;
        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;
        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;
      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = static_cast<int>(in_arc_);
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
      succ_num_[u_in_] = old_succ_num;
    }

    int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int n_;
  int root_ = 0;
  std::vector<double> supply_;
  std::vector<int> source_, target_;
  std::vector<double> cost_, flow_;
  std::vector<signed char> state_;
  std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_, pred_dir_;
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;
  std::size_t arc_num_ = 0, all_arc_num_ = 0;
  std::size_t block_size_ = 10, next_arc_ = 0, in_arc_ = 0;
  int join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  double delta_ = 0.0, eps_ = 0.0;
};

}  // namespace abclab
