#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kc::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Spanning-tree basis over sources [0,n), sinks [n,n+m) and an artificial root.
// The tree is rebuilt by a DFS after every pivot; callers of this solver are
// small enough that O(nodes) per pivot is not the bottleneck.
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   std::span<const double> cost)
      : n_(supply.size()), m_(demand.size()), root_(n_ + m_), real_arcs_(n_ * m_) {
    const std::size_t nodes = n_ + m_ + 1;
    const std::size_t arcs = real_arcs_ + n_ + m_;
    tail_.resize(arcs);
    head_.resize(arcs);
    cost_.resize(arcs);
    flow_.assign(arcs, 0.0);

    double max_cost = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < m_; ++k) {
        const std::size_t a = i * m_ + k;
        tail_[a] = i;
        head_[a] = n_ + k;
        cost_[a] = cost[a];
        max_cost = std::max(max_cost, cost[a]);
      }
    }
    const double artificial = (max_cost + 1.0) * static_cast<double>(nodes);
    tolerance_ = 1e-12 * (max_cost + 1.0);

    tree_adj_.assign(nodes, {});
    for (std::size_t v = 0; v < n_ + m_; ++v) {
      const std::size_t a = real_arcs_ + v;
      if (v < n_) {
        tail_[a] = v;
        head_[a] = root_;
        flow_[a] = supply[v];
      } else {
        tail_[a] = root_;
        head_[a] = v;
        flow_[a] = demand[v - n_];
      }
      cost_[a] = artificial;
      tree_adj_[v].push_back(a);
      tree_adj_[root_].push_back(a);
    }

    parent_.resize(nodes);
    pred_.resize(nodes);
    up_.resize(nodes);
    depth_.resize(nodes);
    pi_.resize(nodes);
    rebuild_tree();

    block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  void run() {
    while (true) {
      const std::size_t entering = find_entering();
      if (entering == kNone) break;
      pivot(entering);
      ++pivots_;
    }
  }

  TransportSolution solution() const {
    TransportSolution out;
    out.flow.assign(flow_.begin(), flow_.begin() + static_cast<std::ptrdiff_t>(real_arcs_));
    for (std::size_t a = 0; a < real_arcs_; ++a) out.cost += cost_[a] * flow_[a];
    out.pivots = pivots_;
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double reduced_cost(std::size_t a) const { return cost_[a] + pi_[tail_[a]] - pi_[head_[a]]; }

  // Block search: best violating arc within the first block that has one.
  std::size_t find_entering() {
    std::size_t best = kNone;
    double best_rc = -tolerance_;
    std::size_t scanned_in_block = 0;
    for (std::size_t count = 0; count < real_arcs_; ++count) {
      const std::size_t a = next_arc_;
      next_arc_ = (next_arc_ + 1 == real_arcs_) ? 0 : next_arc_ + 1;
      if (!in_tree(a)) {
        const double rc = reduced_cost(a);
        if (rc < best_rc) {
          best_rc = rc;
          best = a;
        }
      }
      if (++scanned_in_block == block_) {
        if (best != kNone) return best;
        scanned_in_block = 0;
      }
    }
    return best;
  }

  bool in_tree(std::size_t a) const {
    const std::size_t u = tail_[a];
    const std::size_t v = head_[a];
    return (pred_[u] == a && parent_[u] == v) || (pred_[v] == a && parent_[v] == u);
  }

  void pivot(std::size_t entering) {
    const std::size_t first = tail_[entering];
    const std::size_t second = head_[entering];

    std::size_t a = first;
    std::size_t b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        a = parent_[a];
      } else {
        b = parent_[b];
      }
    }
    const std::size_t join = a;

    // Flow travels first -> second -> join -> first. Strict comparison on the
    // first path and non-strict on the second keeps the tree strongly feasible.
    double delta = kInf;
    std::size_t leaving_node = kNone;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      const double d = up_[u] ? flow_[pred_[u]] : kInf;
      if (d < delta) {
        delta = d;
        leaving_node = u;
      }
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      const double d = up_[u] ? kInf : flow_[pred_[u]];
      if (d <= delta) {
        delta = d;
        leaving_node = u;
      }
    }

    flow_[entering] += delta;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      flow_[pred_[u]] += up_[u] ? -delta : delta;
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      flow_[pred_[u]] += up_[u] ? delta : -delta;
    }

    const std::size_t leaving = pred_[leaving_node];
    flow_[leaving] = 0.0;
    remove_tree_arc(leaving);
    tree_adj_[tail_[entering]].push_back(entering);
    tree_adj_[head_[entering]].push_back(entering);
    rebuild_tree();
  }

  void remove_tree_arc(std::size_t arc) {
    for (std::size_t v : {tail_[arc], head_[arc]}) {
      auto& adj = tree_adj_[v];
      adj.erase(std::find(adj.begin(), adj.end(), arc));
    }
  }

  void rebuild_tree() {
    std::vector<std::size_t> stack{root_};
    parent_[root_] = kNone;
    pred_[root_] = kNone;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t arc : tree_adj_[u]) {
        if (arc == pred_[u]) continue;
        const bool child_is_tail = tail_[arc] != u;
        const std::size_t v = child_is_tail ? tail_[arc] : head_[arc];
        parent_[v] = u;
        pred_[v] = arc;
        up_[v] = child_is_tail;
        depth_[v] = depth_[u] + 1;
        // Tree arcs have zero reduced cost.
        pi_[v] = child_is_tail ? pi_[u] - cost_[arc] : pi_[u] + cost_[arc];
        stack.push_back(v);
      }
    }
  }

  std::size_t n_;
  std::size_t m_;
  std::size_t root_;
  std::size_t real_arcs_;
  std::vector<std::size_t> tail_;
  std::vector<std::size_t> head_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::vector<std::size_t>> tree_adj_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> pred_;
  std::vector<char> up_;
  std::vector<std::size_t> depth_;
  std::vector<double> pi_;
  double tolerance_ = 0.0;
  std::size_t block_ = 10;
  std::size_t next_arc_ = 0;
  std::size_t pivots_ = 0;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
  TransportSimplex simplex(supply, demand, cost);
  simplex.run();
  return simplex.solution();
}

}  // namespace kc::detail
