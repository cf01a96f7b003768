#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/random.hpp"

namespace privsub {

// Directed communication graph on agents 0..n-1. An arc (j, i) means agent i
// receives agent j's estimate. Self loops are not stored.
class NetworkGraph {
 public:
  explicit NetworkGraph(int n) : n_(n) {
    if (n < 1) throw DomainError("network needs at least one agent");
  }

  static NetworkGraph ring(int n) {
    NetworkGraph g(n);
    for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
    return g;
  }

  static NetworkGraph complete(int n) {
    NetworkGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g.add_arc(i, j);
    return g;
  }

  void add_arc(int from, int to) {
    check(from);
    check(to);
    if (from != to) arcs_.emplace(from, to);
  }

  // Both directions.
  void add_edge(int a, int b) {
    add_arc(a, b);
    add_arc(b, a);
  }

  int size() const { return n_; }
  const std::set<std::pair<int, int>>& arcs() const { return arcs_; }
  bool has_arc(int from, int to) const { return arcs_.count({from, to}) > 0; }

  // N_i = {j : (j, i) is an arc}.
  std::vector<int> neighbors(int i) const {
    check(i);
    std::vector<int> out;
    for (const auto& [from, to] : arcs_)
      if (to == i) out.push_back(from);
    return out;
  }

  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  bool is_symmetric() const {
    return std::all_of(arcs_.begin(), arcs_.end(),
                       [&](const auto& a) { return has_arc(a.second, a.first); });
  }

 private:
  void check(int i) const {
    if (i < 0 || i >= n_) throw DomainError("agent index " + std::to_string(i) + " out of range");
  }

  int n_;
  std::set<std::pair<int, int>> arcs_;
};

namespace detail {
inline std::vector<bool> reachable(const NetworkGraph& g, bool forward) {
  const int n = g.size();
  std::vector<std::vector<int>> adj(n);
  for (const auto& [from, to] : g.arcs()) {
    if (forward) adj[from].push_back(to);
    else adj[to].push_back(from);
  }
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}
}  // namespace detail

inline bool is_strongly_connected(const NetworkGraph& g) {
  const auto fwd = detail::reachable(g, true);
  const auto bwd = detail::reachable(g, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

// Metropolis weights: a_ij = 1 / (1 + max(deg_i, deg_j)) on arcs, the
// diagonal absorbs the remainder of each row.
inline Eigen::MatrixXd build_metropolis_weights(const NetworkGraph& g) {
  if (!g.is_symmetric())
    throw ConstructionUnsupportedError("Metropolis weights need a symmetric graph");
  if (!is_strongly_connected(g))
    throw ConnectivityError("graph is not strongly connected");
  const int n = g.size();
  std::vector<int> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = g.degree(i);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [j, i] : g.arcs()) m(i, j) = 1.0 / (1.0 + std::max(deg[i], deg[j]));
  for (int i = 0; i < n; ++i) m(i, i) = 1.0 - m.row(i).sum();
  return m;
}

inline bool validate_double_stochastic(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.size() == 0) return false;
  if (!m.allFinite()) return false;
  if (m.minCoeff() < -tol) return false;
  const Eigen::VectorXd rows = m.rowwise().sum();
  const Eigen::VectorXd cols = m.colwise().sum().transpose();
  return (rows.array() - 1.0).abs().maxCoeff() <= tol &&
         (cols.array() - 1.0).abs().maxCoeff() <= tol;
}

// Random strictly positive doubly stochastic matrix: a convex combination of
// all cyclic shifts (which makes every entry positive) and a few random
// permutation matrices.
inline Eigen::MatrixXd random_doubly_stochastic(int n, Rng& rng, int extra_permutations = 2) {
  if (n < 1) throw DomainError("matrix size must be positive");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  double total = 0.0;
  for (int s = 0; s < n; ++s) {
    const double w = uniform(rng, 0.2, 1.0);
    total += w;
    for (int i = 0; i < n; ++i) m(i, (i + s) % n) += w;
  }
  for (int p = 0; p < extra_permutations; ++p) {
    const double w = uniform01(rng);
    total += w;
    const auto perm = random_permutation(rng, n);
    for (int i = 0; i < n; ++i) m(i, perm[i]) += w;
  }
  return m / total;
}

// (A, b) view of the weight matrix from the malicious agent's side: A holds
// weights among regular agents, b the weights regular agents put on the
// malicious agent. The malicious agent's own row is kept so the partition can
// be reassembled.
struct AdjacencyPartition {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  int malicious_index = 0;
  Eigen::RowVectorXd malicious_row;

  int regular_count() const { return static_cast<int>(A.rows()); }

  // (A, b) as one (n-1) x n matrix.
  Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd w(A.rows(), A.cols() + 1);
    w << A, b;
    return w;
  }

  // Network ids of the regular agents, in the row order of A.
  std::vector<int> regular_agents() const {
    std::vector<int> ids;
    for (int i = 0; i < regular_count() + 1; ++i)
      if (i != malicious_index) ids.push_back(i);
    return ids;
  }

  Eigen::MatrixXd reassemble() const {
    const int n = regular_count() + 1;
    if (malicious_row.size() != n) throw DomainError("partition has no malicious row to reassemble");
    const auto ids = regular_agents();
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n - 1; ++r) {
      for (int c = 0; c < n - 1; ++c) m(ids[r], ids[c]) = A(r, c);
      m(ids[r], malicious_index) = b(r);
    }
    m.row(malicious_index) = malicious_row;
    return m;
  }
};

inline AdjacencyPartition partition(const Eigen::MatrixXd& m, int malicious_index) {
  const auto n = m.rows();
  if (m.cols() != n) throw DomainError("adjacency matrix must be square");
  if (malicious_index < 0 || malicious_index >= n)
    throw DomainError("malicious index " + std::to_string(malicious_index) + " out of range");
  AdjacencyPartition p;
  p.malicious_index = malicious_index;
  p.malicious_row = m.row(malicious_index);
  std::vector<int> ids;
  for (int i = 0; i < n; ++i)
    if (i != malicious_index) ids.push_back(i);
  const auto k = static_cast<Eigen::Index>(ids.size());
  p.A.resize(k, k);
  p.b.resize(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) p.A(r, c) = m(ids[r], ids[c]);
    p.b(r) = m(ids[r], malicious_index);
  }
  return p;
}

}  // namespace privsub
