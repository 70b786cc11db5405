#pragma once

// Follower communication topology and the induced consensus-error operators.
// Conventions: adjacency(i,j) == 1 iff follower i receives follower j's
// output; pinning(i) == 1 iff follower i receives the leader directly.

#include <Eigen/Dense>
#include <vector>

#include "dmfac/errors.hpp"

namespace dmfac {

struct CommGraph {
  Eigen::MatrixXi adjacency;  // n x n binary, zero diagonal
  Eigen::VectorXi pinning;    // length n, binary, at least one 1

  int n() const { return static_cast<int>(adjacency.rows()); }
};

// L = D_in - A (row sums exactly zero) and the diagonal pinning matrix C.
struct LaplacianPair {
  Eigen::MatrixXd laplacian;
  Eigen::MatrixXd pin_matrix;
};

inline CommGraph make_graph(Eigen::MatrixXi adjacency,
                            Eigen::VectorXi pinning) {
  const auto n = adjacency.rows();
  if (n < 1 || adjacency.cols() != n)
    throw ValidationError("adjacency must be square and non-empty");
  if (pinning.size() != n)
    throw ValidationError("pinning vector length must match adjacency");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0)
      throw ValidationError("adjacency diagonal must be zero (no self-loops)");
    for (Eigen::Index j = 0; j < n; ++j)
      if (adjacency(i, j) != 0 && adjacency(i, j) != 1)
        throw ValidationError("adjacency entries must be 0 or 1");
    if (pinning(i) != 0 && pinning(i) != 1)
      throw ValidationError("pinning entries must be 0 or 1");
  }
  if (pinning.sum() < 1)
    throw ValidationError("at least one follower must be pinned to the leader");
  return CommGraph{std::move(adjacency), std::move(pinning)};
}

inline LaplacianPair laplacian(const CommGraph& g) {
  const int n = g.n();
  LaplacianPair lp;
  lp.laplacian = Eigen::MatrixXd::Zero(n, n);
  lp.pin_matrix = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int degree = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (g.adjacency(i, j) == 1) {
        lp.laplacian(i, j) = -1.0;
        ++degree;
      }
    }
    lp.laplacian(i, i) = static_cast<double>(degree);  // row sum exactly 0
    lp.pin_matrix(i, i) = static_cast<double>(g.pinning(i));
  }
  return lp;
}

// Strong connectivity of the follower digraph plus at least one leader pin.
// Edge direction: information flows j -> i when adjacency(i,j) == 1; strong
// connectivity is direction-symmetric as a property, so forward+backward
// reachability from node 0 decides it.
inline bool is_connected_with_leader_access(const CommGraph& g) {
  const int n = g.n();
  if (g.pinning.sum() < 1) return false;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        int edge = transpose ? g.adjacency(w, v) : g.adjacency(v, w);
        if (edge == 1 && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
          ++count;
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

// max_i (c_i + sum_j a_ij): the worst-case row gain of (L + C) acting on a
// uniformly bounded error vector; feeds the twin-layer stability condition.
inline double max_row_gain(const CommGraph& g) {
  const int n = g.n();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = static_cast<double>(g.pinning(i));
    for (int j = 0; j < n; ++j) row += static_cast<double>(g.adjacency(i, j));
    if (row > best) best = row;
  }
  return best;
}

}  // namespace dmfac
