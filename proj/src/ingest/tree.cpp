#include "ingest/tree.hpp"

#include <string>
#include <vector>

#include "error.hpp"

namespace orthoprobe::ingest {

namespace {

void validate_heads(std::span<const int> heads) {
  const auto n = static_cast<int>(heads.size());
  if (n == 0) throw StructuralError("empty sentence has no root");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (heads[i] < 0 || heads[i] > n)
      throw StructuralError("token " + std::to_string(i + 1) + " has head " +
                            std::to_string(heads[i]) + " outside [0, " + std::to_string(n) + "]");
    if (heads[i] == i + 1)
      throw StructuralError("token " + std::to_string(i + 1) + " is its own head");
    if (heads[i] == 0) ++roots;
  }
  if (roots != 1)
    throw StructuralError("expected exactly one root token, found " + std::to_string(roots));
}

}  // namespace

Eigen::VectorXi compute_tree_depths(std::span<const int> heads) {
  validate_heads(heads);
  const auto n = static_cast<int>(heads.size());
  constexpr int kUnvisited = -1;
  constexpr int kOnPath = -2;
  Eigen::VectorXi depth = Eigen::VectorXi::Constant(n, kUnvisited);
  std::vector<int> path;
  for (int start = 0; start < n; ++start) {
    int node = start;
    path.clear();
    while (node >= 0 && depth[node] == kUnvisited) {
      depth[node] = kOnPath;
      path.push_back(node);
      node = heads[node] - 1;
    }
    if (node >= 0 && depth[node] == kOnPath)
      throw StructuralError("cyclic head links through token " + std::to_string(node + 1));
    int d = node < 0 ? -1 : depth[node];
    for (auto it = path.rbegin(); it != path.rend(); ++it) depth[*it] = ++d;
  }
  return depth;
}

Eigen::MatrixXi compute_tree_distances(std::span<const int> heads) {
  const Eigen::VectorXi depth = compute_tree_depths(heads);
  const auto n = static_cast<int>(heads.size());
  Eigen::MatrixXi dist = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int a = i;
      int b = j;
      int steps = 0;
      while (a != b) {
        if (depth[a] >= depth[b]) {
          a = heads[a] - 1;
        } else {
          b = heads[b] - 1;
        }
        ++steps;
      }
      dist(i, j) = dist(j, i) = steps;
    }
  }
  return dist;
}

}  // namespace orthoprobe::ingest
