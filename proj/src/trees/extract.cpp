#include "trees/extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include "error.hpp"

namespace orthoprobe::trees {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

Edge ordered(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

}  // namespace

std::vector<Edge> mst_undirected(const Eigen::MatrixXd& dists) {
  const Eigen::Index n = dists.rows();
  if (dists.cols() != n) throw ContractError("distance matrix must be square");
  if (n == 0) throw ContractError("cannot extract a tree from an empty sentence");
  if (!dists.allFinite()) throw ContractError("distance matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(dists(i, j) - dists(j, i)) > 1e-6) throw ContractError("distance matrix is not symmetric");

  std::vector<std::tuple<double, int, int>> candidates;
  candidates.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) candidates.emplace_back(dists(i, j), i, j);
  std::sort(candidates.begin(), candidates.end());

  DisjointSets sets(static_cast<int>(n));
  std::vector<Edge> tree;
  tree.reserve(static_cast<std::size_t>(n - 1));
  for (const auto& [w, i, j] : candidates) {
    if (sets.unite(i, j)) tree.emplace_back(i, j);
    if (tree.size() + 1 == static_cast<std::size_t>(n)) break;
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

std::vector<int> orient_by_depth(std::span<const Edge> edges, const Eigen::VectorXd& depths) {
  const auto n = static_cast<int>(depths.size());
  if (n == 0) throw ContractError("cannot orient an empty tree");
  if (edges.size() + 1 != static_cast<std::size_t>(n))
    throw ContractError("a spanning tree over " + std::to_string(n) + " tokens needs " + std::to_string(n - 1) +
                        " edges, got " + std::to_string(edges.size()));
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw ContractError("edge endpoint out of range");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  int root = 0;
  for (int i = 1; i < n; ++i)
    if (depths[i] < depths[root]) root = i;

  std::vector<int> heads(n, -1);
  heads[root] = 0;
  std::queue<int> frontier;
  frontier.push(root);
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (heads[v] != -1 || v == root) continue;
      heads[v] = u + 1;
      ++reached;
      frontier.push(v);
    }
  }
  if (reached != n) throw ContractError("edge set is disconnected");
  return heads;
}

std::vector<Edge> edges_from_heads(std::span<const int> heads) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < heads.size(); ++i)
    if (heads[i] > 0) edges.push_back(ordered(static_cast<int>(i), heads[i] - 1));
  std::sort(edges.begin(), edges.end());
  return edges;
}

ExtractedTree extract_tree(const Eigen::MatrixXd& dists, const Eigen::VectorXd& depths) {
  if (depths.size() != dists.rows()) throw ContractError("depth vector and distance matrix sizes differ");
  ExtractedTree t;
  t.undirected_edges = mst_undirected(dists);
  t.heads = orient_by_depth(t.undirected_edges, depths);
  return t;
}

double AttachmentScore::value() const {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(correct) / static_cast<double>(total);
}

AttachmentScore uas(std::span<const int> pred_heads, std::span<const int> gold_heads,
                    std::span<const std::string> upos) {
  if (pred_heads.size() != gold_heads.size() || upos.size() != gold_heads.size())
    throw ContractError("UAS: predicted heads, gold heads and UPOS tags differ in length");
  AttachmentScore s;
  for (std::size_t i = 0; i < gold_heads.size(); ++i) {
    if (upos[i] == kPunctuationTag) continue;
    ++s.total;
    if (pred_heads[i] == gold_heads[i]) ++s.correct;
  }
  return s;
}

AttachmentScore uuas(std::span<const Edge> pred_edges, std::span<const Edge> gold_edges,
                     std::span<const std::string> upos) {
  if (pred_edges.size() != gold_edges.size() || upos.size() != gold_edges.size() + 1)
    throw ContractError("UUAS: edge sets must both span the " + std::to_string(upos.size()) + "-token sentence");
  std::set<Edge> predicted;
  for (const auto& [a, b] : pred_edges) predicted.insert(ordered(a, b));
  AttachmentScore s;
  for (const auto& [a, b] : gold_edges) {
    if (upos[a] == kPunctuationTag || upos[b] == kPunctuationTag) continue;
    ++s.total;
    if (predicted.count(ordered(a, b))) ++s.correct;
  }
  return s;
}

}  // namespace orthoprobe::trees
