#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace orthoprobe::trees {

/// Unordered token pair, stored with first < second (0-based).
using Edge = std::pair<int, int>;

/// Spanning tree of minimum total predicted distance (Kruskal). Equal
/// weights are resolved in lexicographic edge order, smaller (i, j) first.
/// Returns n - 1 edges sorted lexicographically. ContractError for
/// non-square, asymmetric (beyond 1e-6) or non-finite input.
std::vector<Edge> mst_undirected(const Eigen::MatrixXd& dists);

/// Roots the tree at the token of minimum predicted depth (smallest index on
/// ties) and orients every edge away from it. Returns 1-based heads with 0
/// for the root. ContractError when the edges do not span a tree.
std::vector<int> orient_by_depth(std::span<const Edge> edges, const Eigen::VectorXd& depths);

/// Sorted unordered edges of a head vector.
std::vector<Edge> edges_from_heads(std::span<const int> heads);

struct ExtractedTree {
  std::vector<int> heads;
  std::vector<Edge> undirected_edges;
};

ExtractedTree extract_tree(const Eigen::MatrixXd& dists, const Eigen::VectorXd& depths);

/// Correct / scored counts; value() is NaN when nothing was scored.
struct AttachmentScore {
  std::size_t correct = 0;
  std::size_t total = 0;

  double value() const;
  AttachmentScore& operator+=(const AttachmentScore& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

inline constexpr const char* kPunctuationTag = "PUNCT";

/// Directed attachment over tokens whose UPOS is not PUNCT.
AttachmentScore uas(std::span<const int> pred_heads, std::span<const int> gold_heads,
                    std::span<const std::string> upos);

/// Undirected attachment over gold edges with no PUNCT endpoint.
AttachmentScore uuas(std::span<const Edge> pred_edges, std::span<const Edge> gold_edges,
                     std::span<const std::string> upos);

}  // namespace orthoprobe::trees
