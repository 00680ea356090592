#pragma once

#include <span>

#include <Eigen/Core>

namespace orthoprobe::ingest {

/// Depth of every token below the root (root = 0). `heads` is 1-based with
/// 0 marking the root, as in the CoNLL-U HEAD column.
///
/// Throws StructuralError when the head links do not form a single rooted
/// tree (out-of-range head, zero or several roots, cycle).
Eigen::VectorXi compute_tree_depths(std::span<const int> heads);

/// Path length between every pair of tokens in the undirected tree spanned
/// by the head links. Same preconditions and errors as compute_tree_depths.
Eigen::MatrixXi compute_tree_distances(std::span<const int> heads);

}  // namespace orthoprobe::ingest
