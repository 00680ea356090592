#pragma once

#include <optional>

#include <Eigen/Core>

#include "ingest/sentence.hpp"
#include "probe/task.hpp"

namespace orthoprobe::probe {

using ingest::Mask;
using ingest::PairMask;

// Predictions. H holds one word vector per row (n x dim). All functions
// throw ContractError on shape mismatch.

/// Squared distances ||B (h_i - h_j)||^2 for a plain linear probe.
Eigen::MatrixXd predict_distances_baseline(const Eigen::MatrixXd& projection, const Eigen::MatrixXd& H);

/// Squared norms ||B h_i||^2.
Eigen::VectorXd predict_depths_baseline(const Eigen::MatrixXd& projection, const Eigen::MatrixXd& H);

/// Squared distances ||scale (.) V^T (h_i - h_j)||^2 of the orthogonal probe.
Eigen::MatrixXd predict_distances(const Eigen::MatrixXd& V, const Eigen::VectorXd& scale, const Eigen::MatrixXd& H);

/// Squared norms ||scale (.) V^T h_i||^2.
Eigen::VectorXd predict_depths(const Eigen::MatrixXd& V, const Eigen::VectorXd& scale, const Eigen::MatrixXd& H);

/// Rows of H mapped into the probe space: row i = scale (.) V^T h_i.
Eigen::MatrixXd project(const Eigen::MatrixXd& V, const Eigen::VectorXd& scale, const Eigen::MatrixXd& H);

// Losses. One sentence at a time; nullopt when the mask selects nothing, in
// which case the sentence does not count towards the batch mean.

/// Mean |pred - gold| over valid unordered pairs i < j.
std::optional<double> distance_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gold, const PairMask& mask);

/// Mean |pred - gold| over valid tokens.
std::optional<double> depth_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& gold, const Mask& mask);

/// ||V^T V - I||_F^2 + ||V V^T - I||_F^2.
double dso_penalty(const Eigen::MatrixXd& V);
Eigen::MatrixXd dso_gradient(const Eigen::MatrixXd& V);

/// ||V^T V - I||_F.
double orthogonality_residual(const Eigen::MatrixXd& V);

/// Nearest orthogonal matrix (U W^T from the SVD V = U S W^T).
Eigen::MatrixXd polar_project(const Eigen::MatrixXd& V);

/// Gold values and validity mask for one task. Depth tasks use an n x 1
/// matrix. nullopt when the sentence has no lexical annotation.
struct TaskTarget {
  Eigen::MatrixXd gold;
  PairMask mask;

  bool any() const;
};

std::optional<TaskTarget> target_for(const ingest::SentenceAnnotation& sentence, Task task);

}  // namespace orthoprobe::probe
