#include "probe/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "error.hpp"

namespace orthoprobe::probe {

namespace {

void require_columns(const Eigen::MatrixXd& H, Eigen::Index dim, const char* what) {
  if (H.cols() != dim)
    throw ContractError(std::string(what) + ": embeddings have " + std::to_string(H.cols()) +
                        " columns, probe expects " + std::to_string(dim));
}

void require_orthogonal_shapes(const Eigen::MatrixXd& V, const Eigen::VectorXd& scale, const Eigen::MatrixXd& H) {
  if (V.rows() != V.cols()) throw ContractError("orthogonal map must be square");
  if (scale.size() != V.cols())
    throw ContractError("scaling vector has length " + std::to_string(scale.size()) + ", map is " +
                        std::to_string(V.cols()) + " wide");
  require_columns(H, V.rows(), "orthogonal probe");
}

Eigen::MatrixXd pairwise_squared(const Eigen::MatrixXd& Y) {
  const Eigen::Index n = Y.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (Y.row(i) - Y.row(j)).squaredNorm();
  return d;
}

}  // namespace

Eigen::MatrixXd predict_distances_baseline(const Eigen::MatrixXd& projection, const Eigen::MatrixXd& H) {
  require_columns(H, projection.cols(), "linear probe");
  return pairwise_squared(H * projection.transpose());
}

Eigen::VectorXd predict_depths_baseline(const Eigen::MatrixXd& projection, const Eigen::MatrixXd& H) {
  require_columns(H, projection.cols(), "linear probe");
  return (H * projection.transpose()).rowwise().squaredNorm();
}

Eigen::MatrixXd project(const Eigen::MatrixXd& V, const Eigen::VectorXd& scale, const Eigen::MatrixXd& H) {
  require_orthogonal_shapes(V, scale, H);
  return (H * V) * scale.asDiagonal();
}

Eigen::MatrixXd predict_distances(const Eigen::MatrixXd& V, const Eigen::VectorXd& scale, const Eigen::MatrixXd& H) {
  return pairwise_squared(project(V, scale, H));
}

Eigen::VectorXd predict_depths(const Eigen::MatrixXd& V, const Eigen::VectorXd& scale, const Eigen::MatrixXd& H) {
  return project(V, scale, H).rowwise().squaredNorm();
}

std::optional<double> distance_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gold, const PairMask& mask) {
  const Eigen::Index n = pred.rows();
  if (pred.cols() != n || gold.rows() != n || gold.cols() != n || mask.rows() != n || mask.cols() != n)
    throw ContractError("distance loss: prediction, gold and mask shapes differ");
  double total = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!mask(i, j)) continue;
      total += std::abs(pred(i, j) - gold(i, j));
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

std::optional<double> depth_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& gold, const Mask& mask) {
  if (gold.size() != pred.size() || mask.size() != pred.size())
    throw ContractError("depth loss: prediction, gold and mask lengths differ");
  double total = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    total += std::abs(pred[i] - gold[i]);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

double dso_penalty(const Eigen::MatrixXd& V) {
  if (V.rows() != V.cols()) throw ContractError("DSO penalty needs a square matrix");
  const auto I = Eigen::MatrixXd::Identity(V.rows(), V.cols());
  return (V.transpose() * V - I).squaredNorm() + (V * V.transpose() - I).squaredNorm();
}

Eigen::MatrixXd dso_gradient(const Eigen::MatrixXd& V) {
  if (V.rows() != V.cols()) throw ContractError("DSO penalty needs a square matrix");
  const auto I = Eigen::MatrixXd::Identity(V.rows(), V.cols());
  return 4.0 * V * (V.transpose() * V - I) + 4.0 * (V * V.transpose() - I) * V;
}

double orthogonality_residual(const Eigen::MatrixXd& V) {
  return (V.transpose() * V - Eigen::MatrixXd::Identity(V.cols(), V.cols())).norm();
}

Eigen::MatrixXd polar_project(const Eigen::MatrixXd& V) {
  if (V.rows() != V.cols()) throw ContractError("polar projection needs a square matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

bool TaskTarget::any() const {
  if (mask.cols() == 1) return mask.any();
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = i + 1; j < mask.cols(); ++j)
      if (mask(i, j)) return true;
  return false;
}

std::optional<TaskTarget> target_for(const ingest::SentenceAnnotation& sentence, Task task) {
  const auto n = static_cast<Eigen::Index>(sentence.size());
  TaskTarget t;
  switch (task) {
    case Task::DepDepth:
      t.gold = sentence.dep_depths.cast<double>();
      t.mask = PairMask::Constant(n, 1, true);
      return t;
    case Task::DepDistance:
      t.gold = sentence.dep_dists.cast<double>();
      t.mask = PairMask::Constant(n, n, true);
      return t;
    case Task::LexDepth:
      if (!sentence.lex) return std::nullopt;
      t.gold = sentence.lex->depths;
      t.mask = sentence.lex->depth_mask;
      return t;
    case Task::LexDistance:
      if (!sentence.lex) return std::nullopt;
      t.gold = sentence.lex->dists;
      t.mask = sentence.lex->dist_mask;
      return t;
  }
  return std::nullopt;
}

}  // namespace orthoprobe::probe
