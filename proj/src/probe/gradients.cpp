#include "probe/gradients.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "probe/geometry.hpp"

namespace orthoprobe::probe {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::string parameter_name(const ProbeModel& model, const Batch& batch, bool map) {
  const auto& lang = model.languages()[batch.language];
  if (map) return "orthogonal map of '" + (model.regime() == Regime::AllLangs ? std::string("*") : lang) + "'";
  return "scaling vector " + std::string(to_string(batch.task)) +
         (model.regime() == Regime::InLang ? "/" + lang : std::string());
}

}  // namespace

std::optional<double> batch_loss(const ProbeModel& model, const Batch& batch) {
  const auto& V = model.map_for(batch.language).matrix;
  const auto& d = model.scaler_for(batch.task, batch.language).values;
  const int layer = model.layers().of(batch.task);
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto* pair : batch.sentences) {
    auto target = target_for(pair->annotation, batch.task);
    if (!target || !target->any()) continue;
    const Eigen::MatrixXd H = pair->layer(layer).cast<double>();
    std::optional<double> l;
    if (is_distance(batch.task)) {
      l = distance_loss(predict_distances(V, d, H), target->gold, target->mask);
    } else {
      l = depth_loss(predict_depths(V, d, H), target->gold.col(0), target->mask.col(0));
    }
    if (!l) continue;
    total += *l;
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return total / static_cast<double>(counted);
}

double batch_objective(const ProbeModel& model, const Batch& batch, double dso_weight) {
  double value = batch_loss(model, batch).value_or(0.0);
  const auto& map = model.map_for(batch.language);
  if (map.trainable && dso_weight > 0.0) value += dso_weight * dso_penalty(map.matrix);
  return value;
}

BatchGradient batch_gradient(const ProbeModel& model, const Batch& batch, double dso_weight) {
  BatchGradient g;
  g.map = model.map_index(batch.language);
  g.scaler = model.scaler_index(batch.task, batch.language);
  const auto& map = model.maps()[g.map];
  const Eigen::MatrixXd& V = map.matrix;
  const Eigen::VectorXd& d = model.scalers()[g.scaler].values;
  const int layer = model.layers().of(batch.task);
  const Eigen::Index dim = V.rows();
  const Eigen::VectorXd d2 = d.array().square();

  Eigen::MatrixXd grad_v = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd grad_d_acc = Eigen::VectorXd::Zero(dim);

  for (const auto* pair : batch.sentences) {
    auto target = target_for(pair->annotation, batch.task);
    if (!target || !target->any()) continue;
    const Eigen::MatrixXd H = pair->layer(layer).cast<double>();
    if (H.cols() != dim) throw ContractError("embedding width differs from the probe dimension");
    const Eigen::Index n = H.rows();
    const Eigen::MatrixXd U = H * V;
    const Eigen::MatrixXd Y = U * d.asDiagonal();

    // Coefficients c of the loss in the squared predictions, already divided
    // by the number of valid items in the sentence.
    Eigen::MatrixXd W;
    double loss = 0.0;
    if (is_distance(batch.task)) {
      Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
      std::size_t count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          if (!target->mask(i, j)) continue;
          const double r = (Y.row(i) - Y.row(j)).squaredNorm() - target->gold(i, j);
          loss += std::abs(r);
          C(i, j) = C(j, i) = sign(r);
          ++count;
        }
      }
      const double inv = 1.0 / static_cast<double>(count);
      loss *= inv;
      C *= inv;
      // sum_{i<j} c_ij (u_i - u_j)(u_i - u_j)^T = U^T (diag(C 1) - C) U
      Eigen::MatrixXd L = -C;
      L.diagonal() += C.rowwise().sum();
      W = L * U;
    } else {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
      std::size_t count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!target->mask(i, 0)) continue;
        const double r = Y.row(i).squaredNorm() - target->gold(i, 0);
        loss += std::abs(r);
        c[i] = sign(r);
        ++count;
      }
      const double inv = 1.0 / static_cast<double>(count);
      loss *= inv;
      c *= inv;
      W = c.asDiagonal() * U;
    }
    g.loss += loss;
    ++g.counted;
    if (map.trainable) grad_v.noalias() += H.transpose() * (W * d2.asDiagonal());
    grad_d_acc += (U.array() * W.array()).colwise().sum().matrix().transpose();
  }

  if (g.counted > 0) {
    const double inv = 1.0 / static_cast<double>(g.counted);
    g.loss *= inv;
    grad_v *= 2.0 * inv;
    g.scaler_grad = 2.0 * inv * (d.array() * grad_d_acc.array()).matrix();
  } else {
    g.scaler_grad = Eigen::VectorXd::Zero(dim);
  }

  if (map.trainable) {
    if (dso_weight > 0.0) {
      g.penalty = dso_weight * dso_penalty(V);
      grad_v += dso_weight * dso_gradient(V);
    }
    if (!grad_v.allFinite())
      throw TrainingError("non-finite gradient for " + parameter_name(model, batch, true));
    g.map_grad = std::move(grad_v);
  }
  if (!g.scaler_grad.allFinite())
    throw TrainingError("non-finite gradient for " + parameter_name(model, batch, false));
  return g;
}

}  // namespace orthoprobe::probe
