#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ingest/corpus.hpp"
#include "probe/model.hpp"

namespace orthoprobe::probe {

/// Sentences of one language probed for one task. The layer is taken from
/// the model's LayerChoice.
struct Batch {
  std::size_t language = 0;
  Task task = Task::DepDistance;
  std::vector<const ingest::SentencePair*> sentences;
};

struct BatchGradient {
  double loss = 0.0;     // mean sentence loss
  double penalty = 0.0;  // dso_weight * DSO(V), zero for frozen maps
  std::size_t counted = 0;
  std::size_t map = 0;
  std::size_t scaler = 0;
  std::optional<Eigen::MatrixXd> map_grad;  // absent when the map is frozen
  Eigen::VectorXd scaler_grad;

  double objective() const { return loss + penalty; }
};

/// Task loss of the batch (sentences without valid targets are skipped)
/// plus the DSO term of the batch's map when it is trainable.
double batch_objective(const ProbeModel& model, const Batch& batch, double dso_weight);

/// Analytic gradient of batch_objective. The L1 subgradient is 0 at exact
/// ties. Throws TrainingError naming the parameter on non-finite values.
BatchGradient batch_gradient(const ProbeModel& model, const Batch& batch, double dso_weight);

/// Mean loss of the batch without regularisation; nullopt when no sentence
/// has a valid target.
std::optional<double> batch_loss(const ProbeModel& model, const Batch& batch);

}  // namespace orthoprobe::probe
