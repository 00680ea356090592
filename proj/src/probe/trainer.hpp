#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ingest/corpus.hpp"
#include "json.hpp"
#include "probe/adam.hpp"
#include "probe/model.hpp"

namespace orthoprobe::probe {

/// Target-language supervision added to cross-lingual training. With zero
/// samples the target contributes no stream; under MappedLangs its map
/// stays the untrained identity.
struct FewShot {
  std::string target;
  std::size_t samples = 0;
};

struct TrainingConfig {
  double learning_rate = 0.02;
  AdamSettings adam;
  double lr_decay_factor = 0.5;  // applied after `lr_patience` epochs without dev improvement
  int lr_patience = 2;
  int early_stop_patience = 5;
  int max_epochs = 60;
  double dso_weight = 0.05;
  std::size_t batch_size = 20;
  std::uint64_t seed = 1;
  std::optional<FewShot> fewshot;

  void validate() const;  // ConfigError on out-of-range values
};

nlohmann::json to_json(const TrainingConfig& config);
TrainingConfig training_config_from_json(const nlohmann::json& j);

struct MapResidual {
  std::string language;  // "*" for the shared AllLangs map
  bool trainable = false;
  double residual = 0.0;  // ||V^T V - I||_F
};

struct EpochRecord {
  int epoch = 0;
  std::size_t steps = 0;
  double train_loss = 0.0;
  std::optional<double> dev_loss;
  double learning_rate = 0.0;
  std::vector<MapResidual> orthogonality;
};

struct TrainingResult {
  ProbeModel model;
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;  // objective of every optimiser step, in order
  int best_epoch = 0;
  bool early_stopped = false;
  std::vector<MapResidual> residual_before_projection;
  double projection_effect = 0.0;  // mean |after - before| / |before| on held-out distances
};

using CorpusMap = std::map<std::string, ingest::Corpus>;

/// Mini-batch training with round-robin over (language, task) streams,
/// adaptive-moment updates, plateau learning-rate decay and early stopping on
/// the dev loss. The parameters of the best dev epoch are kept, then every
/// trainable map is replaced by its nearest orthogonal matrix.
///
/// ConfigError before any step when a language lacks the data its regime
/// needs. Deterministic in `config.seed`.
TrainingResult train(ProbeModel model, const CorpusMap& train, const CorpusMap& dev, const TrainingConfig& config);

/// JSON-lines training log: one record per epoch, then a summary record.
std::string training_log_jsonl(const TrainingResult& result);

}  // namespace orthoprobe::probe
