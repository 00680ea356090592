#pragma once

#include <optional>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "eval/report.hpp"
#include "json.hpp"

namespace orthoprobe::app {

/// Files a command wrote plus a small machine-readable summary.
struct CommandOutput {
  std::vector<std::string> files;
  nlohmann::json summary = nlohmann::json::object();
};

/// Trains one probe under `config.regime` and writes `model.ckpt` and
/// `train_log.jsonl` to the output directory.
CommandOutput run_train(const RunConfig& config);

/// Scores test splits. With checkpoints, each is one run (its regime and
/// seed come from its manifest); without, one probe is trained per
/// configured regime and seed. Writes `report.json` and `report.txt`.
CommandOutput run_evaluate(const RunConfig& config, const std::vector<std::string>& checkpoints = {});

struct ParseRequest {
  std::optional<std::string> checkpoint;
  std::optional<std::string> treebank;
  std::vector<std::string> embeddings;  // OPEMB1 files, layer read from their headers
  std::optional<std::string> language;
  bool gold = false;  // feed gold distances and depths instead of probe output
};

/// With a checkpoint or `gold`: parses one treebank (or every configured
/// test split). Otherwise runs the transfer grid: for each target, regime
/// and few-shot size, trains on the other languages plus N target
/// sentences and parses the target test split. Writes CoNLL-U files and
/// `parse_summary.json` / `parse_summary.txt`.
CommandOutput run_parse(const RunConfig& config, const ParseRequest& request);

struct AnalyzeRequest {
  std::vector<std::string> reports;  // default: <out>/report.json
  std::optional<std::string> checkpoint;
};

/// Pearson correlations of per-language results (InLang values, other
/// regimes as deltas) with typological similarity to the reference
/// language and pretraining corpus size, plus the shared-dimension matrix of
/// a checkpoint. Writes `analysis.json` and `analysis.txt`.
CommandOutput run_analyze(const RunConfig& config, const AnalyzeRequest& request);

}  // namespace orthoprobe::app
