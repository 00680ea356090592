#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eval/analysis.hpp"
#include "eval/report.hpp"
#include "eval/scoring.hpp"
#include "ingest/corpus.hpp"
#include "json.hpp"
#include "probe/model.hpp"
#include "probe/task.hpp"
#include "probe/trainer.hpp"

namespace orthoprobe::app {

struct SplitPaths {
  std::string treebank;
  std::map<int, std::string> embeddings;  // layer -> OPEMB1 file
};

struct LanguageConfig {
  std::string name;
  std::string family = "Other";
  std::optional<std::string> forest;
  std::map<ingest::Split, SplitPaths> splits;
};

struct EvaluationOptions {
  std::vector<std::uint64_t> seeds{1};
  eval::LengthWindow window;
  eval::SelectionRule selection;
  double alpha = 0.05;
  std::vector<probe::Regime> regimes;  // empty: the run regime only
};

struct TransferOptions {
  std::vector<std::string> targets;  // empty: every language
  std::vector<std::size_t> grid{0, 10, 50, 100, 1000};
  std::vector<probe::Regime> regimes{probe::Regime::MappedLangs, probe::Regime::AllLangs};
};

struct AnalysisOptions {
  std::optional<std::string> features;
  std::optional<std::string> corpus_sizes;
  std::string reference_language;  // default: first language
};

/// One JSON file describes a run. Relative paths resolve against the
/// config's directory; `${NAME}` in any path expands from the environment
/// (ConfigError when unset). ORTHOPROBE_OUT overrides `out`.
struct RunConfig {
  std::vector<LanguageConfig> languages;
  probe::Regime regime = probe::Regime::InLang;
  std::vector<probe::Task> tasks{probe::kAllTasks.begin(), probe::kAllTasks.end()};
  probe::LayerChoice layers;
  probe::TrainingConfig training;
  double init_scale = 0.1;
  std::size_t train_cap = ingest::kDefaultTrainCap;
  std::uint64_t sample_seed = 0;
  std::size_t max_sentence_tokens = ingest::kDefaultMaxSentenceTokens;
  EvaluationOptions evaluation;
  TransferOptions transfer;
  AnalysisOptions analysis;
  std::string out_dir = "out";

  static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir);
  static RunConfig load(const std::string& path);

  /// ConfigError for missing paths, empty seed lists, unknown languages in
  /// transfer/analysis sections, lexical tasks without a forest, or regimes
  /// that cannot be built from the language list.
  void validate() const;

  const LanguageConfig& language(const std::string& name) const;
  std::vector<std::string> language_names() const;
  eval::FamilyMap families() const;
  nlohmann::json to_json() const;
};

/// Expands `${NAME}` references from the process environment.
std::string expand_env(const std::string& text);

}  // namespace orthoprobe::app
