#pragma once

#include <set>
#include <string>

#include "app/config.hpp"
#include "ingest/corpus.hpp"
#include "probe/trainer.hpp"

namespace orthoprobe::app {

/// Encoder layers the configured tasks read.
std::set<int> required_layers(const std::vector<probe::Task>& tasks, const probe::LayerChoice& layers);

/// Treebank + embeddings of one split, with lexical targets attached when a
/// forest is configured and lexical tasks are requested. An unconfigured
/// split yields an empty corpus.
ingest::Corpus load_split(const RunConfig& config, const LanguageConfig& language, ingest::Split split);

struct LoadedData {
  probe::CorpusMap train;  // capped by `train_cap`
  probe::CorpusMap dev;
  probe::CorpusMap test;
  int dim = 0;  // 0 when no embeddings were loaded
};

LoadedData load_data(const RunConfig& config, bool with_train = true, bool with_test = true);

/// Exclusive lock on an output directory, released on destruction.
/// IoError when another process holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::string& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

}  // namespace orthoprobe::app
