#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ingest/corpus.hpp"
#include "probe/model.hpp"
#include "trees/extract.hpp"

namespace orthoprobe::trees {

struct PredictedStructure {
  Eigen::MatrixXd dists;
  Eigen::VectorXd depths;
};

using PredictionSource = std::function<PredictedStructure(const ingest::SentencePair&)>;

/// Dependency-distance and dependency-depth predictions of a trained probe
/// for one of its languages.
PredictionSource probe_predictions(const probe::ProbeModel& model, const std::string& language);

/// Gold tree distances and depths fed straight into extraction.
PredictionSource gold_predictions();

struct ParseOutcome {
  std::vector<std::vector<int>> heads;  // one per sentence, 1-based
  AttachmentScore uas;
  AttachmentScore uuas;
};

/// Extracts a tree for every sentence and pools attachment counts.
ParseOutcome parse_corpus(const ingest::Corpus& corpus, const PredictionSource& predict);

}  // namespace orthoprobe::trees
