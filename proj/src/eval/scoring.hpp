#pragma once

#include <cstddef>
#include <optional>

#include "ingest/corpus.hpp"
#include "probe/model.hpp"

namespace orthoprobe::eval {

/// Sentences outside [min_length, max_length] tokens are not scored.
struct LengthWindow {
  std::size_t min_length = 5;
  std::size_t max_length = 50;

  bool contains(std::size_t n) const { return n >= min_length && n <= max_length; }
};

/// Predictions come from 32-bit vectors; values closer than this fraction
/// of the sentence's largest prediction are ranked as ties.
inline constexpr double kPredictionTieTolerance = 1e-6;

struct TaskScore {
  std::optional<double> spearman;  // mean over scored sentences, nullopt if none
  std::size_t sentences = 0;
};

/// Mean per-sentence Spearman correlation between predicted and gold values
/// of one task (pairs i < j for distances, tokens for depths, masked items
/// dropped, constant sentences skipped). The corpus language selects the
/// probe's parameters.
TaskScore spearman_task(const probe::ProbeModel& model, const ingest::Corpus& corpus, probe::Task task,
                        const LengthWindow& window = {});

}  // namespace orthoprobe::eval
