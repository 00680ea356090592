#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "probe/task.hpp"

namespace orthoprobe::eval {

/// WALS areas grouped into the two similarity flavours.
enum class FeatureArea { Syntactic, Lexical };

/// Maps a CSV area label to its group: "syntactic"/"lexical" directly, or a
/// WALS area name (Nominal Syntax, Word Order, Simple Clauses, Complex
/// Sentences -> syntactic; Nominal Categories, Verb Categories, Lexicon ->
/// lexical). nullopt for areas outside both groups.
std::optional<FeatureArea> feature_area(std::string_view label);

struct LanguageFeatures {
  std::string language;
  std::map<std::string, std::pair<std::string, FeatureArea>> features;  // feature id -> (value, area)
  std::optional<std::uint64_t> wiki_tokens;
};

using FeatureTable = std::map<std::string, LanguageFeatures>;

/// CSV with header columns language, feature_id, value, area.
FeatureTable parse_features_csv(std::string_view text);
/// CSV with header columns language, tokens. Merged into `table`.
void merge_corpus_sizes_csv(std::string_view text, FeatureTable& table);

/// Fraction of jointly present features in `area` with equal values.
/// nullopt when the languages share no feature in that area.
std::optional<double> wals_hamming_similarity(const LanguageFeatures& a, const LanguageFeatures& b, FeatureArea area);

/// Pearson coefficient across languages; nullopt with fewer than 3 points
/// or zero variance.
std::optional<double> pearson_feature_correlation(std::span<const double> metric, std::span<const double> feature);

/// A dimension is selected by a task when |d(k)| >= threshold, with the
/// threshold either absolute or relative to max_k |d(k)| of that task.
struct SelectionRule {
  double epsilon = 0.05;
  bool relative = true;
};

using SeparationMatrix = std::array<std::array<int, 4>, 4>;  // indexed by probe::kAllTasks order

/// Cell (s, t) counts dimensions selected by both tasks; the diagonal holds
/// the per-task selection size. Tasks absent from `scalers` give zero rows.
SeparationMatrix shared_dimension_count(const std::map<probe::Task, Eigen::VectorXd>& scalers,
                                        const SelectionRule& rule = {});

nlohmann::json to_json(const SeparationMatrix& m);

}  // namespace orthoprobe::eval
