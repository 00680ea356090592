#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ingest/embeddings.hpp"
#include "ingest/sentence.hpp"

namespace orthoprobe::ingest {

enum class Split { Train, Dev, Test };

const char* to_string(Split split);

/// One annotated sentence with its word vectors, keyed by encoder layer.
struct SentencePair {
  SentenceAnnotation annotation;
  std::map<int, Eigen::MatrixXf> layers;

  const Eigen::MatrixXf& layer(int layer) const;
};

/// Pairs are shared read-only, so sampling and splitting never copy vectors.
struct Corpus {
  std::string language;
  Split split = Split::Train;
  std::vector<std::shared_ptr<const SentencePair>> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

inline constexpr std::size_t kDefaultMaxSentenceTokens = 80;
inline constexpr std::size_t kDefaultTrainCap = 4000;

/// Aligns sentences with the embedding sets one-to-one by index, then drops
/// sentences longer than `max_tokens`. FormatError (with sentence index) on
/// count or word-count mismatch.
Corpus assemble_corpus(std::string language, Split split, std::vector<SentenceAnnotation> sentences,
                       std::span<const EmbeddingSet> layers,
                       std::size_t max_tokens = kDefaultMaxSentenceTokens);

/// Uniform sample without replacement of min(cap, population) indices,
/// returned in increasing order. Deterministic in `seed`.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t cap, std::uint64_t seed);

Corpus sample_training_sentences(const Corpus& corpus, std::size_t cap, std::uint64_t seed);

}  // namespace orthoprobe::ingest
