#include "ingest/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "error.hpp"

namespace orthoprobe::ingest {

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

const Eigen::MatrixXf& SentencePair::layer(int layer) const {
  auto it = layers.find(layer);
  if (it == layers.end())
    throw ContractError("sentence '" + annotation.id + "' has no embeddings for layer " + std::to_string(layer));
  return it->second;
}

Corpus assemble_corpus(std::string language, Split split, std::vector<SentenceAnnotation> sentences,
                       std::span<const EmbeddingSet> layers, std::size_t max_tokens) {
  for (const auto& set : layers) {
    if (set.sentences.size() != sentences.size())
      throw FormatError(language + " " + to_string(split) + ": layer " + std::to_string(set.layer) + " has " +
                        std::to_string(set.sentences.size()) + " sentences, treebank has " +
                        std::to_string(sentences.size()));
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      if (static_cast<std::size_t>(set.sentences[s].rows()) != sentences[s].size())
        throw FormatError(language + " " + to_string(split) + ": sentence " + std::to_string(s) + " ('" +
                          sentences[s].id + "') has " + std::to_string(sentences[s].size()) +
                          " tokens but layer " + std::to_string(set.layer) + " has " +
                          std::to_string(set.sentences[s].rows()) + " vectors");
    }
  }
  Corpus corpus;
  corpus.language = std::move(language);
  corpus.split = split;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (sentences[s].size() > max_tokens) continue;
    auto pair = std::make_shared<SentencePair>();
    pair->annotation = std::move(sentences[s]);
    for (const auto& set : layers) pair->layers.emplace(set.layer, set.sentences[s]);
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw ContractError("sample cap must be at least 1");
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (cap >= population) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < cap; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Corpus sample_training_sentences(const Corpus& corpus, std::size_t cap, std::uint64_t seed) {
  Corpus out;
  out.language = corpus.language;
  out.split = corpus.split;
  for (auto i : sample_indices(corpus.size(), cap, seed)) out.pairs.push_back(corpus.pairs[i]);
  return out;
}

}  // namespace orthoprobe::ingest
