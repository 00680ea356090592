#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ingest/corpus.hpp"
#include "ingest/sentence.hpp"
#include "ingest/tree.hpp"

namespace testutil {

/// Random rooted tree on n tokens: token k (in a shuffled order) attaches to
/// an earlier token of that order.
inline std::vector<int> random_heads(std::size_t n, std::mt19937_64& rng) {
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(n, 0);
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    heads[static_cast<std::size_t>(order[k])] = order[pick(rng)] + 1;
  }
  return heads;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline orthoprobe::ingest::SentenceAnnotation sentence(const std::vector<int>& heads, const std::string& id = "s",
                                                       std::vector<std::string> upos = {}) {
  orthoprobe::ingest::SentenceAnnotation s;
  s.id = id;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    orthoprobe::ingest::Token t;
    t.form = "w" + std::to_string(i + 1);
    t.upos = i < upos.size() ? upos[i] : "NOUN";
    t.head = heads[i];
    s.tokens.push_back(t);
  }
  s.dep_depths = orthoprobe::ingest::compute_tree_depths(heads);
  s.dep_dists = orthoprobe::ingest::compute_tree_distances(heads);
  return s;
}

inline std::shared_ptr<const orthoprobe::ingest::SentencePair> pair(orthoprobe::ingest::SentenceAnnotation s,
                                                                    const Eigen::MatrixXd& H, int layer = 7) {
  auto p = std::make_shared<orthoprobe::ingest::SentencePair>();
  p->annotation = std::move(s);
  p->layers[layer] = H.cast<float>();
  return p;
}

}  // namespace testutil
