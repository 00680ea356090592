#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace orthoprobe::ingest {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;
using PairMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Token {
  std::string form;
  std::string upos;
  int head = 0;  // 1-based, 0 = root
  std::optional<std::string> lexnode;
  // Remaining CoNLL-U columns, kept so parsed output can echo them back.
  std::string lemma = "_";
  std::string xpos = "_";
  std::string feats = "_";
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";
};

/// Gold lexical structure. Entries whose mask is false carry no meaning.
struct LexicalTargets {
  Eigen::VectorXd depths;
  Mask depth_mask;
  Eigen::MatrixXd dists;
  PairMask dist_mask;
};

struct SentenceAnnotation {
  std::string id;
  std::vector<Token> tokens;
  Eigen::VectorXi dep_depths;
  Eigen::MatrixXi dep_dists;
  std::optional<LexicalTargets> lex;

  std::size_t size() const { return tokens.size(); }
  std::vector<int> heads() const;
  std::vector<std::string> upos() const;
};

}  // namespace orthoprobe::ingest
