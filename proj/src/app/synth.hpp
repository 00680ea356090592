#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ingest/corpus.hpp"
#include "ingest/embeddings.hpp"
#include "ingest/hypernymy.hpp"
#include "ingest/sentence.hpp"

namespace orthoprobe::app {

/// Uniformly distributed orthogonal matrix (QR of a Gaussian matrix with
/// the sign of R's diagonal folded into Q).
Eigen::MatrixXd random_orthogonal(int dim, std::mt19937_64& rng);

/// Rotation exp(angle * K) for a random skew-symmetric K with unit spectral
/// radius, i.e. a rotation by at most `angle` radians in every plane.
Eigen::MatrixXd small_rotation(int dim, double angle, std::mt19937_64& rng);

/// Latent space in which gold structure is planted exactly: every dependency
/// edge and every hypernymy edge owns one coordinate, so that for latent
/// points z the quantity ||scale (.) (z_i - z_j)||^2 equals the tree distance
/// and ||scale (.) z_i||^2 equals the depth. A language observes R z for its
/// own orthogonal R; the planted probe for it is V = R with the same scale.
struct PlantedUniverse {
  int dim = 32;
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 15;
  int dep_offset = 0;
  int dep_dims = 0;
  int lex_offset = 0;
  int lex_dims = 0;
  Eigen::VectorXd dep_scale;  // zero outside the dependency coordinates
  Eigen::VectorXd lex_scale;  // zero outside the lexical coordinates
  double noise = 1.0;         // std. dev. of the unused coordinates
  double lexnode_rate = 0.6;  // chance that a token carries a LexNode
  std::vector<std::string> lex_nodes;
  std::vector<Eigen::VectorXd> lex_positions;  // unscaled latent position per lexical node
  std::string forest_text;
};

struct UniverseOptions {
  int dim = 32;
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 15;
  bool lexical = false;
  std::size_t lex_trees = 2;
  std::size_t lex_nodes = 8;
  double noise = 1.0;
  std::uint64_t seed = 7;
};

PlantedUniverse make_universe(const UniverseOptions& options);

struct SyntheticSplit {
  std::vector<ingest::SentenceAnnotation> sentences;  // lexical targets filled when the universe has them
  std::vector<ingest::EmbeddingSet> layers;           // dependency layer first, then lexical if any
};

/// `count` random trees observed through `rotation`. Layers follow the
/// default probing choice (7 dependency, 5 lexical).
SyntheticSplit generate_split(const PlantedUniverse& universe, const Eigen::MatrixXd& rotation,
                              const std::string& language, std::size_t count, std::uint64_t seed,
                              int dep_layer = 7, int lex_layer = 5);

ingest::Corpus to_corpus(SyntheticSplit split, const std::string& language, ingest::Split which);

struct FixtureOptions {
  std::vector<std::string> languages{"aa", "bb"};
  std::vector<std::string> families{"Indo-European", "Other"};
  int dim = 16;
  std::size_t train_sentences = 20;
  std::size_t dev_sentences = 10;
  std::size_t test_sentences = 10;
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 8;
  bool lexical = true;
  double max_angle = 0.6;  // relatedness spread of the languages to the first one
  std::uint64_t seed = 11;
};

/// Writes a complete synthetic project into `dir`: treebanks, embedding
/// files for both layers, hypernymy forests, WALS-style feature and
/// corpus-size tables and a config.json referencing them. Returns the
/// config path.
std::string write_fixture(const std::string& dir, const FixtureOptions& options);

}  // namespace orthoprobe::app
