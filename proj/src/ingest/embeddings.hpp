#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace orthoprobe::ingest {

/// Word vectors of one encoder layer for one language. Each matrix is
/// word_count x dim.
struct EmbeddingSet {
  std::string language;
  int layer = 0;
  int dim = 0;
  std::vector<Eigen::MatrixXf> sentences;
};

inline constexpr std::string_view kEmbeddingMagic = "OPEMB1\n";

/// Binary layout: magic, one JSON header line, then per sentence a u32 LE
/// word count followed by word_count*dim f32 LE values, row-major.
std::string encode_embeddings(const EmbeddingSet& set);
EmbeddingSet decode_embeddings(std::string_view bytes);

/// FormatError for dimension mismatches or non-finite values (with the
/// sentence index), IoError for filesystem failures.
void write_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet read_embeddings(const std::string& path);

}  // namespace orthoprobe::ingest
