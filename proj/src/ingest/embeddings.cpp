#include "ingest/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "json.hpp"

#include "error.hpp"
#include "fsutil.hpp"
#include "ingest/text.hpp"

namespace orthoprobe::ingest {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

std::string sentence_tag(std::size_t index) { return "sentence " + std::to_string(index); }

}  // namespace

std::string encode_embeddings(const EmbeddingSet& set) {
  if (set.dim <= 0) throw FormatError("embedding dim must be positive");
  nlohmann::json header = {{"dim", set.dim},
                           {"layer", set.layer},
                           {"language", set.language},
                           {"count", set.sentences.size()},
                           {"dtype", "f32le"}};
  std::string out(kEmbeddingMagic);
  out += header.dump();
  out.push_back('\n');
  for (std::size_t s = 0; s < set.sentences.size(); ++s) {
    const auto& m = set.sentences[s];
    if (m.cols() != set.dim)
      throw FormatError(sentence_tag(s) + ": has " + std::to_string(m.cols()) + " columns, header dim is " +
                        std::to_string(set.dim));
    if (!m.allFinite()) throw FormatError(sentence_tag(s) + ": contains non-finite values");
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_u32(out, std::bit_cast<std::uint32_t>(m(r, c)));
  }
  return out;
}

EmbeddingSet decode_embeddings(std::string_view bytes) {
  if (bytes.substr(0, kEmbeddingMagic.size()) != kEmbeddingMagic)
    throw FormatError("bad magic: not an OPEMB1 embedding file");
  std::size_t pos = kEmbeddingMagic.size();
  const auto eol = bytes.find('\n', pos);
  if (eol == std::string_view::npos) throw FormatError("missing header line");
  EmbeddingSet set;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(pos, eol - pos));
    if (header.at("dtype").get<std::string>() != "f32le")
      throw FormatError("unsupported dtype '" + header.at("dtype").get<std::string>() + "'");
    set.dim = header.at("dim").get<int>();
    set.layer = header.at("layer").get<int>();
    set.language = header.at("language").get<std::string>();
    count = header.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid header: ") + e.what());
  }
  if (set.dim <= 0) throw FormatError("header dim must be positive");
  pos = eol + 1;

  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  set.sentences.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    if (bytes.size() - pos < 4) throw FormatError(sentence_tag(s) + ": truncated word count");
    const std::uint32_t words = get_u32(data + pos);
    pos += 4;
    const std::size_t need = std::size_t(words) * std::size_t(set.dim) * 4;
    if (bytes.size() - pos < need)
      throw FormatError(sentence_tag(s) + ": expected " + std::to_string(words) + "x" +
                        std::to_string(set.dim) + " values, file is truncated");
    Eigen::MatrixXf m(words, set.dim);
    for (std::uint32_t r = 0; r < words; ++r) {
      for (int c = 0; c < set.dim; ++c) {
        const float v = std::bit_cast<float>(get_u32(data + pos));
        if (!std::isfinite(v))
          throw FormatError(sentence_tag(s) + ": non-finite value at word " + std::to_string(r) +
                            ", component " + std::to_string(c));
        m(r, c) = v;
        pos += 4;
      }
    }
    set.sentences.push_back(std::move(m));
  }
  if (pos != bytes.size())
    throw FormatError("trailing bytes after " + std::to_string(count) + " sentences (header count mismatch)");
  return set;
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
  write_file_atomic(path, encode_embeddings(set));
}

EmbeddingSet read_embeddings(const std::string& path) {
  try {
    return decode_embeddings(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace orthoprobe::ingest
