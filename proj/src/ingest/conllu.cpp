#include "ingest/conllu.hpp"

#include <charconv>
#include <sstream>

#include "error.hpp"
#include "ingest/text.hpp"
#include "ingest/tree.hpp"

namespace orthoprobe::ingest {

std::vector<int> SentenceAnnotation::heads() const {
  std::vector<int> h;
  h.reserve(tokens.size());
  for (const auto& t : tokens) h.push_back(t.head);
  return h;
}

std::vector<std::string> SentenceAnnotation::upos() const {
  std::vector<std::string> u;
  u.reserve(tokens.size());
  for (const auto& t : tokens) u.push_back(t.upos);
  return u;
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::optional<std::string> lexnode_from_misc(std::string_view misc) {
  if (misc == "_") return std::nullopt;
  for (auto item : split(misc, '|')) {
    constexpr std::string_view key = "LexNode=";
    if (item.substr(0, key.size()) == key && item.size() > key.size())
      return std::string(item.substr(key.size()));
  }
  return std::nullopt;
}

struct SentenceBuilder {
  std::string id;
  std::size_t first_line = 0;
  std::vector<Token> tokens;

  void reset() {
    id.clear();
    first_line = 0;
    tokens.clear();
  }
};

SentenceAnnotation finish(SentenceBuilder& b, std::size_t ordinal) {
  SentenceAnnotation s;
  s.id = b.id.empty() ? "#" + std::to_string(ordinal) : b.id;
  s.tokens = std::move(b.tokens);
  const auto heads = s.heads();
  try {
    s.dep_depths = compute_tree_depths(heads);
    s.dep_dists = compute_tree_distances(heads);
  } catch (const StructuralError& e) {
    throw StructuralError("sentence '" + s.id + "' (line " + std::to_string(b.first_line) +
                          "): " + e.what());
  }
  b.reset();
  return s;
}

}  // namespace

std::vector<SentenceAnnotation> parse_conllu(std::string_view text) {
  std::vector<SentenceAnnotation> out;
  SentenceBuilder current;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) out.push_back(finish(current, out.size() + 1));
    current.reset();
  };

  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view key = "# sent_id =";
      if (line.substr(0, key.size()) == key) current.id = std::string(trim(line.substr(key.size())));
      continue;
    }
    const auto cols = split(line, '\t');
    if (cols.size() != 10)
      throw ParseError("line " + std::to_string(line_no) + ": expected 10 tab-separated columns, found " +
                       std::to_string(cols.size()));
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;

    int id = 0;
    if (!parse_int(cols[0], id))
      throw ParseError("line " + std::to_string(line_no) + ": invalid token id '" + std::string(cols[0]) + "'");
    if (id != static_cast<int>(current.tokens.size()) + 1)
      throw ParseError("line " + std::to_string(line_no) + ": token id " + std::to_string(id) +
                       " out of sequence");
    Token tok;
    if (!parse_int(cols[6], tok.head))
      throw ParseError("line " + std::to_string(line_no) + ": invalid head '" + std::string(cols[6]) + "'");
    if (current.tokens.empty()) current.first_line = line_no;
    tok.form = std::string(cols[1]);
    tok.lemma = std::string(cols[2]);
    tok.upos = std::string(cols[3]);
    tok.xpos = std::string(cols[4]);
    tok.feats = std::string(cols[5]);
    tok.deprel = std::string(cols[7]);
    tok.deps = std::string(cols[8]);
    tok.misc = std::string(cols[9]);
    tok.lexnode = lexnode_from_misc(cols[9]);
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return out;
}

std::vector<SentenceAnnotation> load_conllu(const std::string& path) {
  return parse_conllu(read_text_file(path));
}

void annotate_lexical(SentenceAnnotation& sentence, const HypernymyForest& forest) {
  const auto n = static_cast<Eigen::Index>(sentence.size());
  LexicalTargets lex;
  lex.depths = Eigen::VectorXd::Zero(n);
  lex.depth_mask = Mask::Constant(n, false);
  lex.dists = Eigen::MatrixXd::Zero(n, n);
  lex.dist_mask = PairMask::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& node = sentence.tokens[i].lexnode;
    if (!node) continue;
    if (!forest.contains(*node))
      throw AnnotationError("sentence '" + sentence.id + "', token " + std::to_string(i + 1) +
                            ": lexical node '" + *node + "' is not in the hypernymy forest");
    lex.depths[i] = forest.depth(*node);
    lex.depth_mask[i] = true;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!lex.depth_mask[i]) continue;
    for (Eigen::Index j = i; j < n; ++j) {
      if (!lex.depth_mask[j]) continue;
      auto d = forest.distance(*sentence.tokens[i].lexnode, *sentence.tokens[j].lexnode);
      if (!d) continue;
      lex.dists(i, j) = lex.dists(j, i) = *d;
      lex.dist_mask(i, j) = lex.dist_mask(j, i) = true;
    }
  }
  sentence.lex = std::move(lex);
}

std::string write_conllu(std::span<const SentenceAnnotation> sentences,
                         std::span<const std::vector<int>> heads) {
  if (!heads.empty() && heads.size() != sentences.size())
    throw ContractError("write_conllu: one head vector per sentence required");
  std::ostringstream out;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& sent = sentences[s];
    const bool replace = !heads.empty();
    if (replace && heads[s].size() != sent.size())
      throw ContractError("write_conllu: head vector length differs for sentence '" + sent.id + "'");
    out << "# sent_id = " << sent.id << '\n';
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const auto& t = sent.tokens[i];
      out << i + 1 << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos << '\t'
          << t.feats << '\t' << (replace ? heads[s][i] : t.head) << '\t' << (replace ? "_" : t.deprel)
          << '\t' << t.deps << '\t' << t.misc << '\n';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace orthoprobe::ingest
