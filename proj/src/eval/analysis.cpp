#include "eval/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "error.hpp"
#include "eval/stats.hpp"
#include "ingest/text.hpp"

namespace orthoprobe::eval {

namespace {

std::string normalise(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::vector<std::string> csv_fields(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(ingest::trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(ingest::trim(cur));
  return out;
}

struct Csv {
  std::map<std::string, std::size_t> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

Csv read_csv(std::string_view text, std::initializer_list<const char*> required, const char* what) {
  Csv csv;
  bool header = true;
  std::size_t line_no = 0;
  for (auto line : ingest::split_lines(text)) {
    ++line_no;
    if (ingest::trim(line).empty()) continue;
    auto fields = csv_fields(line);
    if (header) {
      for (std::size_t i = 0; i < fields.size(); ++i) csv.columns[normalise(fields[i])] = i;
      for (const char* col : required)
        if (!csv.columns.count(normalise(col)))
          throw FormatError(std::string(what) + ": missing column '" + col + "'");
      header = false;
      continue;
    }
    if (fields.size() < csv.columns.size())
      throw FormatError(std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                        std::to_string(csv.columns.size()) + " fields");
    csv.rows.emplace_back(line_no, std::move(fields));
  }
  if (header) throw FormatError(std::string(what) + ": empty file");
  return csv;
}

}  // namespace

std::optional<FeatureArea> feature_area(std::string_view label) {
  const auto key = normalise(label);
  if (key == "syntactic" || key == "nominalsyntax" || key == "wordorder" || key == "simpleclauses" ||
      key == "complexsentences")
    return FeatureArea::Syntactic;
  if (key == "lexical" || key == "nominalcategories" || key == "verbcategories" || key == "lexicon")
    return FeatureArea::Lexical;
  return std::nullopt;
}

FeatureTable parse_features_csv(std::string_view text) {
  const auto csv = read_csv(text, {"language", "feature_id", "value", "area"}, "features CSV");
  FeatureTable table;
  const auto lang_col = csv.columns.at("language");
  const auto id_col = csv.columns.at("featureid");
  const auto value_col = csv.columns.at("value");
  const auto area_col = csv.columns.at("area");
  for (const auto& [line, f] : csv.rows) {
    auto area = feature_area(f[area_col]);
    if (!area) continue;
    auto& lang = table[f[lang_col]];
    lang.language = f[lang_col];
    if (f[value_col].empty()) continue;
    lang.features[f[id_col]] = {f[value_col], *area};
  }
  return table;
}

void merge_corpus_sizes_csv(std::string_view text, FeatureTable& table) {
  const auto csv = read_csv(text, {"language", "tokens"}, "corpus-size CSV");
  const auto lang_col = csv.columns.at("language");
  const auto tok_col = csv.columns.at("tokens");
  for (const auto& [line, f] : csv.rows) {
    std::string digits;
    for (char c : f[tok_col])
      if (c != ',' && c != '_' && c != ' ') digits.push_back(c);
    std::uint64_t tokens = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tokens);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || tokens == 0)
      throw FormatError("corpus-size CSV line " + std::to_string(line) + ": token count must be a positive integer");
    auto& lang = table[f[lang_col]];
    lang.language = f[lang_col];
    lang.wiki_tokens = tokens;
  }
}

std::optional<double> wals_hamming_similarity(const LanguageFeatures& a, const LanguageFeatures& b, FeatureArea area) {
  std::size_t shared = 0;
  std::size_t equal = 0;
  for (const auto& [id, va] : a.features) {
    if (va.second != area) continue;
    auto it = b.features.find(id);
    if (it == b.features.end() || it->second.second != area) continue;
    ++shared;
    if (it->second.first == va.first) ++equal;
  }
  if (shared == 0) return std::nullopt;
  return static_cast<double>(equal) / static_cast<double>(shared);
}

std::optional<double> pearson_feature_correlation(std::span<const double> metric, std::span<const double> feature) {
  if (metric.size() != feature.size()) throw ContractError("feature correlation inputs differ in length");
  if (metric.size() < 3) return std::nullopt;
  return pearson(metric, feature);
}

SeparationMatrix shared_dimension_count(const std::map<probe::Task, Eigen::VectorXd>& scalers, const SelectionRule& rule) {
  if (!(rule.epsilon > 0.0)) throw ContractError("selection threshold must be positive");
  Eigen::Index dim = -1;
  for (const auto& [task, v] : scalers) {
    if (dim >= 0 && v.size() != dim) throw ContractError("scaling vectors differ in length");
    dim = v.size();
  }
  std::array<std::vector<bool>, 4> selected;
  for (std::size_t t = 0; t < probe::kAllTasks.size(); ++t) {
    auto it = scalers.find(probe::kAllTasks[t]);
    if (it == scalers.end()) continue;
    const Eigen::VectorXd mag = it->second.cwiseAbs();
    const double threshold = rule.relative ? rule.epsilon * (mag.size() ? mag.maxCoeff() : 0.0) : rule.epsilon;
    selected[t].resize(static_cast<std::size_t>(mag.size()));
    for (Eigen::Index k = 0; k < mag.size(); ++k)
      selected[t][static_cast<std::size_t>(k)] = mag[k] > 0.0 && mag[k] >= threshold;
  }
  SeparationMatrix m{};
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t t = 0; t < 4; ++t) {
      if (selected[s].empty() || selected[t].empty()) continue;
      int count = 0;
      for (std::size_t k = 0; k < selected[s].size(); ++k)
        if (selected[s][k] && selected[t][k]) ++count;
      m[s][t] = count;
    }
  }
  return m;
}

nlohmann::json to_json(const SeparationMatrix& m) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t s = 0; s < 4; ++s) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t t = 0; t < 4; ++t) row[std::string(probe::to_string(probe::kAllTasks[t]))] = m[s][t];
    j[std::string(probe::to_string(probe::kAllTasks[s]))] = row;
  }
  return j;
}

}  // namespace orthoprobe::eval
