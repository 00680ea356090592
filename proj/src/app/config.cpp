#include "app/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "error.hpp"
#include "ingest/text.hpp"

namespace orthoprobe::app {

namespace fs = std::filesystem;
using nlohmann::json;

std::string expand_env(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("${", pos);
    if (open == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    const auto close = text.find('}', open + 2);
    if (close == std::string::npos) throw ConfigError("unterminated ${ in '" + text + "'");
    out += text.substr(pos, open - pos);
    const std::string name = text.substr(open + 2, close - open - 2);
    const char* value = std::getenv(name.c_str());
    if (!value) throw ConfigError("environment variable " + name + " is not set (used in '" + text + "')");
    out += value;
    pos = close + 1;
  }
  return out;
}

namespace {

std::string resolve(const std::string& raw, const std::string& base) {
  fs::path p(expand_env(raw));
  if (p.is_relative() && !base.empty()) p = fs::path(base) / p;
  return p.lexically_normal().string();
}

std::vector<probe::Regime> regimes_from(const json& j) {
  std::vector<probe::Regime> out;
  for (const auto& r : j) out.push_back(probe::parse_regime(r.get<std::string>()));
  return out;
}

json regimes_to(const std::vector<probe::Regime>& rs) {
  json j = json::array();
  for (auto r : rs) j.push_back(std::string(probe::to_string(r)));
  return j;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const std::string& base) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("languages") || !j["languages"].is_array()) throw ConfigError("config needs a 'languages' array");
    for (const auto& lj : j["languages"]) {
      LanguageConfig l;
      l.name = lj.at("name").get<std::string>();
      l.family = lj.value("family", l.family);
      if (lj.contains("forest") && !lj["forest"].is_null()) l.forest = resolve(lj["forest"].get<std::string>(), base);
      for (auto split : {ingest::Split::Train, ingest::Split::Dev, ingest::Split::Test}) {
        const char* key = ingest::to_string(split);
        if (!lj.contains(key) || lj[key].is_null()) continue;
        const auto& sj = lj[key];
        SplitPaths sp;
        sp.treebank = resolve(sj.at("treebank").get<std::string>(), base);
        if (sj.contains("embeddings")) {
          for (const auto& [layer, path] : sj["embeddings"].items()) {
            int n = 0;
            try {
              n = std::stoi(layer);
            } catch (const std::exception&) {
              throw ConfigError("language '" + l.name + "': embedding layer key '" + layer + "' is not an integer");
            }
            sp.embeddings[n] = resolve(path.get<std::string>(), base);
          }
        }
        l.splits[split] = std::move(sp);
      }
      c.languages.push_back(std::move(l));
    }
    if (j.contains("regime")) c.regime = probe::parse_regime(j["regime"].get<std::string>());
    if (j.contains("tasks")) {
      c.tasks.clear();
      for (const auto& t : j["tasks"]) c.tasks.push_back(probe::parse_task(t.get<std::string>()));
    }
    if (j.contains("layers")) {
      c.layers.dependency = j["layers"].value("dependency", c.layers.dependency);
      c.layers.lexical = j["layers"].value("lexical", c.layers.lexical);
    }
    if (j.contains("training")) c.training = probe::training_config_from_json(j["training"]);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.train_cap = j.value("train_cap", c.train_cap);
    c.sample_seed = j.value("sample_seed", c.sample_seed);
    c.max_sentence_tokens = j.value("max_sentence_tokens", c.max_sentence_tokens);
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      if (e.contains("seeds")) c.evaluation.seeds = e["seeds"].get<std::vector<std::uint64_t>>();
      c.evaluation.window.min_length = e.value("min_length", c.evaluation.window.min_length);
      c.evaluation.window.max_length = e.value("max_length", c.evaluation.window.max_length);
      c.evaluation.selection.epsilon = e.value("epsilon", c.evaluation.selection.epsilon);
      c.evaluation.selection.relative = e.value("relative_epsilon", c.evaluation.selection.relative);
      c.evaluation.alpha = e.value("alpha", c.evaluation.alpha);
      if (e.contains("regimes")) c.evaluation.regimes = regimes_from(e["regimes"]);
    }
    if (j.contains("transfer")) {
      const auto& t = j["transfer"];
      if (t.contains("targets")) c.transfer.targets = t["targets"].get<std::vector<std::string>>();
      if (t.contains("grid")) c.transfer.grid = t["grid"].get<std::vector<std::size_t>>();
      if (t.contains("regimes")) c.transfer.regimes = regimes_from(t["regimes"]);
    }
    if (j.contains("analysis")) {
      const auto& a = j["analysis"];
      if (a.contains("features")) c.analysis.features = resolve(a["features"].get<std::string>(), base);
      if (a.contains("corpus_sizes")) c.analysis.corpus_sizes = resolve(a["corpus_sizes"].get<std::string>(), base);
      c.analysis.reference_language = a.value("reference_language", std::string{});
    }
    c.out_dir = resolve(j.value("out", c.out_dir), base);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (const char* out = std::getenv("ORTHOPROBE_OUT"); out && *out) c.out_dir = resolve(out, "");
  if (c.analysis.reference_language.empty() && !c.languages.empty())
    c.analysis.reference_language = c.languages.front().name;
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  const std::string text = ingest::read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  auto base = fs::absolute(path).parent_path().string();
  return from_json(j, base);
}

void RunConfig::validate() const {
  if (languages.empty()) throw ConfigError("config lists no languages");
  std::set<std::string> names;
  for (const auto& l : languages)
    if (!names.insert(l.name).second) throw ConfigError("language '" + l.name + "' is listed twice");
  if (tasks.empty()) throw ConfigError("config lists no tasks");
  if (evaluation.seeds.empty()) throw ConfigError("evaluation.seeds must not be empty");
  if (evaluation.window.min_length > evaluation.window.max_length)
    throw ConfigError("evaluation.min_length exceeds evaluation.max_length");
  if (!(evaluation.alpha > 0.0 && evaluation.alpha < 1.0)) throw ConfigError("evaluation.alpha must be in (0, 1)");
  if (!(evaluation.selection.epsilon >= 0.0)) throw ConfigError("evaluation.epsilon must be non-negative");
  if (train_cap == 0) throw ConfigError("train_cap must be positive");
  training.validate();

  auto need = [](const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw ConfigError(what + " does not exist: " + path);
  };
  const bool lexical = std::any_of(tasks.begin(), tasks.end(), probe::is_lexical);
  const bool dependency = std::any_of(tasks.begin(), tasks.end(), [](auto t) { return !probe::is_lexical(t); });
  for (const auto& l : languages) {
    if (lexical) {
      if (!l.forest) throw ConfigError("language '" + l.name + "' needs a hypernymy forest for lexical tasks");
      need(*l.forest, "forest of '" + l.name + "'");
    }
    for (const auto& [split, sp] : l.splits) {
      const std::string what = l.name + " " + ingest::to_string(split);
      need(sp.treebank, what + " treebank");
      for (const auto& [layer, path] : sp.embeddings) need(path, what + " embeddings (layer " + std::to_string(layer) + ")");
      if (dependency && !sp.embeddings.count(layers.dependency))
        throw ConfigError(what + ": no embeddings for dependency layer " + std::to_string(layers.dependency));
      if (lexical && !sp.embeddings.count(layers.lexical))
        throw ConfigError(what + ": no embeddings for lexical layer " + std::to_string(layers.lexical));
    }
  }
  if (regime == probe::Regime::MappedLangs && languages.size() < 2)
    throw ConfigError("regime MappedLangs needs at least two languages (nothing to map)");
  for (const auto& t : transfer.targets)
    if (!names.count(t)) throw ConfigError("transfer target '" + t + "' is not a configured language");
  if (!names.count(analysis.reference_language))
    throw ConfigError("analysis.reference_language '" + analysis.reference_language + "' is not a configured language");
  if (analysis.features) need(*analysis.features, "feature table");
  if (analysis.corpus_sizes) need(*analysis.corpus_sizes, "corpus size table");
  if (training.fewshot && !names.count(training.fewshot->target))
    throw ConfigError("few-shot target '" + training.fewshot->target + "' is not a configured language");
}

const LanguageConfig& RunConfig::language(const std::string& name) const {
  for (const auto& l : languages)
    if (l.name == name) return l;
  throw ConfigError("unknown language '" + name + "'");
}

std::vector<std::string> RunConfig::language_names() const {
  std::vector<std::string> out;
  for (const auto& l : languages) out.push_back(l.name);
  return out;
}

eval::FamilyMap RunConfig::families() const {
  eval::FamilyMap out;
  for (const auto& l : languages) out[l.name] = l.family;
  return out;
}

json RunConfig::to_json() const {
  json langs = json::array();
  for (const auto& l : languages) {
    json lj = {{"name", l.name}, {"family", l.family}};
    if (l.forest) lj["forest"] = *l.forest;
    for (const auto& [split, sp] : l.splits) {
      json emb = json::object();
      for (const auto& [layer, path] : sp.embeddings) emb[std::to_string(layer)] = path;
      lj[ingest::to_string(split)] = {{"treebank", sp.treebank}, {"embeddings", emb}};
    }
    langs.push_back(lj);
  }
  json tasks_j = json::array();
  for (auto t : tasks) tasks_j.push_back(std::string(probe::to_string(t)));
  return {{"languages", langs},
          {"regime", std::string(probe::to_string(regime))},
          {"tasks", tasks_j},
          {"layers", {{"dependency", layers.dependency}, {"lexical", layers.lexical}}},
          {"training", probe::to_json(training)},
          {"init_scale", init_scale},
          {"train_cap", train_cap},
          {"sample_seed", sample_seed},
          {"max_sentence_tokens", max_sentence_tokens},
          {"evaluation",
           {{"seeds", evaluation.seeds},
            {"min_length", evaluation.window.min_length},
            {"max_length", evaluation.window.max_length},
            {"epsilon", evaluation.selection.epsilon},
            {"relative_epsilon", evaluation.selection.relative},
            {"alpha", evaluation.alpha},
            {"regimes", regimes_to(evaluation.regimes)}}},
          {"transfer", {{"targets", transfer.targets}, {"grid", transfer.grid}, {"regimes", regimes_to(transfer.regimes)}}},
          {"analysis",
           {{"features", analysis.features ? json(*analysis.features) : json(nullptr)},
            {"corpus_sizes", analysis.corpus_sizes ? json(*analysis.corpus_sizes) : json(nullptr)},
            {"reference_language", analysis.reference_language}}},
          {"out", out_dir}};
}

}  // namespace orthoprobe::app
