#include "app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>

#include "app/data.hpp"
#include "error.hpp"
#include "eval/analysis.hpp"
#include "eval/scoring.hpp"
#include "fsutil.hpp"
#include "ingest/conllu.hpp"
#include "ingest/embeddings.hpp"
#include "ingest/text.hpp"
#include "probe/checkpoint.hpp"
#include "probe/trainer.hpp"
#include "trees/parse.hpp"

namespace orthoprobe::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string out_path(const RunConfig& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

/// Language order for a model. Under MappedLangs the first language is the
/// frozen anchor, so a zero-shot target is moved out of that slot.
std::vector<std::string> model_languages(const RunConfig& c, probe::Regime regime,
                                         const std::optional<probe::FewShot>& fewshot) {
  auto names = c.language_names();
  if (regime == probe::Regime::MappedLangs && fewshot && names.size() > 1 && names.front() == fewshot->target)
    std::swap(names[0], names[1]);
  return names;
}

probe::TrainingResult train_model(const RunConfig& c, const LoadedData& data, probe::Regime regime,
                                  const probe::TrainingConfig& training) {
  if (data.dim == 0) throw FormatError("no embeddings were loaded; cannot size the probe");
  probe::ProbeModel::Options o;
  o.regime = regime;
  o.languages = model_languages(c, regime, training.fewshot);
  o.dim = data.dim;
  o.tasks = c.tasks;
  o.layers = c.layers;
  o.seed = training.seed;
  o.init_scale = c.init_scale;
  return probe::train(probe::ProbeModel::create(o), data.train, data.dev, training);
}

json checkpoint_extra(const RunConfig& c, const probe::TrainingConfig& training, const probe::TrainingResult& r) {
  return {{"seed", training.seed},
          {"training", probe::to_json(training)},
          {"sample_seed", c.sample_seed},
          {"train_cap", c.train_cap},
          {"best_epoch", r.best_epoch},
          {"projection_effect", r.projection_effect}};
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

/// Checkpoint layers and dimension must match what the config feeds it.
void check_compatible(const probe::ProbeModel& model, const RunConfig& c, int dim, const std::string& source) {
  for (auto t : model.tasks()) {
    if (std::find(c.tasks.begin(), c.tasks.end(), t) == c.tasks.end()) continue;
    if (model.layers().of(t) != c.layers.of(t))
      throw ConfigError(source + ": probe for " + std::string(probe::to_string(t)) + " was trained on layer " +
                        std::to_string(model.layers().of(t)) + " but the config supplies layer " +
                        std::to_string(c.layers.of(t)) + " embeddings");
  }
  if (dim != 0 && dim != model.dim())
    throw ConfigError(source + ": probe dimension " + std::to_string(model.dim()) + " does not match embedding dimension " +
                      std::to_string(dim));
}

void score_model(const probe::ProbeModel& model, const RunConfig& c, const probe::CorpusMap& test,
                 eval::ScoreTable& table) {
  for (auto t : c.tasks) {
    for (const auto& lang : table.languages) {
      double value = nan();
      if (model.has_task(t) && model.has_language(lang)) {
        auto it = test.find(lang);
        if (it != test.end() && !it->second.empty()) {
          auto s = eval::spearman_task(model, it->second, t, c.evaluation.window);
          if (s.spearman) value = *s.spearman;
        }
      }
      table.add(t, model.regime(), lang, value);
    }
  }
}

std::vector<ingest::SentenceAnnotation> annotations(const ingest::Corpus& corpus) {
  std::vector<ingest::SentenceAnnotation> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus.pairs) out.push_back(p->annotation);
  return out;
}

std::optional<double> score_value(const trees::AttachmentScore& s) {
  if (s.total == 0) return std::nullopt;
  return s.value();
}

json row_json(const eval::ParsingRow& r) {
  return {{"language", r.language},
          {"regime", r.regime},
          {"fewshot", r.fewshot},
          {"sentences", r.sentences},
          {"uas", r.uas ? json(*r.uas) : json(nullptr)},
          {"uuas", r.uuas ? json(*r.uuas) : json(nullptr)}};
}

std::string parse_table(const std::vector<eval::ParsingRow>& rows) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %-12s %7s %9s %8s %8s\n", "language", "source", "fewshot", "sentences", "UAS",
                "UUAS");
  out << buf;
  auto pct = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", *v * 100.0);
    return std::string(b);
  };
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %-12s %7zu %9zu %8s %8s\n", r.language.c_str(), r.regime.c_str(), r.fewshot,
                  r.sentences, pct(r.uas).c_str(), pct(r.uuas).c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace

CommandOutput run_train(const RunConfig& config) {
  config.validate();
  OutputLock lock(config.out_dir);
  const auto data = load_data(config, true, false);
  const auto result = train_model(config, data, config.regime, config.training);

  CommandOutput out;
  const auto ckpt = out_path(config, "model.ckpt");
  const auto log = out_path(config, "train_log.jsonl");
  probe::save_checkpoint(result.model, ckpt, checkpoint_extra(config, config.training, result));
  write_file_atomic(log, probe::training_log_jsonl(result));
  out.files = {ckpt, log};
  json residuals = json::object();
  for (const auto& r : result.residual_before_projection)
    if (r.trainable) residuals[r.language] = r.residual;
  out.summary = {{"regime", std::string(probe::to_string(config.regime))},
                 {"seed", config.training.seed},
                 {"epochs", result.epochs.size()},
                 {"best_epoch", result.best_epoch},
                 {"early_stopped", result.early_stopped},
                 {"trainable_parameters", result.model.trainable_parameter_count()},
                 {"orthogonality_before_projection", residuals},
                 {"projection_effect", result.projection_effect}};
  return out;
}

CommandOutput run_evaluate(const RunConfig& config, const std::vector<std::string>& checkpoints) {
  config.validate();
  OutputLock lock(config.out_dir);
  eval::ScoreTable table;
  table.languages = config.language_names();
  json meta = {{"length_window", {config.evaluation.window.min_length, config.evaluation.window.max_length}}};

  if (!checkpoints.empty()) {
    const auto data = load_data(config, false, true);
    json sources = json::array();
    for (const auto& path : checkpoints) {
      auto loaded = probe::load_checkpoint(path);
      check_compatible(loaded.model, config, data.dim, path);
      score_model(loaded.model, config, data.test, table);
      sources.push_back({{"checkpoint", path},
                         {"regime", std::string(probe::to_string(loaded.model.regime()))},
                         {"seed", loaded.manifest.value("seed", json(nullptr))}});
    }
    meta["runs"] = sources;
  } else {
    const auto data = load_data(config, true, true);
    auto regimes = config.evaluation.regimes;
    if (regimes.empty()) regimes.push_back(config.regime);
    json runs = json::array();
    for (auto regime : regimes) {
      for (auto seed : config.evaluation.seeds) {
        auto training = config.training;
        training.seed = seed;
        const auto result = train_model(config, data, regime, training);
        score_model(result.model, config, data.test, table);
        runs.push_back({{"regime", std::string(probe::to_string(regime))},
                        {"seed", seed},
                        {"best_epoch", result.best_epoch},
                        {"projection_effect", result.projection_effect}});
      }
    }
    meta["runs"] = runs;
  }

  auto report = eval::aggregate_report(table, config.families(), config.evaluation.alpha);
  for (auto& [k, v] : meta.items()) report.metadata[k] = v;
  CommandOutput out;
  const auto jpath = out_path(config, "report.json");
  const auto tpath = out_path(config, "report.txt");
  write_file_atomic(jpath, eval::to_json(report).dump(2) + "\n");
  write_file_atomic(tpath, eval::render_table(report));
  out.files = {jpath, tpath};
  out.summary = eval::to_json(report);
  return out;
}

CommandOutput run_parse(const RunConfig& config, const ParseRequest& request) {
  config.validate();
  OutputLock lock(config.out_dir);
  std::vector<eval::ParsingRow> rows;
  CommandOutput out;

  auto emit = [&](const ingest::Corpus& corpus, const trees::PredictionSource& source, const std::string& label,
                  std::size_t fewshot, const std::string& file) {
    const auto outcome = trees::parse_corpus(corpus, source);
    const auto sents = annotations(corpus);
    const auto path = out_path(config, file);
    write_file_atomic(path, ingest::write_conllu(sents, outcome.heads));
    out.files.push_back(path);
    rows.push_back({corpus.language, label, fewshot, corpus.size(), score_value(outcome.uas), score_value(outcome.uuas)});
  };

  if (request.checkpoint || request.gold) {
    std::optional<probe::LoadedCheckpoint> loaded;
    if (request.checkpoint) loaded = probe::load_checkpoint(*request.checkpoint);
    const std::string label = request.gold ? "gold" : std::string(probe::to_string(loaded->model.regime()));
    auto source_for = [&](const std::string& lang) {
      if (request.gold) return trees::gold_predictions();
      if (!loaded->model.has_language(lang))
        throw ConfigError("checkpoint has no parameters for language '" + lang + "'");
      return trees::probe_predictions(loaded->model, lang);
    };

    if (request.treebank) {
      std::vector<ingest::EmbeddingSet> sets;
      for (const auto& p : request.embeddings) sets.push_back(ingest::read_embeddings(p));
      std::string lang;
      if (request.language) {
        lang = *request.language;
      } else if (!sets.empty()) {
        lang = sets.front().language;
      } else if (loaded && loaded->model.languages().size() == 1) {
        lang = loaded->model.languages().front();
      } else {
        lang = fs::path(*request.treebank).stem().string();
      }
      if (!request.gold) {
        if (sets.empty()) throw ConfigError("parsing with a probe needs --embeddings for the treebank");
        const int need = loaded->model.layers().dependency;
        if (std::none_of(sets.begin(), sets.end(), [&](const auto& s) { return s.layer == need; }))
          throw ConfigError("the probe reads layer " + std::to_string(need) + " but no embedding file holds that layer");
        for (const auto& s : sets)
          if (s.dim != loaded->model.dim())
            throw ConfigError("embedding dimension " + std::to_string(s.dim) + " does not match probe dimension " +
                              std::to_string(loaded->model.dim()));
      }
      auto corpus = ingest::assemble_corpus(lang, ingest::Split::Test, ingest::load_conllu(*request.treebank), sets,
                                            std::numeric_limits<std::size_t>::max());
      emit(corpus, source_for(lang), label, 0, "parsed-" + lang + ".conllu");
    } else {
      const auto data = load_data(config, false, true);
      if (loaded) check_compatible(loaded->model, config, data.dim, *request.checkpoint);
      for (const auto& [lang, corpus] : data.test) {
        if (corpus.empty()) continue;
        if (loaded && !request.language && !loaded->model.has_language(lang)) continue;
        if (request.language && lang != *request.language) continue;
        emit(corpus, source_for(lang), label, 0, "parsed-" + lang + ".conllu");
      }
    }
  } else {
    const auto data = load_data(config, true, true);
    auto targets = config.transfer.targets;
    if (targets.empty()) targets = config.language_names();
    if (request.language) targets = {*request.language};
    for (const auto& target : targets) {
      const auto& test = data.test.at(target);
      if (test.empty()) throw ConfigError("transfer target '" + target + "' has no test split");
      for (auto regime : config.transfer.regimes) {
        for (auto n : config.transfer.grid) {
          auto training = config.training;
          training.fewshot = probe::FewShot{target, n};
          const auto result = train_model(config, data, regime, training);
          const std::string label(probe::to_string(regime));
          emit(test, trees::probe_predictions(result.model, target), label, n,
               "parse/" + target + "." + label + ".n" + std::to_string(n) + ".conllu");
        }
      }
    }
  }

  json jrows = json::array();
  for (const auto& r : rows) jrows.push_back(row_json(r));
  out.summary = {{"rows", jrows}, {"punctuation_tag", trees::kPunctuationTag}};
  const auto jpath = out_path(config, "parse_summary.json");
  const auto tpath = out_path(config, "parse_summary.txt");
  write_file_atomic(jpath, out.summary.dump(2) + "\n");
  write_file_atomic(tpath, parse_table(rows));
  out.files.push_back(jpath);
  out.files.push_back(tpath);
  return out;
}

CommandOutput run_analyze(const RunConfig& config, const AnalyzeRequest& request) {
  config.validate();
  if (!config.analysis.features) throw ConfigError("analysis.features is not configured");
  OutputLock lock(config.out_dir);

  auto table = eval::parse_features_csv(ingest::read_text_file(*config.analysis.features));
  if (config.analysis.corpus_sizes)
    eval::merge_corpus_sizes_csv(ingest::read_text_file(*config.analysis.corpus_sizes), table);
  const auto& ref_name = config.analysis.reference_language;
  auto ref_it = table.find(ref_name);
  if (ref_it == table.end()) throw ConfigError("reference language '" + ref_name + "' has no typological features");
  const auto& ref = ref_it->second;

  auto reports = request.reports;
  if (reports.empty()) reports.push_back(out_path(config, "report.json"));

  struct Feature {
    std::string name;
    std::function<std::optional<double>(const std::string&)> value;
  };
  const std::vector<Feature> features = {
      {"wals_syntactic",
       [&](const std::string& l) -> std::optional<double> {
         auto it = table.find(l);
         if (it == table.end()) return std::nullopt;
         return eval::wals_hamming_similarity(it->second, ref, eval::FeatureArea::Syntactic);
       }},
      {"wals_lexical",
       [&](const std::string& l) -> std::optional<double> {
         auto it = table.find(l);
         if (it == table.end()) return std::nullopt;
         return eval::wals_hamming_similarity(it->second, ref, eval::FeatureArea::Lexical);
       }},
      {"wiki_tokens",
       [&](const std::string& l) -> std::optional<double> {
         auto it = table.find(l);
         if (it == table.end() || !it->second.wiki_tokens) return std::nullopt;
         return static_cast<double>(*it->second.wiki_tokens);
       }},
  };

  json correlations = json::array();
  std::ostringstream text;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-14s %-14s", "task", "row");
  text << "== Pearson correlation with similarity to " << ref_name << " / corpus size ==\n" << buf;
  for (const auto& f : features) {
    std::snprintf(buf, sizeof buf, " %15s", f.name.c_str());
    text << buf;
  }
  text << '\n';

  for (const auto& path : reports) {
    json j;
    try {
      j = json::parse(ingest::read_text_file(path));
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    const auto report = eval::report_from_json(j);
    for (const auto& t : report.tasks) {
      for (const auto& row : t.rows) {
        const bool as_delta = row.regime != probe::Regime::InLang;
        const std::string label = (as_delta ? "d " : "") + std::string(probe::to_string(row.regime));
        std::snprintf(buf, sizeof buf, "%-14s %-14s", std::string(probe::to_string(t.task)).c_str(), label.c_str());
        text << buf;
        for (const auto& f : features) {
          std::vector<double> xs, ys;
          for (const auto& [lang, cell] : row.languages) {
            const auto metric = as_delta ? cell.delta : cell.value;
            const auto feat = f.value(lang);
            if (metric && feat) {
              xs.push_back(*metric);
              ys.push_back(*feat);
            }
          }
          const auto r = eval::pearson_feature_correlation(xs, ys);
          correlations.push_back({{"report", path},
                                  {"task", std::string(probe::to_string(t.task))},
                                  {"regime", std::string(probe::to_string(row.regime))},
                                  {"metric", as_delta ? "delta" : "value"},
                                  {"feature", f.name},
                                  {"languages", xs.size()},
                                  {"pearson", r ? json(*r) : json(nullptr)}});
          if (r) {
            std::snprintf(buf, sizeof buf, " %15.3f", *r);
          } else {
            std::snprintf(buf, sizeof buf, " %15s", "n/a");
          }
          text << buf;
        }
        text << '\n';
      }
    }
  }

  json result = {{"reference_language", ref_name}, {"correlations", correlations}};
  if (request.checkpoint) {
    const auto loaded = probe::load_checkpoint(*request.checkpoint);
    const auto& model = loaded.model;
    const std::size_t lang =
        model.has_language(ref_name) ? model.language_index(ref_name) : std::size_t{0};
    std::map<probe::Task, Eigen::VectorXd> scalers;
    for (auto t : model.tasks()) scalers[t] = model.scaler_for(t, lang).values;
    const auto m = eval::shared_dimension_count(scalers, config.evaluation.selection);
    result["separation"] = {{"checkpoint", *request.checkpoint},
                            {"language", model.regime() == probe::Regime::InLang ? model.languages()[lang] : "*"},
                            {"epsilon", config.evaluation.selection.epsilon},
                            {"relative", config.evaluation.selection.relative},
                            {"matrix", eval::to_json(m)}};
    text << "\n== shared dimensions (|d| >= " << config.evaluation.selection.epsilon
         << (config.evaluation.selection.relative ? " * max|d|" : "") << ") ==\n";
    std::snprintf(buf, sizeof buf, "%-14s", "");
    text << buf;
    for (auto t : probe::kAllTasks) {
      std::snprintf(buf, sizeof buf, " %13s", std::string(probe::to_string(t)).c_str());
      text << buf;
    }
    text << '\n';
    for (std::size_t a = 0; a < probe::kAllTasks.size(); ++a) {
      std::snprintf(buf, sizeof buf, "%-14s", std::string(probe::to_string(probe::kAllTasks[a])).c_str());
      text << buf;
      for (std::size_t b = 0; b < probe::kAllTasks.size(); ++b) {
        std::snprintf(buf, sizeof buf, " %13d", m[a][b]);
        text << buf;
      }
      text << '\n';
    }
  }

  CommandOutput out;
  const auto jpath = out_path(config, "analysis.json");
  const auto tpath = out_path(config, "analysis.txt");
  write_file_atomic(jpath, result.dump(2) + "\n");
  write_file_atomic(tpath, text.str());
  out.files = {jpath, tpath};
  out.summary = result;
  return out;
}

}  // namespace orthoprobe::app
