#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "orthoprobe/orthoprobe.h"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> regime;
  std::optional<std::size_t> fewshot;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "training seed (replaces the configured seed list)");
  cmd->add_option("--regime", c.regime, "InLang, MappedLangs or AllLangs");
  cmd->add_option("--fewshot", c.fewshot, "target-language training sentences");
  cmd->add_option("--out", c.out, "output directory");
}

int fail(op_status s) {
  std::cerr << "orthoprobe: " << op_status_name(s) << ": " << op_last_error() << '\n';
  return op_status_exit_code(s);
}

struct ConfigHandle {
  op_config* ptr = nullptr;
  ~ConfigHandle() { op_config_free(ptr); }
};

op_status open_config(const Common& c, ConfigHandle& h) {
  op_status s = op_config_load(c.config.c_str(), &h.ptr);
  if (s != OP_OK) return s;
  if (c.seed && (s = op_config_set_seed(h.ptr, *c.seed)) != OP_OK) return s;
  if (c.regime && (s = op_config_set_regime(h.ptr, c.regime->c_str())) != OP_OK) return s;
  if (c.fewshot && (s = op_config_set_fewshot(h.ptr, *c.fewshot)) != OP_OK) return s;
  if (c.out && (s = op_config_set_out(h.ptr, c.out->c_str())) != OP_OK) return s;
  return OP_OK;
}

std::string out_dir(const ConfigHandle& h) {
  char* text = nullptr;
  if (op_config_to_json(h.ptr, &text) != OP_OK) return ".";
  auto j = nlohmann::json::parse(text);
  op_string_free(text);
  return j.value("out", std::string("."));
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  if (in) std::cout << in.rdbuf();
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

int finish(op_status s, char* summary) {
  if (summary) op_string_free(summary);
  return s == OP_OK ? 0 : fail(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthogonal structural probes: training, evaluation, tree extraction and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", op_version());

  Common train_opts, eval_opts, parse_opts, analyze_opts;
  auto* train = app.add_subcommand("train", "train one probe and write a checkpoint and training log");
  add_common(train, train_opts);

  auto* evaluate = app.add_subcommand("evaluate", "score checkpoints, or train and score one probe per seed");
  add_common(evaluate, eval_opts);
  std::vector<std::string> eval_checkpoints;
  evaluate->add_option("--checkpoint", eval_checkpoints, "checkpoint(s) to score")->check(CLI::ExistingFile);

  auto* parse = app.add_subcommand("parse", "extract dependency trees and score them");
  add_common(parse, parse_opts);
  std::string parse_checkpoint, parse_treebank, parse_language;
  std::vector<std::string> parse_embeddings;
  bool parse_gold = false;
  parse->add_option("--checkpoint", parse_checkpoint, "probe checkpoint (omit to run the transfer grid)")
      ->check(CLI::ExistingFile);
  parse->add_option("--treebank", parse_treebank, "CoNLL-U file to parse")->check(CLI::ExistingFile);
  parse->add_option("--embeddings", parse_embeddings, "OPEMB1 file(s) for --treebank")->check(CLI::ExistingFile);
  parse->add_option("--language", parse_language, "language whose probe parameters to use");
  parse->add_flag("--gold", parse_gold, "use gold distances and depths instead of a probe");

  auto* analyze = app.add_subcommand("analyze", "correlate results with typology and count shared dimensions");
  add_common(analyze, analyze_opts);
  std::vector<std::string> reports;
  std::string analyze_checkpoint;
  analyze->add_option("--report", reports, "report.json file(s) (default: <out>/report.json)")->check(CLI::ExistingFile);
  analyze->add_option("--checkpoint", analyze_checkpoint, "checkpoint for the shared-dimension matrix")
      ->check(CLI::ExistingFile);

  auto* synth = app.add_subcommand("synth", "write a synthetic project with planted structure");
  op_synth_options so;
  op_synth_defaults(&so);
  std::string synth_out;
  std::vector<std::string> synth_langs;
  bool no_lexical = false;
  synth->add_option("--out", synth_out, "directory to create")->required();
  synth->add_option("--languages", synth_langs, "language codes")->delimiter(',');
  synth->add_option("--dim", so.dim, "embedding dimension");
  synth->add_option("--train", so.train_sentences, "training sentences per language");
  synth->add_option("--dev", so.dev_sentences, "dev sentences per language");
  synth->add_option("--test", so.test_sentences, "test sentences per language");
  synth->add_option("--min-tokens", so.min_tokens, "shortest sentence");
  synth->add_option("--max-tokens", so.max_tokens, "longest sentence");
  synth->add_flag("--no-lexical", no_lexical, "omit hypernymy annotation");
  synth->add_option("--seed", so.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  char* summary = nullptr;
  if (*synth) {
    auto names = c_strings(synth_langs);
    so.languages = names.data();
    so.language_count = names.size();
    so.lexical = no_lexical ? 0 : 1;
    const op_status s = op_synth(synth_out.c_str(), &so, &summary);
    if (s == OP_OK) std::cout << "wrote " << summary << '\n';
    return finish(s, summary);
  }

  const Common& opts = *train ? train_opts : *evaluate ? eval_opts : *parse ? parse_opts : analyze_opts;
  ConfigHandle cfg;
  if (op_status s = open_config(opts, cfg); s != OP_OK) return fail(s);
  const std::string out = out_dir(cfg);

  op_status s = OP_OK;
  if (*train) {
    s = op_train(cfg.ptr, &summary);
    if (s == OP_OK) std::cout << summary << '\n';
  } else if (*evaluate) {
    auto cps = c_strings(eval_checkpoints);
    s = op_evaluate(cfg.ptr, cps.data(), cps.size(), &summary);
    if (s == OP_OK) print_file(out + "/report.txt");
  } else if (*parse) {
    auto embs = c_strings(parse_embeddings);
    op_parse_options po{};
    po.checkpoint = parse_checkpoint.empty() ? nullptr : parse_checkpoint.c_str();
    po.treebank = parse_treebank.empty() ? nullptr : parse_treebank.c_str();
    po.embeddings = embs.data();
    po.embedding_count = embs.size();
    po.language = parse_language.empty() ? nullptr : parse_language.c_str();
    po.gold = parse_gold ? 1 : 0;
    s = op_parse(cfg.ptr, &po, &summary);
    if (s == OP_OK) print_file(out + "/parse_summary.txt");
  } else if (*analyze) {
    auto rs = c_strings(reports);
    s = op_analyze(cfg.ptr, rs.data(), rs.size(), analyze_checkpoint.empty() ? nullptr : analyze_checkpoint.c_str(),
                   &summary);
    if (s == OP_OK) print_file(out + "/analysis.txt");
  }
  return finish(s, summary);
}
