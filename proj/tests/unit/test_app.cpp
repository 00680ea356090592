#include "doctest.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/data.hpp"
#include "app/synth.hpp"
#include "error.hpp"
#include "eval/analysis.hpp"
#include "eval/report.hpp"
#include "ingest/conllu.hpp"
#include "ingest/text.hpp"
#include "probe/checkpoint.hpp"

using namespace orthoprobe;
using namespace orthoprobe::app;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string scratch(const std::string& name) {
  ::unsetenv("ORTHOPROBE_OUT");
  const auto dir = fs::temp_directory_path() / ("orthoprobe_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string fixture(const std::string& name, FixtureOptions o = {}) { return write_fixture(scratch(name), o); }

FixtureOptions five_languages() {
  FixtureOptions o;
  o.languages = {"aa", "bb", "cc", "dd", "ee"};
  o.families = {"Indo-European", "Indo-European", "Other", "Other", "Other"};
  return o;
}

json read_json(const std::string& path) { return json::parse(ingest::read_text_file(path)); }

std::string write_json(const std::string& dir, const std::string& name, const json& j) {
  const auto path = (fs::path(dir) / name).string();
  std::ofstream(path) << j.dump(2);
  return path;
}

std::string file_bytes(const std::string& path) { return ingest::read_text_file(path); }

}  // namespace

TEST_CASE("config: loading, paths and validation") {
  const auto path = fixture("config");
  const auto dir = fs::path(path).parent_path().string();
  auto cfg = RunConfig::load(path);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.language_names() == std::vector<std::string>{"aa", "bb"});
  CHECK(fs::path(cfg.out_dir).is_absolute());
  CHECK(cfg.training.dso_weight == 1.0);
  CHECK(cfg.evaluation.seeds.size() == 2);
  CHECK(cfg.families().at("aa") == "Indo-European");

  auto j = read_json(path);
  ::setenv("OP_TEST_DIR", dir.c_str(), 1);
  j["languages"][0]["train"]["treebank"] = "${OP_TEST_DIR}/aa-train.conllu";
  const auto expanded = RunConfig::from_json(j, "/elsewhere");
  CHECK(expanded.language("aa").splits.at(ingest::Split::Train).treebank == dir + "/aa-train.conllu");
  ::unsetenv("OP_TEST_DIR");
  CHECK_THROWS_AS(RunConfig::from_json(j, dir), ConfigError);
  CHECK(expand_env("plain") == "plain");

  auto missing = read_json(path);
  missing["languages"][0]["dev"]["treebank"] = "nope.conllu";
  CHECK_THROWS_AS(RunConfig::from_json(missing, dir).validate(), ConfigError);

  auto seeds = read_json(path);
  seeds["evaluation"]["seeds"] = json::array();
  CHECK_THROWS_AS(RunConfig::from_json(seeds, dir).validate(), ConfigError);

  auto mapped = read_json(path);
  mapped["regime"] = "MappedLangs";
  mapped["languages"].erase(1);
  mapped["transfer"]["targets"] = json::array();
  CHECK_THROWS_AS(RunConfig::from_json(mapped, dir).validate(), ConfigError);

  auto unknown = read_json(path);
  unknown["transfer"]["targets"] = {"zz"};
  CHECK_THROWS_AS(RunConfig::from_json(unknown, dir).validate(), ConfigError);

  auto bad_regime = read_json(path);
  bad_regime["regime"] = "SomeLangs";
  CHECK_THROWS_AS(RunConfig::from_json(bad_regime, dir), ConfigError);

  ::setenv("ORTHOPROBE_OUT", "/tmp/orthoprobe_env_out", 1);
  CHECK(RunConfig::load(path).out_dir == "/tmp/orthoprobe_env_out");
  ::unsetenv("ORTHOPROBE_OUT");

  CHECK_THROWS_AS(RunConfig::load(dir + "/absent.json"), IoError);
}

TEST_CASE("data loading honours the training cap") {
  auto cfg = RunConfig::load(fixture("data"));
  cfg.train_cap = 7;
  const auto data = load_data(cfg);
  CHECK(data.dim == 16);
  CHECK(data.train.at("aa").size() == 7);
  CHECK(data.dev.at("aa").size() == 10);
  CHECK(data.test.at("bb").size() == 10);
  CHECK(data.train.at("aa").pairs[0]->annotation.lex.has_value());
  CHECK(required_layers(cfg.tasks, cfg.layers) == std::set<int>{5, 7});
}

TEST_CASE("output lock excludes a second writer") {
  const auto dir = scratch("lock");
  {
    OutputLock first(dir);
    CHECK_THROWS_AS(OutputLock{dir}, IoError);
  }
  CHECK_NOTHROW(OutputLock{dir});
}

TEST_CASE("train: fixture runs quickly and deterministically") {
  const auto path = fixture("train");
  auto cfg = RunConfig::load(path);
  const auto start = std::chrono::steady_clock::now();
  const auto out = run_train(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 60.0);
  const auto ckpt = cfg.out_dir + "/model.ckpt";
  REQUIRE(fs::exists(ckpt));
  CHECK(fs::exists(cfg.out_dir + "/train_log.jsonl"));
  const auto first = file_bytes(ckpt);
  run_train(cfg);
  CHECK(file_bytes(ckpt) == first);
  CHECK(out.summary.at("orthogonality_before_projection").size() == 2);
  for (const auto& [lang, residual] : out.summary.at("orthogonality_before_projection").items())
    CHECK(residual.get<double>() <= 0.1);
  CHECK(out.summary.at("projection_effect").get<double>() < 0.01);

  const auto loaded = probe::load_checkpoint(ckpt);
  CHECK(loaded.manifest.at("seed") == 1);
  CHECK(loaded.model.regime() == probe::Regime::InLang);
}

TEST_CASE("train: validation failure leaves no checkpoint") {
  const auto path = fixture("train_invalid");
  auto cfg = RunConfig::load(path);
  cfg.evaluation.seeds.clear();
  CHECK_THROWS_AS(run_train(cfg), ConfigError);
  CHECK_FALSE(fs::exists(cfg.out_dir + "/model.ckpt"));

  auto mapped = RunConfig::load(path);
  mapped.regime = probe::Regime::MappedLangs;
  mapped.languages.resize(1);
  mapped.transfer.targets.clear();
  CHECK_THROWS_AS(run_train(mapped), ConfigError);
  CHECK_FALSE(fs::exists(mapped.out_dir + "/model.ckpt"));
}

TEST_CASE("evaluate: planted checkpoint, seeds and missing test data") {
  const auto path = fixture("evaluate");
  const auto dir = fs::path(path).parent_path().string();
  auto cfg = RunConfig::load(path);
  const auto out = run_evaluate(cfg, {dir + "/planted.ckpt"});
  const auto report = eval::report_from_json(out.summary);
  for (const auto& t : report.tasks)
    for (const auto& row : t.rows)
      for (const auto& [lang, cell] : row.languages) {
        REQUIRE(cell.value);
        CHECK(*cell.value >= 0.95);
      }
  CHECK(fs::exists(cfg.out_dir + "/report.txt"));

  const auto trained = run_evaluate(cfg);
  CHECK(trained.summary.at("seed_count") == 2);

  auto j = read_json(path);
  j["languages"][1].erase("test");
  auto no_test = RunConfig::from_json(j, dir);
  const auto r = eval::report_from_json(run_evaluate(no_test, {dir + "/planted.ckpt"}).summary);
  const auto* row = r.find(probe::Task::DepDistance, probe::Regime::InLang);
  REQUIRE(row);
  CHECK_FALSE(row->languages.at("bb").value);
  CHECK(row->languages.at("aa").value);
  CHECK(eval::render_table(r).find("n/a") != std::string::npos);
}

TEST_CASE("evaluate: incompatible checkpoint is rejected with a reason") {
  const auto path = fixture("mismatch");
  const auto dir = fs::path(path).parent_path().string();
  auto j = read_json(path);
  j["layers"]["dependency"] = 5;
  auto cfg = RunConfig::from_json(j, dir);
  try {
    run_evaluate(cfg, {dir + "/planted.ckpt"});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("layer") != std::string::npos);
  }
}

TEST_CASE("parse: gold injection and probe output") {
  const auto path = fixture("parse");
  const auto dir = fs::path(path).parent_path().string();
  auto cfg = RunConfig::load(path);
  ParseRequest gold;
  gold.gold = true;
  const auto g = run_parse(cfg, gold);
  REQUIRE(g.summary.at("rows").size() == 2);
  for (const auto& row : g.summary.at("rows")) {
    CHECK(row.at("uas") == 1.0);
    CHECK(row.at("uuas") == 1.0);
  }

  ParseRequest probe_req;
  probe_req.checkpoint = dir + "/planted.ckpt";
  probe_req.treebank = dir + "/aa-test.conllu";
  probe_req.embeddings = {dir + "/aa-test.L7.emb"};
  const auto p = run_parse(cfg, probe_req);
  REQUIRE(p.summary.at("rows").size() == 1);
  const double uas = p.summary.at("rows")[0].at("uas");
  CHECK(uas >= 0.0);
  CHECK(uas <= 1.0);
  const auto parsed = ingest::load_conllu(cfg.out_dir + "/parsed-aa.conllu");
  CHECK(parsed.size() == 10);
  for (const auto& s : parsed) CHECK(s.dep_dists.maxCoeff() <= static_cast<int>(s.size()) - 1);
}

TEST_CASE("parse: leave-one-out grid over five languages") {
  const auto path = fixture("grid", five_languages());
  auto cfg = RunConfig::load(path);
  cfg.transfer.targets.clear();
  cfg.transfer.grid = {0};
  cfg.transfer.regimes = {probe::Regime::AllLangs};
  cfg.training.max_epochs = 5;
  const auto out = run_parse(cfg, ParseRequest{});
  const auto& rows = out.summary.at("rows");
  REQUIRE(rows.size() == 5);
  std::set<std::string> targets;
  for (const auto& r : rows) {
    targets.insert(r.at("language").get<std::string>());
    CHECK(r.at("fewshot") == 0);
  }
  CHECK(targets.size() == 5);
  CHECK(fs::exists(cfg.out_dir + "/parse_summary.txt"));
}

TEST_CASE("analyze: fixture end to end") {
  const auto path = fixture("analyze", five_languages());
  const auto dir = fs::path(path).parent_path().string();
  auto cfg = RunConfig::load(path);
  cfg.evaluation.seeds = {1};
  run_evaluate(cfg);
  AnalyzeRequest req;
  req.checkpoint = dir + "/planted.ckpt";
  const auto out = run_analyze(cfg, req);
  for (const auto& c : out.summary.at("correlations")) CHECK_FALSE(c.at("pearson").is_null());
  CHECK(out.summary.contains("separation"));
  const auto text = file_bytes(cfg.out_dir + "/analysis.txt");
  CHECK(text.find("n/a") == std::string::npos);
}

TEST_CASE("analyze: linear deltas and identical scalers") {
  const auto path = fixture("analyze_linear", five_languages());
  const auto dir = fs::path(path).parent_path().string();
  auto cfg = RunConfig::load(path);
  eval::FeatureTable sizes;
  eval::merge_corpus_sizes_csv(ingest::read_text_file(dir + "/corpus_sizes.csv"), sizes);
  eval::ScoreTable t;
  for (const auto& l : cfg.language_names()) {
    const double tokens = static_cast<double>(*sizes.at(l).wiki_tokens);
    t.add(probe::Task::DepDistance, probe::Regime::InLang, l, 0.5);
    t.add(probe::Task::DepDistance, probe::Regime::AllLangs, l, 0.5 + 1e-10 * tokens);
  }
  const auto report = write_json(dir, "linear.json", eval::to_json(eval::aggregate_report(t, cfg.families())));

  // Identical scaling vectors for every task.
  auto model = probe::load_checkpoint(dir + "/planted.ckpt").model;
  Eigen::VectorXd shared = Eigen::VectorXd::Zero(16);
  shared.head(5).setOnes();
  for (auto& s : model.scalers()) s.values = shared;
  probe::save_checkpoint(model, dir + "/same.ckpt");

  AnalyzeRequest req{{report}, dir + "/same.ckpt"};
  const auto out = run_analyze(cfg, req);
  bool found = false;
  for (const auto& c : out.summary.at("correlations"))
    if (c.at("regime") == "AllLangs" && c.at("feature") == "wiki_tokens") {
      CHECK(c.at("pearson").get<double>() == doctest::Approx(1.0));
      found = true;
    }
  CHECK(found);
  for (const auto& [task, row] : out.summary.at("separation").at("matrix").items())
    for (const auto& [other, v] : row.items()) CHECK(v == 5);
}
