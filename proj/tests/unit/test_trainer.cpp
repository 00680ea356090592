#include "doctest.h"

#include <cstring>
#include <random>
#include <sstream>

#include "app/synth.hpp"
#include "error.hpp"
#include "json.hpp"
#include "probe/checkpoint.hpp"
#include "probe/geometry.hpp"
#include "probe/trainer.hpp"

using namespace orthoprobe;
using namespace orthoprobe::probe;

namespace {

struct Data {
  CorpusMap train, dev;
};

Data make_data(const std::vector<std::string>& langs, std::size_t n_train = 30, std::size_t n_dev = 10) {
  app::UniverseOptions uo;
  uo.dim = 8;
  uo.max_tokens = 7;
  uo.seed = 3;
  const auto u = app::make_universe(uo);
  std::mt19937_64 rng(4);
  Data d;
  std::uint64_t seed = 100;
  for (const auto& l : langs) {
    const auto R = app::random_orthogonal(uo.dim, rng);
    d.train[l] = app::to_corpus(app::generate_split(u, R, l, n_train, seed++), l, ingest::Split::Train);
    d.dev[l] = app::to_corpus(app::generate_split(u, R, l, n_dev, seed++), l, ingest::Split::Dev);
  }
  return d;
}

ProbeModel fresh(Regime regime, std::vector<std::string> langs, std::uint64_t seed = 5) {
  ProbeModel::Options o;
  o.regime = regime;
  o.languages = std::move(langs);
  o.dim = 8;
  o.tasks = {Task::DepDepth, Task::DepDistance};
  o.seed = seed;
  return ProbeModel::create(o);
}

TrainingConfig quick(std::uint64_t seed = 5) {
  TrainingConfig c;
  c.max_epochs = 4;
  c.batch_size = 5;
  c.seed = seed;
  return c;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("AllLangs on one language collapses to InLang step for step") {
  const auto d = make_data({"aa"});
  const auto in = train(fresh(Regime::InLang, {"aa"}), d.train, d.dev, quick());
  const auto all = train(fresh(Regime::AllLangs, {"aa"}), d.train, d.dev, quick());
  REQUIRE_FALSE(in.step_losses.empty());
  CHECK(bitwise_equal(in.step_losses, all.step_losses));
  CHECK(in.model.maps()[0].matrix == all.model.maps()[0].matrix);
}

TEST_CASE("training is deterministic in the seed") {
  const auto d = make_data({"aa", "bb"});
  const auto a = train(fresh(Regime::MappedLangs, {"aa", "bb"}), d.train, d.dev, quick());
  const auto b = train(fresh(Regime::MappedLangs, {"aa", "bb"}), d.train, d.dev, quick());
  CHECK(bitwise_equal(a.step_losses, b.step_losses));
  CHECK(encode_checkpoint(a.model) == encode_checkpoint(b.model));
  const auto c = train(fresh(Regime::MappedLangs, {"aa", "bb"}, 6), d.train, d.dev, quick(6));
  CHECK_FALSE(bitwise_equal(a.step_losses, c.step_losses));
}

TEST_CASE("training lowers the loss and keeps the anchor frozen") {
  const auto d = make_data({"aa", "bb"}, 60);
  auto cfg = quick();
  cfg.max_epochs = 15;
  const auto r = train(fresh(Regime::MappedLangs, {"aa", "bb"}), d.train, d.dev, cfg);
  REQUIRE(r.epochs.size() >= 2);
  CHECK(*r.epochs[r.best_epoch - 1].dev_loss < *r.epochs.front().dev_loss);
  CHECK(r.model.maps()[0].matrix == Eigen::MatrixXd::Identity(8, 8));
  CHECK_FALSE(r.model.maps()[0].trainable);
  CHECK(orthogonality_residual(r.model.maps()[1].matrix) < 1e-9);  // projected at the end
  for (const auto& m : r.residual_before_projection) CHECK(std::isfinite(m.residual));
}

TEST_CASE("configuration errors come before any step") {
  const auto d = make_data({"aa"});
  CHECK_THROWS_AS(train(fresh(Regime::InLang, {"aa", "bb"}), d.train, d.dev, quick()), ConfigError);
  ProbeModel::Options o;
  o.regime = Regime::MappedLangs;
  o.languages = {"aa"};
  o.dim = 8;
  CHECK_THROWS_AS(ProbeModel::create(o), ConfigError);
  auto bad = quick();
  bad.learning_rate = 0;
  CHECK_THROWS_AS(train(fresh(Regime::InLang, {"aa"}), d.train, d.dev, bad), ConfigError);
  bad = quick();
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = quick();
  bad.dso_weight = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("zero-shot target under MappedLangs keeps an identity map") {
  const auto d = make_data({"aa", "bb"});
  auto cfg = quick();
  cfg.fewshot = FewShot{"bb", 0};
  auto train_only_aa = d.train;
  train_only_aa.erase("bb");
  const auto r = train(fresh(Regime::MappedLangs, {"aa", "bb"}), train_only_aa, d.dev, cfg);
  CHECK(r.model.maps()[1].matrix == Eigen::MatrixXd::Identity(8, 8));
  CHECK_FALSE(r.model.maps()[1].trainable);

  cfg.fewshot = FewShot{"aa", 0};
  CHECK_THROWS_AS(train(fresh(Regime::MappedLangs, {"aa", "bb"}), d.train, d.dev, cfg), ConfigError);
  cfg.fewshot = FewShot{"bb", 5};
  CHECK_THROWS_AS(train(fresh(Regime::MappedLangs, {"aa", "bb"}), train_only_aa, d.dev, cfg), ConfigError);
}

TEST_CASE("target dev data does not steer early stopping") {
  auto d = make_data({"aa", "bb"});
  auto cfg = quick();
  cfg.fewshot = FewShot{"bb", 10};
  const auto a = train(fresh(Regime::MappedLangs, {"aa", "bb"}), d.train, d.dev, cfg);
  d.dev.erase("bb");
  const auto b = train(fresh(Regime::MappedLangs, {"aa", "bb"}), d.train, d.dev, cfg);
  CHECK(bitwise_equal(a.step_losses, b.step_losses));
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t e = 0; e < a.epochs.size(); ++e) CHECK(a.epochs[e].dev_loss == b.epochs[e].dev_loss);
}

TEST_CASE("training log and config serialisation") {
  const auto d = make_data({"aa"});
  const auto r = train(fresh(Regime::InLang, {"aa"}), d.train, d.dev, quick());
  std::istringstream log(training_log_jsonl(r));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) {
    CHECK(nlohmann::json::accept(line));
    ++lines;
  }
  CHECK(lines == r.epochs.size() + 1);

  auto cfg = quick(9);
  cfg.dso_weight = 0.7;
  cfg.fewshot = FewShot{"zz", 10};
  const auto back = training_config_from_json(to_json(cfg));
  CHECK(back.seed == 9);
  CHECK(back.dso_weight == 0.7);
  CHECK(back.max_epochs == 4);
  REQUIRE(back.fewshot);
  CHECK(back.fewshot->target == "zz");
  CHECK(back.fewshot->samples == 10);
  CHECK_THROWS_AS(training_config_from_json(nlohmann::json{{"learning_rate", "fast"}}), ConfigError);
}
