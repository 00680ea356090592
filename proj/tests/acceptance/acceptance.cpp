// Prints one PASS/FAIL line per acceptance criterion; exits non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/data.hpp"
#include "app/synth.hpp"
#include "eval/report.hpp"
#include "eval/scoring.hpp"
#include "ingest/tree.hpp"
#include "probe/geometry.hpp"
#include "probe/gradients.hpp"
#include "probe/trainer.hpp"
#include "trees/extract.hpp"
#include "trees/parse.hpp"

using namespace orthoprobe;
using probe::Regime;
using probe::Task;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s  %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

probe::ProbeModel dep_model(Regime regime, std::vector<std::string> langs, int dim, std::uint64_t seed = 1) {
  probe::ProbeModel::Options o;
  o.regime = regime;
  o.languages = std::move(langs);
  o.dim = dim;
  o.tasks = {Task::DepDepth, Task::DepDistance};
  o.seed = seed;
  return probe::ProbeModel::create(o);
}

ingest::Corpus corpus_of(const app::PlantedUniverse& u, const Eigen::MatrixXd& R, const std::string& lang,
                         std::size_t n, std::uint64_t seed, ingest::Split split) {
  return app::to_corpus(app::generate_split(u, R, lang, n, seed), lang, split);
}

// ---------------------------------------------------------------------------

void planted_recovery() {
  app::UniverseOptions uo;
  uo.dim = 32;
  uo.min_tokens = 5;
  uo.max_tokens = 15;
  uo.seed = 3;
  const auto u = app::make_universe(uo);
  std::mt19937_64 rng(5);
  const auto R = app::random_orthogonal(32, rng);
  probe::CorpusMap train, dev;
  train.emplace("xx", corpus_of(u, R, "xx", 200, 1, ingest::Split::Train));
  dev.emplace("xx", corpus_of(u, R, "xx", 50, 2, ingest::Split::Dev));
  const auto test = corpus_of(u, R, "xx", 50, 3, ingest::Split::Test);

  probe::TrainingConfig cfg;
  cfg.max_epochs = 40;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = probe::train(dep_model(Regime::InLang, {"xx"}, 32), train, dev, cfg);
  const double secs = seconds_since(t0);

  // The planted parameters themselves, for reference: integer gold values
  // tie heavily, so even they may not reach 1 on depth.
  auto oracle = dep_model(Regime::InLang, {"xx"}, 32);
  oracle.maps()[0].matrix = R;
  for (auto& s : oracle.scalers()) s.values = u.dep_scale;

  const double dist = eval::spearman_task(r.model, test, Task::DepDistance).spearman.value_or(-1);
  const double depth = eval::spearman_task(r.model, test, Task::DepDepth).spearman.value_or(-1);
  const double odist = eval::spearman_task(oracle, test, Task::DepDistance).spearman.value_or(-1);
  const double odepth = eval::spearman_task(oracle, test, Task::DepDepth).spearman.value_or(-1);
  const bool pass = dist >= 0.95 && depth >= 0.95 && static_cast<int>(r.epochs.size()) <= 40 && secs < 120.0;
  report(pass, "planted-model recovery",
         fmt("held-out Spearman distance %.4f depth %.4f (planted parameters %.4f / %.4f), %zu epochs, %.2f s",
             dist, depth, odist, odepth, r.epochs.size(), secs));
}

void gradient_correctness() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  const double h = 1e-5;
  std::size_t checked = 0, bad = 0, dso_coords = 0;
  double worst = 0.0;
  auto compare = [&](double an, double fd) {
    const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
    worst = std::max(worst, rel);
    if (rel > 1e-4) ++bad;
    ++checked;
  };
  for (int trial = 0; trial < 8; ++trial) {
    const int dim = 3 + trial % 6;
    const auto regime = trial % 2 ? Regime::MappedLangs : Regime::InLang;
    auto model = dep_model(regime, {"aa", "bb"}, dim, 100 + trial);
    for (auto& m : model.maps()) {
      if (!m.trainable) continue;
      for (Eigen::Index i = 0; i < m.matrix.size(); ++i) m.matrix.data()[i] += 0.3 * g(rng);
    }
    for (auto& s : model.scalers())
      for (auto& x : s.values) x = g(rng);
    std::vector<std::shared_ptr<ingest::SentencePair>> pairs;
    for (int s = 0; s < 3; ++s) {
      const std::size_t n = 3 + static_cast<std::size_t>(s);
      std::vector<int> heads(n, 0);
      for (std::size_t k = 1; k < n; ++k) heads[k] = static_cast<int>(rng() % k) + 1;
      auto p = std::make_shared<ingest::SentencePair>();
      p->annotation.id = "g";
      p->annotation.tokens.resize(n);
      for (std::size_t k = 0; k < n; ++k) p->annotation.tokens[k].head = heads[k];
      p->annotation.dep_depths = ingest::compute_tree_depths(heads);
      p->annotation.dep_dists = ingest::compute_tree_distances(heads);
      Eigen::MatrixXf H(static_cast<Eigen::Index>(n), dim);
      for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = static_cast<float>(g(rng));
      p->layers[7] = H;
      pairs.push_back(p);
    }
    const double lambda = 0.25;
    for (std::size_t lang = 0; lang < 2; ++lang) {
      for (Task task : {Task::DepDistance, Task::DepDepth}) {
        probe::Batch b{lang, task, {}};
        for (const auto& p : pairs) b.sentences.push_back(p.get());
        const auto grad = probe::batch_gradient(model, b, lambda);
        if (grad.map_grad) {
          for (Eigen::Index i = 0; i < grad.map_grad->size(); ++i) {
            auto plus = model, minus = model;
            plus.maps()[grad.map].matrix.data()[i] += h;
            minus.maps()[grad.map].matrix.data()[i] -= h;
            compare(grad.map_grad->data()[i],
                    (probe::batch_objective(plus, b, lambda) - probe::batch_objective(minus, b, lambda)) / (2 * h));
            ++dso_coords;
          }
        }
        for (Eigen::Index k = 0; k < grad.scaler_grad.size(); ++k) {
          auto plus = model, minus = model;
          plus.scalers()[grad.scaler].values[k] += h;
          minus.scalers()[grad.scaler].values[k] -= h;
          compare(grad.scaler_grad[k],
                  (probe::batch_objective(plus, b, lambda) - probe::batch_objective(minus, b, lambda)) / (2 * h));
        }
      }
    }
  }
  report(bad == 0 && checked >= 500 && dso_coords > 0, "gradient correctness",
         fmt("%zu coordinates (%zu on maps with the orthogonality penalty), %zu outside 1e-4, worst relative error %.2e",
             checked, dso_coords, bad, worst));
}

std::vector<trees::Edge> pruefer_edges(const std::vector<int>& seq, int n) {
  std::vector<int> degree(n, 1);
  for (int x : seq) ++degree[x];
  std::vector<trees::Edge> edges;
  for (int x : seq)
    for (int leaf = 0; leaf < n; ++leaf)
      if (degree[leaf] == 1) {
        edges.emplace_back(std::min(leaf, x), std::max(leaf, x));
        --degree[leaf];
        --degree[x];
        break;
      }
  int u = -1;
  for (int k = 0; k < n; ++k)
    if (degree[k] == 1) {
      if (u < 0) {
        u = k;
      } else {
        edges.emplace_back(u, k);
      }
    }
  std::sort(edges.begin(), edges.end());
  return edges;
}

void mst_oracle() {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> size(2, 6);
  std::uniform_int_distribution<int> whole(1, 9);
  std::uniform_real_distribution<double> real(0.0, 10.0);
  int matches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    const bool integer = trial % 2 == 0;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = integer ? whole(rng) : real(rng);
    auto weight = [&](const std::vector<trees::Edge>& e) {
      double w = 0;
      for (auto [i, j] : e) w += d(i, j);
      return w;
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<trees::Edge> best_edges;
    if (n == 2) {
      best = d(0, 1);
      best_edges = {{0, 1}};
    } else {
      std::vector<int> seq(n - 2, 0);
      while (true) {
        const auto e = pruefer_edges(seq, n);
        const double w = weight(e);
        if (w < best) {
          best = w;
          best_edges = e;
        }
        int k = 0;
        while (k < n - 2 && ++seq[k] == n) seq[k++] = 0;
        if (k == n - 2) break;
      }
    }
    const auto got = trees::mst_undirected(d);
    // Integer weights: sums are exact. Real weights: the minimum tree is
    // unique almost surely, so the edge sets must coincide.
    if (integer ? weight(got) == best : got == best_edges) ++matches;
  }
  report(matches == 200, "MST oracle equivalence", fmt("%d/200 random instances match exhaustive enumeration", matches));
}

void orthogonality(const std::string& fixture_config) {
  auto cfg = app::RunConfig::load(fixture_config);
  const auto out = fs::temp_directory_path() / "orthoprobe_acceptance_fixture";
  fs::remove_all(out);
  cfg.out_dir = out.string();
  const auto summary = app::run_train(cfg).summary;
  double worst = 0.0;
  for (const auto& [lang, residual] : summary.at("orthogonality_before_projection").items())
    worst = std::max(worst, residual.get<double>());
  const double effect = summary.at("projection_effect").get<double>();

  auto light = cfg;
  light.training.dso_weight = 0.05;
  const auto info = app::run_train(light).summary;
  double light_worst = 0.0;
  for (const auto& [lang, residual] : info.at("orthogonality_before_projection").items())
    light_worst = std::max(light_worst, residual.get<double>());

  report(worst <= 0.1 && effect < 0.01, "orthogonality",
         fmt("fixture run (penalty weight %.2f): max residual %.4f, projection changes dev distances by %.3f%% "
             "(with the 0.05 default weight: residual %.4f, change %.3f%%)",
             cfg.training.dso_weight, worst, 100 * effect, light_worst,
             100 * info.at("projection_effect").get<double>()));
}

void parameter_count() {
  probe::ProbeModel::Options o;
  o.regime = Regime::MappedLangs;
  o.languages = {"en", "es", "sl", "id", "zh", "fi", "ar", "fr", "eu"};
  o.dim = 768;
  const auto n = probe::ProbeModel::create(o).trainable_parameter_count();
  report(n == 4721664, "parameter count", fmt("MappedLangs, 9 languages, dim 768, 4 tasks: %llu", (unsigned long long)n));
}

void aggregation() {
  const std::vector<std::string> langs{"EN", "ES", "SL", "ID", "ZH", "FI", "AR", "FR", "EU"};
  const std::vector<double> vals{.812, .858, .857, .841, .830, .788, .838, .856, .769};
  eval::ScoreTable t;
  eval::FamilyMap fam;
  for (std::size_t i = 0; i < langs.size(); ++i) {
    t.add(Task::DepDistance, Regime::InLang, langs[i], vals[i]);
    fam[langs[i]] = (langs[i] == "EN" || langs[i] == "ES" || langs[i] == "SL" || langs[i] == "FR") ? "Indo-European"
                                                                                                : "Other";
  }
  const auto* row = eval::aggregate_report(t, fam).find(Task::DepDistance, Regime::InLang);
  const double ie = *row->indo_european.value, nie = *row->non_indo_european.value, all = *row->all.value;
  const bool pass = std::abs(ie - .846) <= 5e-4 && std::abs(nie - .813) <= 5e-4 && std::abs(all - .828) <= 5e-4;
  report(pass, "aggregation fidelity", fmt("IE %.4f, non-IE %.4f, all %.4f", ie, nie, all));
}

void gold_injection(const std::string& fixture_config) {
  auto cfg = app::RunConfig::load(fixture_config);
  const auto data = app::load_data(cfg, true, true);
  trees::AttachmentScore uas, uuas;
  std::size_t sentences = 0;
  for (const auto* split : {&data.train, &data.dev, &data.test})
    for (const auto& [lang, corpus] : *split) {
      const auto out = trees::parse_corpus(corpus, trees::gold_predictions());
      uas += out.uas;
      uuas += out.uuas;
      sentences += corpus.size();
    }
  report(uas.value() == 1.0 && uuas.value() == 1.0, "gold-injection parsing",
         fmt("%zu fixture sentences: UAS %.4f (%zu tokens), UUAS %.4f (%zu edges)", sentences, uas.value(), uas.total,
             uuas.value(), uuas.total));
}

void regime_collapse() {
  app::UniverseOptions uo;
  uo.dim = 16;
  uo.max_tokens = 10;
  uo.seed = 51;
  const auto u = app::make_universe(uo);
  std::mt19937_64 rng(52);
  const auto R = app::random_orthogonal(16, rng);
  probe::CorpusMap train, dev;
  train.emplace("xx", corpus_of(u, R, "xx", 60, 1, ingest::Split::Train));
  dev.emplace("xx", corpus_of(u, R, "xx", 20, 2, ingest::Split::Dev));
  probe::TrainingConfig cfg;
  cfg.max_epochs = 10;
  const auto a = probe::train(dep_model(Regime::InLang, {"xx"}, 16, 7), train, dev, cfg);
  const auto b = probe::train(dep_model(Regime::AllLangs, {"xx"}, 16, 7), train, dev, cfg);
  const bool equal = a.step_losses.size() == b.step_losses.size() &&
                     std::memcmp(a.step_losses.data(), b.step_losses.data(), a.step_losses.size() * sizeof(double)) == 0;
  report(equal, "regime collapse",
         fmt("%zu optimiser steps, per-step losses %s", a.step_losses.size(), equal ? "bitwise equal" : "differ"));
}

void zero_shot_ordering() {
  app::UniverseOptions uo;
  uo.dim = 32;
  uo.seed = 21;
  const auto u = app::make_universe(uo);
  std::mt19937_64 rng(22);
  // Source observed through a moderate rotation, target through a further
  // small planted rotation of the source.
  const auto S = app::small_rotation(32, 0.5, rng);
  const auto W = app::small_rotation(32, 0.3, rng);
  const Eigen::MatrixXd T = W * S;
  probe::CorpusMap train, dev;
  train.emplace("src", corpus_of(u, S, "src", 400, 1, ingest::Split::Train));
  dev.emplace("src", corpus_of(u, S, "src", 100, 2, ingest::Split::Dev));
  train.emplace("tgt", corpus_of(u, T, "tgt", 1000, 3, ingest::Split::Train));
  dev.emplace("tgt", corpus_of(u, T, "tgt", 100, 4, ingest::Split::Dev));
  const auto test = corpus_of(u, T, "tgt", 100, 5, ingest::Split::Test);

  auto run = [&](Regime regime, std::size_t n) {
    probe::TrainingConfig cfg;
    cfg.fewshot = probe::FewShot{"tgt", n};
    const auto r = probe::train(dep_model(regime, {"src", "tgt"}, 32), train, dev, cfg);
    return std::pair{eval::spearman_task(r.model, test, Task::DepDistance).spearman.value_or(-1),
                     eval::spearman_task(r.model, test, Task::DepDepth).spearman.value_or(-1)};
  };
  const auto all0 = run(Regime::AllLangs, 0);
  const auto mapped0 = run(Regime::MappedLangs, 0);
  const auto mapped1000 = run(Regime::MappedLangs, 1000);
  const bool pass = all0.first > mapped0.first && mapped1000.first >= 0.9;
  report(pass, "zero-shot ordering",
         fmt("target distance Spearman: AllLangs N=0 %.4f > MappedLangs N=0 %.4f; MappedLangs N=1000 %.4f "
             "(depth: %.4f / %.4f / %.4f)",
             all0.first, mapped0.first, mapped1000.first, all0.second, mapped0.second, mapped1000.second));
}

void real_data_capability() {
  // Nine stand-in languages flow through the same file interfaces a real
  // encoder dump would use; matching published values needs the encoder.
  app::FixtureOptions o;
  o.languages = {"en", "es", "sl", "id", "zh", "fi", "ar", "fr", "eu"};
  o.families = {"Indo-European", "Indo-European", "Indo-European", "Other", "Other",
                "Other",         "Other",         "Indo-European", "Other"};
  o.lexical = false;
  const auto dir = fs::temp_directory_path() / "orthoprobe_acceptance_nine";
  fs::remove_all(dir);
  auto cfg = app::RunConfig::load(app::write_fixture(dir.string(), o));
  cfg.tasks = {Task::DepDepth, Task::DepDistance};
  cfg.evaluation.seeds = {1};
  cfg.evaluation.regimes = {Regime::InLang, Regime::MappedLangs, Regime::AllLangs};
  cfg.training.max_epochs = 5;
  const auto report_json = app::run_evaluate(cfg).summary;
  const auto r = eval::report_from_json(report_json);
  const auto* row = r.find(Task::DepDistance, Regime::MappedLangs);
  const bool ran = row && row->all.value && row->languages.size() == 9;
  report(ran, "real-data pipeline",
         "not desk-reproducible: published values need the encoder and treebanks; checked only that a 9-language "
         "three-regime run completes through the embedding-file interface");
}

}  // namespace

int main() {
  const std::string fixture = ORTHOPROBE_FIXTURE_CONFIG;
  planted_recovery();
  gradient_correctness();
  mst_oracle();
  orthogonality(fixture);
  parameter_count();
  aggregation();
  gold_injection(fixture);
  regime_collapse();
  zero_shot_ordering();
  real_data_capability();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
