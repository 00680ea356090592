#include "probe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "error.hpp"
#include "probe/geometry.hpp"
#include "probe/gradients.hpp"

namespace orthoprobe::probe {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(dso_weight >= 0.0)) throw ConfigError("dso_weight must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) throw ConfigError("lr_decay_factor must be in (0, 1]");
  if (lr_patience < 1 || early_stop_patience < 1) throw ConfigError("patience values must be at least 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("Adam betas must be in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

nlohmann::json to_json(const TrainingConfig& c) {
  nlohmann::json j = {{"learning_rate", c.learning_rate},
                      {"beta1", c.adam.beta1},
                      {"beta2", c.adam.beta2},
                      {"epsilon", c.adam.epsilon},
                      {"lr_decay_factor", c.lr_decay_factor},
                      {"lr_patience", c.lr_patience},
                      {"early_stop_patience", c.early_stop_patience},
                      {"max_epochs", c.max_epochs},
                      {"dso_weight", c.dso_weight},
                      {"batch_size", c.batch_size},
                      {"seed", c.seed}};
  if (c.fewshot) j["fewshot"] = {{"target", c.fewshot->target}, {"samples", c.fewshot->samples}};
  return j;
}

TrainingConfig training_config_from_json(const nlohmann::json& j) {
  TrainingConfig c;
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.adam.beta1 = j.value("beta1", c.adam.beta1);
    c.adam.beta2 = j.value("beta2", c.adam.beta2);
    c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
    c.lr_decay_factor = j.value("lr_decay_factor", c.lr_decay_factor);
    c.lr_patience = j.value("lr_patience", c.lr_patience);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.dso_weight = j.value("dso_weight", c.dso_weight);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    if (j.contains("fewshot") && !j["fewshot"].is_null())
      c.fewshot = FewShot{j["fewshot"].at("target").get<std::string>(), j["fewshot"].at("samples").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid training section: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

struct Stream {
  std::size_t language;
  Task task;
  std::vector<const ingest::SentencePair*> sentences;
};

std::vector<const ingest::SentencePair*> usable(const ingest::Corpus& corpus, Task task) {
  std::vector<const ingest::SentencePair*> out;
  for (const auto& p : corpus.pairs) {
    auto t = target_for(p->annotation, task);
    if (t && t->any()) out.push_back(p.get());
  }
  return out;
}

std::vector<MapResidual> residuals(const ProbeModel& model) {
  std::vector<MapResidual> out;
  for (std::size_t i = 0; i < model.maps().size(); ++i) {
    const auto& m = model.maps()[i];
    out.push_back({model.regime() == Regime::AllLangs ? "*" : model.languages()[i], m.trainable,
                   orthogonality_residual(m.matrix)});
  }
  return out;
}

nlohmann::json residual_json(const std::vector<MapResidual>& rs) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& r : rs) j[r.language] = r.residual;
  return j;
}

/// Mean relative change of predicted distances between two models.
double projection_effect(const ProbeModel& before, const ProbeModel& after, const std::vector<Stream>& streams) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : streams) {
    if (!is_distance(s.task)) continue;
    const int layer = before.layers().of(s.task);
    const auto& v0 = before.map_for(s.language).matrix;
    const auto& v1 = after.map_for(s.language).matrix;
    const auto& d0 = before.scaler_for(s.task, s.language).values;
    const auto& d1 = after.scaler_for(s.task, s.language).values;
    for (const auto* p : s.sentences) {
      const Eigen::MatrixXd H = p->layer(layer).cast<double>();
      const auto a = predict_distances(v0, d0, H);
      const auto b = predict_distances(v1, d1, H);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
          if (std::abs(a(i, j)) < 1e-12) continue;
          total += std::abs(b(i, j) - a(i, j)) / std::abs(a(i, j));
          ++count;
        }
      }
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace

TrainingResult train(ProbeModel model, const CorpusMap& train_corpora, const CorpusMap& dev_corpora,
                     const TrainingConfig& config) {
  config.validate();
  const auto& langs = model.languages();

  std::optional<std::size_t> target;
  CorpusMap sampled;
  if (config.fewshot) {
    target = model.language_index(config.fewshot->target);
    if (config.fewshot->samples > 0) {
      auto it = train_corpora.find(config.fewshot->target);
      if (it == train_corpora.end() || it->second.empty())
        throw ConfigError("few-shot target '" + config.fewshot->target + "' has no training sentences");
      sampled.emplace(it->first, ingest::sample_training_sentences(it->second, config.fewshot->samples, config.seed));
    } else if (model.regime() == Regime::MappedLangs) {
      if (*target == 0) throw ConfigError("the MappedLangs anchor cannot be a zero-shot target");
      auto& map = model.maps()[model.map_index(*target)];
      map.matrix.setIdentity();
      map.trainable = false;
    }
  }
  auto train_corpus_for = [&](std::size_t lang) -> const ingest::Corpus* {
    if (target && *target == lang) {
      auto it = sampled.find(langs[lang]);
      return it == sampled.end() ? nullptr : &it->second;
    }
    auto it = train_corpora.find(langs[lang]);
    return it == train_corpora.end() ? nullptr : &it->second;
  };

  std::vector<Stream> streams;
  std::vector<Stream> dev_streams;
  for (std::size_t l = 0; l < langs.size(); ++l) {
    const bool zero_shot = target && *target == l && config.fewshot->samples == 0;
    if (zero_shot) continue;
    const auto* corpus = train_corpus_for(l);
    if (!corpus || corpus->empty()) throw ConfigError("language '" + langs[l] + "' has no training data");
    for (Task t : model.tasks()) {
      auto sentences = usable(*corpus, t);
      if (sentences.empty())
        throw ConfigError("language '" + langs[l] + "' has no training targets for task " + std::string(to_string(t)));
      streams.push_back({l, t, std::move(sentences)});
    }
    if (target && *target == l) continue;  // target dev data stays unseen
    auto dev = dev_corpora.find(langs[l]);
    if (dev == dev_corpora.end()) continue;
    for (Task t : model.tasks()) {
      auto sentences = usable(dev->second, t);
      if (!sentences.empty()) dev_streams.push_back({l, t, std::move(sentences)});
    }
  }
  if (streams.empty()) throw ConfigError("nothing to train: no (language, task) stream has data");

  std::vector<std::optional<AdamState<Eigen::MatrixXd>>> map_state(model.maps().size());
  std::vector<std::optional<AdamState<Eigen::VectorXd>>> scaler_state(model.scalers().size());

  auto dev_loss = [&]() -> std::optional<double> {
    const auto& eval = dev_streams.empty() ? streams : dev_streams;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& s : eval) {
      Batch b{s.language, s.task, s.sentences};
      if (auto l = batch_loss(model, b)) {
        total += *l;
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return total / static_cast<double>(count);
  };

  TrainingResult result{model, {}, {}, 0, false, {}, 0.0};
  std::mt19937_64 rng(config.seed ^ 0x5DEECE66DULL);
  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  ProbeModel best_model = model;
  int since_best = 0;
  int since_decay = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<std::vector<Batch>> plan(streams.size());
    std::size_t rounds = 0;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      auto order = streams[s].sentences;
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const auto stop = std::min(order.size(), start + config.batch_size);
        plan[s].push_back({streams[s].language, streams[s].task, {order.begin() + start, order.begin() + stop}});
      }
      rounds = std::max(rounds, plan[s].size());
    }

    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t r = 0; r < rounds; ++r) {
      for (std::size_t s = 0; s < streams.size(); ++s) {
        if (r >= plan[s].size()) continue;
        auto g = batch_gradient(model, plan[s][r], config.dso_weight);
        if (!std::isfinite(g.objective())) throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
        result.step_losses.push_back(g.objective());
        epoch_loss += g.loss;
        ++steps;
        if (g.map_grad) {
          auto& st = map_state[g.map];
          if (!st) st.emplace(model.maps()[g.map].matrix);
          st->step(model.maps()[g.map].matrix, *g.map_grad, lr, config.adam);
        }
        auto& st = scaler_state[g.scaler];
        if (!st) st.emplace(model.scalers()[g.scaler].values);
        st->step(model.scalers()[g.scaler].values, g.scaler_grad, lr, config.adam);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = steps;
    rec.train_loss = steps ? epoch_loss / static_cast<double>(steps) : 0.0;
    rec.dev_loss = dev_loss();
    rec.learning_rate = lr;
    rec.orthogonality = residuals(model);
    result.epochs.push_back(rec);

    const double monitored = rec.dev_loss.value_or(rec.train_loss);
    if (monitored < best) {
      best = monitored;
      best_model = model;
      result.best_epoch = epoch;
      since_best = 0;
      since_decay = 0;
    } else {
      ++since_best;
      if (++since_decay >= config.lr_patience) {
        lr *= config.lr_decay_factor;
        since_decay = 0;
      }
      if (since_best >= config.early_stop_patience) {
        result.early_stopped = true;
        break;
      }
    }
  }

  result.residual_before_projection = residuals(best_model);
  ProbeModel projected = best_model;
  for (auto& m : projected.maps())
    if (m.trainable) m.matrix = polar_project(m.matrix);
  result.projection_effect = projection_effect(best_model, projected, dev_streams.empty() ? streams : dev_streams);
  result.model = std::move(projected);
  return result;
}

std::string training_log_jsonl(const TrainingResult& result) {
  std::string out;
  for (const auto& e : result.epochs) {
    nlohmann::json j = {{"epoch", e.epoch},
                        {"steps", e.steps},
                        {"train_loss", e.train_loss},
                        {"dev_loss", e.dev_loss ? nlohmann::json(*e.dev_loss) : nlohmann::json(nullptr)},
                        {"learning_rate", e.learning_rate},
                        {"orthogonality", residual_json(e.orthogonality)}};
    out += j.dump();
    out.push_back('\n');
  }
  nlohmann::json summary = {{"summary", true},
                            {"best_epoch", result.best_epoch},
                            {"early_stopped", result.early_stopped},
                            {"total_steps", result.step_losses.size()},
                            {"orthogonality_before_projection", residual_json(result.residual_before_projection)},
                            {"orthogonality_after_projection", residual_json(residuals(result.model))},
                            {"projection_effect", result.projection_effect}};
  out += summary.dump();
  out.push_back('\n');
  return out;
}

}  // namespace orthoprobe::probe
