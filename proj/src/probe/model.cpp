#include "probe/model.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "error.hpp"

namespace orthoprobe::probe {

ProbeModel ProbeModel::create(const Options& o) {
  if (o.languages.empty()) throw ConfigError("a probe needs at least one language");
  if (std::set<std::string>(o.languages.begin(), o.languages.end()).size() != o.languages.size())
    throw ConfigError("duplicate language names");
  if (o.dim <= 0) throw ConfigError("embedding dimension must be positive");
  if (o.tasks.empty()) throw ConfigError("a probe needs at least one task");
  if (o.regime == Regime::MappedLangs && o.languages.size() < 2)
    throw ConfigError("MappedLangs needs at least two languages (nothing to map with one)");

  std::vector<OrthogonalMap> maps;
  const std::size_t map_count = o.regime == Regime::AllLangs ? 1 : o.languages.size();
  for (std::size_t m = 0; m < map_count; ++m) {
    const bool anchor = o.regime == Regime::MappedLangs && m == 0;
    maps.push_back({Eigen::MatrixXd::Identity(o.dim, o.dim), !anchor});
  }

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> init(-o.init_scale, o.init_scale);
  auto draw = [&] {
    Eigen::VectorXd v(o.dim);
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = init(rng);
    return v;
  };
  std::vector<ScalingVector> scalers;
  if (o.regime == Regime::InLang) {
    for (const auto& lang : o.languages)
      for (Task t : o.tasks) scalers.push_back({t, lang, draw()});
  } else {
    for (Task t : o.tasks) scalers.push_back({t, std::nullopt, draw()});
  }
  return ProbeModel(o.regime, o.languages, o.dim, o.tasks, o.layers, std::move(maps), std::move(scalers));
}

ProbeModel::ProbeModel(Regime regime, std::vector<std::string> languages, int dim, std::vector<Task> tasks,
                       LayerChoice layers, std::vector<OrthogonalMap> maps, std::vector<ScalingVector> scalers)
    : regime_(regime),
      languages_(std::move(languages)),
      dim_(dim),
      tasks_(std::move(tasks)),
      layers_(layers),
      maps_(std::move(maps)),
      scalers_(std::move(scalers)) {
  const std::size_t want_maps = regime_ == Regime::AllLangs ? 1 : languages_.size();
  const std::size_t want_scalers = tasks_.size() * (regime_ == Regime::InLang ? languages_.size() : 1);
  if (maps_.size() != want_maps || scalers_.size() != want_scalers)
    throw ContractError("parameter layout does not match regime " + std::string(to_string(regime_)));
  for (const auto& m : maps_)
    if (m.matrix.rows() != dim_ || m.matrix.cols() != dim_) throw ContractError("map has wrong shape");
  for (const auto& s : scalers_)
    if (s.values.size() != dim_) throw ContractError("scaling vector has wrong length");
}

bool ProbeModel::has_task(Task t) const { return std::find(tasks_.begin(), tasks_.end(), t) != tasks_.end(); }

bool ProbeModel::has_language(std::string_view language) const {
  return std::find(languages_.begin(), languages_.end(), language) != languages_.end();
}

std::size_t ProbeModel::language_index(std::string_view language) const {
  auto it = std::find(languages_.begin(), languages_.end(), language);
  if (it == languages_.end()) throw ConfigError("language '" + std::string(language) + "' is not part of the probe");
  return static_cast<std::size_t>(it - languages_.begin());
}

std::size_t ProbeModel::map_index(std::size_t language) const {
  return regime_ == Regime::AllLangs ? 0 : language;
}

std::size_t ProbeModel::scaler_index(Task task, std::size_t language) const {
  auto it = std::find(tasks_.begin(), tasks_.end(), task);
  if (it == tasks_.end()) throw ConfigError("task '" + std::string(to_string(task)) + "' is not part of the probe");
  const auto pos = static_cast<std::size_t>(it - tasks_.begin());
  return regime_ == Regime::InLang ? language * tasks_.size() + pos : pos;
}

std::uint64_t ProbeModel::trainable_parameter_count() const {
  std::uint64_t count = 0;
  for (const auto& m : maps_)
    if (m.trainable) count += static_cast<std::uint64_t>(m.matrix.size());
  for (const auto& s : scalers_) count += static_cast<std::uint64_t>(s.values.size());
  return count;
}

}  // namespace orthoprobe::probe
