#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "probe/task.hpp"

namespace orthoprobe::probe {

struct OrthogonalMap {
  Eigen::MatrixXd matrix;
  bool trainable = true;
};

struct ScalingVector {
  Task task = Task::DepDistance;
  std::optional<std::string> language;  // set only under InLang
  Eigen::VectorXd values;
};

/// Encoder layer read by each task family.
struct LayerChoice {
  int dependency = 7;
  int lexical = 5;

  int of(Task t) const { return is_lexical(t) ? lexical : dependency; }
  bool operator==(const LayerChoice&) const = default;
};

/// Probe parameters for a set of languages under one sharing regime.
///
/// Maps start at the identity. Scaling vectors are drawn uniformly from
/// [-init_scale, init_scale] in index order, so two models built with the
/// same seed and the same scaler layout are bitwise identical.
class ProbeModel {
 public:
  struct Options {
    Regime regime = Regime::InLang;
    std::vector<std::string> languages;
    int dim = 0;
    std::vector<Task> tasks{kAllTasks.begin(), kAllTasks.end()};
    LayerChoice layers;
    std::uint64_t seed = 1;
    double init_scale = 0.1;
  };

  /// ConfigError for an empty language list, duplicate names, MappedLangs
  /// with a single language or a non-positive dimension.
  static ProbeModel create(const Options& options);

  /// Assembles a model from stored parameters (checkpoint loading).
  ProbeModel(Regime regime, std::vector<std::string> languages, int dim, std::vector<Task> tasks, LayerChoice layers,
             std::vector<OrthogonalMap> maps, std::vector<ScalingVector> scalers);

  Regime regime() const { return regime_; }
  const std::vector<std::string>& languages() const { return languages_; }
  int dim() const { return dim_; }
  const std::vector<Task>& tasks() const { return tasks_; }
  const LayerChoice& layers() const { return layers_; }
  bool has_task(Task t) const;

  /// First listed language; its map is the frozen identity under MappedLangs.
  const std::string& anchor() const { return languages_.front(); }

  std::size_t language_index(std::string_view language) const;  // ConfigError if absent
  bool has_language(std::string_view language) const;

  std::size_t map_index(std::size_t language) const;
  std::size_t scaler_index(Task task, std::size_t language) const;

  const OrthogonalMap& map_for(std::size_t language) const { return maps_[map_index(language)]; }
  const ScalingVector& scaler_for(Task task, std::size_t language) const {
    return scalers_[scaler_index(task, language)];
  }

  std::vector<OrthogonalMap>& maps() { return maps_; }
  const std::vector<OrthogonalMap>& maps() const { return maps_; }
  std::vector<ScalingVector>& scalers() { return scalers_; }
  const std::vector<ScalingVector>& scalers() const { return scalers_; }

  std::uint64_t trainable_parameter_count() const;

 private:
  Regime regime_;
  std::vector<std::string> languages_;
  int dim_;
  std::vector<Task> tasks_;
  LayerChoice layers_;
  std::vector<OrthogonalMap> maps_;
  std::vector<ScalingVector> scalers_;
};

}  // namespace orthoprobe::probe
