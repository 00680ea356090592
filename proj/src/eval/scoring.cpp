#include "eval/scoring.hpp"

#include <vector>

#include "eval/stats.hpp"
#include "probe/geometry.hpp"

namespace orthoprobe::eval {

TaskScore spearman_task(const probe::ProbeModel& model, const ingest::Corpus& corpus, probe::Task task,
                        const LengthWindow& window) {
  const std::size_t lang = model.language_index(corpus.language);
  const auto& V = model.map_for(lang).matrix;
  const auto& d = model.scaler_for(task, lang).values;
  const int layer = model.layers().of(task);

  double total = 0.0;
  TaskScore score;
  std::vector<double> pred;
  std::vector<double> gold;
  for (const auto& pair : corpus.pairs) {
    const auto& sent = pair->annotation;
    if (!window.contains(sent.size())) continue;
    auto target = probe::target_for(sent, task);
    if (!target) continue;
    const Eigen::MatrixXd H = pair->layer(layer).cast<double>();
    pred.clear();
    gold.clear();
    if (probe::is_distance(task)) {
      const auto p = probe::predict_distances(V, d, H);
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < p.cols(); ++j) {
          if (!target->mask(i, j)) continue;
          pred.push_back(p(i, j));
          gold.push_back(target->gold(i, j));
        }
      }
    } else {
      const auto p = probe::predict_depths(V, d, H);
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!target->mask(i, 0)) continue;
        pred.push_back(p[i]);
        gold.push_back(target->gold(i, 0));
      }
    }
    if (auto rho = spearman(pred, gold, kPredictionTieTolerance)) {
      total += *rho;
      ++score.sentences;
    }
  }
  if (score.sentences > 0) score.spearman = total / static_cast<double>(score.sentences);
  return score;
}

}  // namespace orthoprobe::eval
