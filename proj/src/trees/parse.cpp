#include "trees/parse.hpp"

#include "error.hpp"
#include "probe/geometry.hpp"

namespace orthoprobe::trees {

PredictionSource probe_predictions(const probe::ProbeModel& model, const std::string& language) {
  using probe::Task;
  if (!model.has_task(Task::DepDistance) || !model.has_task(Task::DepDepth))
    throw ConfigError("parsing needs a probe trained for dep_distance and dep_depth");
  const std::size_t lang = model.language_index(language);
  return [&model, lang](const ingest::SentencePair& pair) {
    const int layer = model.layers().dependency;
    const Eigen::MatrixXd H = pair.layer(layer).cast<double>();
    const auto& V = model.map_for(lang).matrix;
    return PredictedStructure{
        probe::predict_distances(V, model.scaler_for(Task::DepDistance, lang).values, H),
        probe::predict_depths(V, model.scaler_for(Task::DepDepth, lang).values, H)};
  };
}

PredictionSource gold_predictions() {
  return [](const ingest::SentencePair& pair) {
    return PredictedStructure{pair.annotation.dep_dists.cast<double>(), pair.annotation.dep_depths.cast<double>()};
  };
}

ParseOutcome parse_corpus(const ingest::Corpus& corpus, const PredictionSource& predict) {
  ParseOutcome out;
  out.heads.reserve(corpus.size());
  for (const auto& pair : corpus.pairs) {
    const auto& sent = pair->annotation;
    const auto predicted = predict(*pair);
    auto tree = extract_tree(predicted.dists, predicted.depths);
    const auto gold = sent.heads();
    const auto upos = sent.upos();
    out.uas += uas(tree.heads, gold, upos);
    out.uuas += uuas(tree.undirected_edges, edges_from_heads(gold), upos);
    out.heads.push_back(std::move(tree.heads));
  }
  return out;
}

}  // namespace orthoprobe::trees
