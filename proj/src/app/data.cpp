#include "app/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

#include <fcntl.h>
#include <unistd.h>

#include "error.hpp"
#include "ingest/conllu.hpp"
#include "ingest/embeddings.hpp"
#include "ingest/hypernymy.hpp"

namespace orthoprobe::app {

std::set<int> required_layers(const std::vector<probe::Task>& tasks, const probe::LayerChoice& layers) {
  std::set<int> out;
  for (auto t : tasks) out.insert(layers.of(t));
  return out;
}

ingest::Corpus load_split(const RunConfig& config, const LanguageConfig& language, ingest::Split split) {
  auto it = language.splits.find(split);
  if (it == language.splits.end()) return ingest::Corpus{language.name, split, {}};
  const auto& paths = it->second;
  auto sentences = ingest::load_conllu(paths.treebank);
  const bool lexical = std::any_of(config.tasks.begin(), config.tasks.end(), probe::is_lexical);
  if (lexical && language.forest) {
    const auto forest = ingest::HypernymyForest::load(*language.forest);
    for (auto& s : sentences) ingest::annotate_lexical(s, forest);
  }
  std::vector<ingest::EmbeddingSet> sets;
  for (int layer : required_layers(config.tasks, config.layers)) {
    auto e = paths.embeddings.find(layer);
    if (e == paths.embeddings.end())
      throw ConfigError(language.name + " " + ingest::to_string(split) + ": no embeddings for layer " +
                        std::to_string(layer));
    auto set = ingest::read_embeddings(e->second);
    if (set.layer != layer)
      throw FormatError(e->second + ": file holds layer " + std::to_string(set.layer) + ", config lists it as layer " +
                        std::to_string(layer));
    sets.push_back(std::move(set));
  }
  return ingest::assemble_corpus(language.name, split, std::move(sentences), sets, config.max_sentence_tokens);
}

namespace {

int corpus_dim(const ingest::Corpus& c) {
  for (const auto& p : c.pairs)
    for (const auto& [layer, m] : p->layers) return static_cast<int>(m.cols());
  return 0;
}

}  // namespace

LoadedData load_data(const RunConfig& config, bool with_train, bool with_test) {
  LoadedData data;
  auto note_dim = [&](const ingest::Corpus& c) {
    const int d = corpus_dim(c);
    if (d == 0) return;
    if (data.dim != 0 && d != data.dim)
      throw FormatError(c.language + " " + ingest::to_string(c.split) + ": embedding dimension " + std::to_string(d) +
                        " differs from " + std::to_string(data.dim));
    data.dim = d;
  };
  for (const auto& l : config.languages) {
    if (with_train) {
      auto train = load_split(config, l, ingest::Split::Train);
      train = ingest::sample_training_sentences(train, config.train_cap, config.sample_seed);
      note_dim(train);
      data.train.emplace(l.name, std::move(train));
      auto dev = load_split(config, l, ingest::Split::Dev);
      note_dim(dev);
      data.dev.emplace(l.name, std::move(dev));
    }
    if (with_test) {
      auto test = load_split(config, l, ingest::Split::Test);
      note_dim(test);
      data.test.emplace(l.name, std::move(test));
    }
  }
  return data;
}

OutputLock::OutputLock(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  path_ = (std::filesystem::path(dir) / ".orthoprobe.lock").string();
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    const int err = errno;
    const std::string p = path_;
    path_.clear();
    if (err == EEXIST)
      throw IoError("output directory is in use by another run (lock file " + p + "; remove it if stale)");
    throw IoError("cannot create lock file " + p + ": " + std::strerror(err));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() {
  if (!path_.empty()) ::unlink(path_.c_str());
}

}  // namespace orthoprobe::app
