#include "orthoprobe/orthoprobe.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/synth.hpp"
#include "error.hpp"
#include "ingest/conllu.hpp"
#include "ingest/embeddings.hpp"
#include "probe/checkpoint.hpp"
#include "probe/geometry.hpp"
#include "probe/model.hpp"
#include "trees/extract.hpp"

struct op_config {
  orthoprobe::app::RunConfig config;
};
struct op_treebank {
  std::vector<orthoprobe::ingest::SentenceAnnotation> sentences;
};
struct op_embeddings {
  orthoprobe::ingest::EmbeddingSet set;
  std::vector<std::vector<float>> rows;  // row-major copies
};
struct op_model {
  orthoprobe::probe::ProbeModel model;
  std::string regime;
};

namespace {

using namespace orthoprobe;

thread_local std::string g_error;

op_status status_of(Error::Kind k) {
  switch (k) {
    case Error::Kind::Parse: return OP_ERR_PARSE;
    case Error::Kind::Structure: return OP_ERR_STRUCTURE;
    case Error::Kind::Format: return OP_ERR_FORMAT;
    case Error::Kind::Annotation: return OP_ERR_ANNOTATION;
    case Error::Kind::Contract: return OP_ERR_CONTRACT;
    case Error::Kind::Config: return OP_ERR_CONFIG;
    case Error::Kind::Training: return OP_ERR_TRAINING;
    case Error::Kind::Io: return OP_ERR_IO;
  }
  return OP_ERR_INTERNAL;
}

template <class F>
op_status guard(F&& f) {
  try {
    g_error.clear();
    f();
    return OP_OK;
  } catch (const Error& e) {
    g_error = e.what();
    return status_of(e.kind());
  } catch (const std::invalid_argument& e) {
    g_error = e.what();
    return OP_ERR_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return OP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return OP_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return OP_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_summary(char** out, const nlohmann::json& j) {
  if (out) *out = dup(j.dump(2));
}

std::vector<std::string> strings(const char* const* items, std::size_t n) {
  std::vector<std::string> out;
  require(n == 0 || items, "null string array");
  for (std::size_t i = 0; i < n; ++i) {
    require(items[i], "null string in array");
    out.emplace_back(items[i]);
  }
  return out;
}

}  // namespace

extern "C" {

const char* op_last_error(void) { return g_error.c_str(); }

const char* op_status_name(op_status s) {
  switch (s) {
    case OP_OK: return "ok";
    case OP_ERR_PARSE: return "parse error";
    case OP_ERR_STRUCTURE: return "structural error";
    case OP_ERR_FORMAT: return "format error";
    case OP_ERR_ANNOTATION: return "annotation error";
    case OP_ERR_CONTRACT: return "contract error";
    case OP_ERR_CONFIG: return "configuration error";
    case OP_ERR_IO: return "i/o error";
    case OP_ERR_TRAINING: return "training error";
    case OP_ERR_ARGUMENT: return "invalid argument";
    case OP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int op_status_exit_code(op_status s) {
  switch (s) {
    case OP_OK: return 0;
    case OP_ERR_TRAINING:
    case OP_ERR_INTERNAL: return 2;
    default: return 1;
  }
}

const char* op_version(void) { return "1.0.0"; }

void op_string_free(char* s) { std::free(s); }

op_status op_config_load(const char* path, op_config** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new op_config{app::RunConfig::load(path)};
  });
}

op_status op_config_set_seed(op_config* c, uint64_t seed) {
  return guard([&] {
    require(c, "null config");
    c->config.training.seed = seed;
    c->config.evaluation.seeds = {seed};
  });
}

op_status op_config_set_regime(op_config* c, const char* regime) {
  return guard([&] {
    require(c && regime, "null argument");
    c->config.regime = probe::parse_regime(regime);
    c->config.evaluation.regimes = {c->config.regime};
  });
}

op_status op_config_set_fewshot(op_config* c, size_t samples) {
  return guard([&] {
    require(c, "null config");
    auto& cfg = c->config;
    cfg.transfer.grid = {samples};
    if (cfg.training.fewshot) {
      cfg.training.fewshot->samples = samples;
    } else if (!cfg.transfer.targets.empty()) {
      cfg.training.fewshot = probe::FewShot{cfg.transfer.targets.front(), samples};
    } else {
      throw ConfigError("--fewshot needs a target language: set training.fewshot.target or transfer.targets");
    }
  });
}

op_status op_config_set_out(op_config* c, const char* dir) {
  return guard([&] {
    require(c && dir, "null argument");
    c->config.out_dir = dir;
  });
}

op_status op_config_validate(const op_config* c) {
  return guard([&] {
    require(c, "null config");
    c->config.validate();
  });
}

op_status op_config_to_json(const op_config* c, char** json) {
  return guard([&] {
    require(c && json, "null argument");
    *json = dup(c->config.to_json().dump(2));
  });
}

void op_config_free(op_config* c) { delete c; }

op_status op_train(const op_config* c, char** summary) {
  return guard([&] {
    require(c, "null config");
    put_summary(summary, app::run_train(c->config).summary);
  });
}

op_status op_evaluate(const op_config* c, const char* const* checkpoints, size_t n, char** summary) {
  return guard([&] {
    require(c, "null config");
    put_summary(summary, app::run_evaluate(c->config, strings(checkpoints, n)).summary);
  });
}

op_status op_parse(const op_config* c, const op_parse_options* o, char** summary) {
  return guard([&] {
    require(c, "null config");
    app::ParseRequest r;
    if (o) {
      if (o->checkpoint) r.checkpoint = o->checkpoint;
      if (o->treebank) r.treebank = o->treebank;
      if (o->language) r.language = o->language;
      r.embeddings = strings(o->embeddings, o->embedding_count);
      r.gold = o->gold != 0;
    }
    put_summary(summary, app::run_parse(c->config, r).summary);
  });
}

op_status op_analyze(const op_config* c, const char* const* reports, size_t n, const char* checkpoint, char** summary) {
  return guard([&] {
    require(c, "null config");
    app::AnalyzeRequest r;
    r.reports = strings(reports, n);
    if (checkpoint) r.checkpoint = checkpoint;
    put_summary(summary, app::run_analyze(c->config, r).summary);
  });
}

void op_synth_defaults(op_synth_options* o) {
  if (!o) return;
  const app::FixtureOptions d;
  *o = op_synth_options{nullptr,          0,           d.dim,       d.train_sentences, d.dev_sentences,
                        d.test_sentences, d.min_tokens, d.max_tokens, d.lexical ? 1 : 0, d.seed};
}

op_status op_synth(const char* dir, const op_synth_options* o, char** config_path) {
  return guard([&] {
    require(dir, "null directory");
    app::FixtureOptions f;
    if (o) {
      if (o->language_count > 0) {
        f.languages = strings(o->languages, o->language_count);
        f.families.clear();
        for (std::size_t i = 0; i < f.languages.size(); ++i) f.families.push_back(i % 2 == 0 ? "Indo-European" : "Other");
      }
      f.dim = o->dim;
      f.train_sentences = o->train_sentences;
      f.dev_sentences = o->dev_sentences;
      f.test_sentences = o->test_sentences;
      f.min_tokens = o->min_tokens;
      f.max_tokens = o->max_tokens;
      f.lexical = o->lexical != 0;
      f.seed = o->seed;
    }
    const auto path = app::write_fixture(dir, f);
    if (config_path) *config_path = dup(path);
  });
}

op_status op_treebank_load(const char* path, op_treebank** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new op_treebank{ingest::load_conllu(path)};
  });
}

op_status op_treebank_parse(const char* text, op_treebank** out) {
  return guard([&] {
    require(text && out, "null argument");
    *out = new op_treebank{ingest::parse_conllu(text)};
  });
}

size_t op_treebank_size(const op_treebank* tb) { return tb ? tb->sentences.size() : 0; }

size_t op_treebank_sentence_length(const op_treebank* tb, size_t i) {
  return tb && i < tb->sentences.size() ? tb->sentences[i].size() : 0;
}

op_status op_treebank_heads(const op_treebank* tb, size_t i, int* heads) {
  return guard([&] {
    require(tb && heads, "null argument");
    if (i >= tb->sentences.size()) throw ContractError("sentence index out of range");
    const auto h = tb->sentences[i].heads();
    std::copy(h.begin(), h.end(), heads);
  });
}

op_status op_treebank_distances(const op_treebank* tb, size_t i, int* dists) {
  return guard([&] {
    require(tb && dists, "null argument");
    if (i >= tb->sentences.size()) throw ContractError("sentence index out of range");
    const auto& d = tb->sentences[i].dep_dists;
    for (Eigen::Index r = 0; r < d.rows(); ++r)
      for (Eigen::Index c = 0; c < d.cols(); ++c) dists[r * d.cols() + c] = d(r, c);
  });
}

void op_treebank_free(op_treebank* tb) { delete tb; }

op_status op_embeddings_read(const char* path, op_embeddings** out) {
  return guard([&] {
    require(path && out, "null argument");
    auto e = new op_embeddings{ingest::read_embeddings(path), {}};
    for (const auto& m : e->set.sentences) {
      std::vector<float> rows(static_cast<std::size_t>(m.size()));
      Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(rows.data(), m.rows(), m.cols()) = m;
      e->rows.push_back(std::move(rows));
    }
    *out = e;
  });
}

op_status op_embeddings_info(const op_embeddings* e, int* dim, int* layer, size_t* count) {
  return guard([&] {
    require(e, "null handle");
    if (dim) *dim = e->set.dim;
    if (layer) *layer = e->set.layer;
    if (count) *count = e->set.sentences.size();
  });
}

const char* op_embeddings_language(const op_embeddings* e) { return e ? e->set.language.c_str() : ""; }

op_status op_embeddings_sentence(const op_embeddings* e, size_t i, const float** data, size_t* words) {
  return guard([&] {
    require(e && data && words, "null argument");
    if (i >= e->rows.size()) throw ContractError("sentence index out of range");
    *data = e->rows[i].data();
    *words = static_cast<size_t>(e->set.sentences[i].rows());
  });
}

op_status op_embeddings_write(const char* path, const char* language, int layer, int dim, size_t count,
                              const uint32_t* words, const float* data) {
  return guard([&] {
    require(path && language && (count == 0 || (words && data)), "null argument");
    require(dim > 0, "dimension must be positive");
    ingest::EmbeddingSet set{language, layer, dim, {}};
    std::size_t offset = 0;
    for (std::size_t s = 0; s < count; ++s) {
      set.sentences.push_back(Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          data + offset, words[s], dim));
      offset += static_cast<std::size_t>(words[s]) * static_cast<std::size_t>(dim);
    }
    ingest::write_embeddings(set, path);
  });
}

void op_embeddings_free(op_embeddings* e) { delete e; }

op_status op_model_create(const char* regime, const char* const* languages, size_t n, int dim, uint64_t seed,
                          op_model** out) {
  return guard([&] {
    require(regime && out, "null argument");
    probe::ProbeModel::Options o;
    o.regime = probe::parse_regime(regime);
    o.languages = strings(languages, n);
    o.dim = dim;
    o.seed = seed;
    auto m = probe::ProbeModel::create(o);
    *out = new op_model{m, std::string(probe::to_string(m.regime()))};
  });
}

op_status op_model_load(const char* path, op_model** out) {
  return guard([&] {
    require(path && out, "null argument");
    auto loaded = probe::load_checkpoint(path);
    *out = new op_model{loaded.model, std::string(probe::to_string(loaded.model.regime()))};
  });
}

op_status op_model_save(const op_model* m, const char* path) {
  return guard([&] {
    require(m && path, "null argument");
    probe::save_checkpoint(m->model, path);
  });
}

uint64_t op_model_trainable_parameters(const op_model* m) { return m ? m->model.trainable_parameter_count() : 0; }

int op_model_dim(const op_model* m) { return m ? m->model.dim() : 0; }

const char* op_model_regime(const op_model* m) { return m ? m->regime.c_str() : ""; }

op_status op_model_predict(const op_model* m, const char* language, const char* task, const float* vectors,
                           size_t words, double* out) {
  return guard([&] {
    require(m && language && task && vectors && out, "null argument");
    const auto& model = m->model;
    const auto t = probe::parse_task(task);
    const auto lang = model.language_index(language);
    const Eigen::MatrixXd H =
        Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(vectors, words, model.dim())
            .cast<double>();
    const auto& V = model.map_for(lang).matrix;
    const auto& d = model.scaler_for(t, lang).values;
    if (probe::is_distance(t)) {
      const auto D = probe::predict_distances(V, d, H);
      for (Eigen::Index r = 0; r < D.rows(); ++r)
        for (Eigen::Index c = 0; c < D.cols(); ++c) out[r * D.cols() + c] = D(r, c);
    } else {
      const auto z = probe::predict_depths(V, d, H);
      for (Eigen::Index r = 0; r < z.size(); ++r) out[r] = z[r];
    }
  });
}

void op_model_free(op_model* m) { delete m; }

op_status op_extract_tree(const double* dists, const double* depths, size_t n, int* heads) {
  return guard([&] {
    require(dists && depths && heads, "null argument");
    const auto D = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(dists, n, n);
    const auto z = Eigen::Map<const Eigen::VectorXd>(depths, static_cast<Eigen::Index>(n));
    const auto tree = trees::extract_tree(D, z);
    std::copy(tree.heads.begin(), tree.heads.end(), heads);
  });
}

op_status op_score_heads(const int* predicted, const int* gold, const char* const* upos, size_t n, size_t* uas_correct,
                         size_t* uas_total, size_t* uuas_correct, size_t* uuas_total) {
  return guard([&] {
    require(predicted && gold, "null argument");
    std::vector<int> p(predicted, predicted + n), g(gold, gold + n);
    std::vector<std::string> tags(n, "_");
    if (upos)
      for (std::size_t i = 0; i < n; ++i) tags[i] = upos[i] ? upos[i] : "_";
    const auto a = trees::uas(p, g, tags);
    const auto pe = trees::edges_from_heads(p);
    const auto ge = trees::edges_from_heads(g);
    const auto b = trees::uuas(pe, ge, tags);
    if (uas_correct) *uas_correct = a.correct;
    if (uas_total) *uas_total = a.total;
    if (uuas_correct) *uuas_correct = b.correct;
    if (uuas_total) *uuas_total = b.total;
  });
}

}  // extern "C"
