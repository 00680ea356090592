#ifndef ORTHOPROBE_ORTHOPROBE_H
#define ORTHOPROBE_ORTHOPROBE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OP_API __declspec(dllexport)
#else
#define OP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum op_status {
  OP_OK = 0,
  OP_ERR_PARSE = 1,
  OP_ERR_STRUCTURE = 2,
  OP_ERR_FORMAT = 3,
  OP_ERR_ANNOTATION = 4,
  OP_ERR_CONTRACT = 5,
  OP_ERR_CONFIG = 6,
  OP_ERR_IO = 7,
  OP_ERR_TRAINING = 8,
  OP_ERR_ARGUMENT = 9,
  OP_ERR_INTERNAL = 10
} op_status;

/* Message of the last failed call on this thread ("" if none). */
OP_API const char* op_last_error(void);
OP_API const char* op_status_name(op_status status);
/* 0 success, 1 input error, 2 runtime error. */
OP_API int op_status_exit_code(op_status status);
OP_API const char* op_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
OP_API void op_string_free(char* s);

/* ---- run configuration ---- */

typedef struct op_config op_config;

OP_API op_status op_config_load(const char* path, op_config** out);
OP_API op_status op_config_set_seed(op_config* config, uint64_t seed);
OP_API op_status op_config_set_regime(op_config* config, const char* regime);
/* Few-shot size for training (target from training.fewshot or the first
 * transfer target) and the single grid point for transfer parsing. */
OP_API op_status op_config_set_fewshot(op_config* config, size_t samples);
OP_API op_status op_config_set_out(op_config* config, const char* dir);
OP_API op_status op_config_validate(const op_config* config);
OP_API op_status op_config_to_json(const op_config* config, char** json);
OP_API void op_config_free(op_config* config);

/* ---- commands; `summary` (optional) receives a JSON document ---- */

OP_API op_status op_train(const op_config* config, char** summary);
OP_API op_status op_evaluate(const op_config* config, const char* const* checkpoints, size_t checkpoint_count,
                             char** summary);

typedef struct op_parse_options {
  const char* checkpoint;        /* NULL: transfer grid (unless gold) */
  const char* treebank;          /* NULL: configured test splits */
  const char* const* embeddings; /* OPEMB1 files for `treebank` */
  size_t embedding_count;
  const char* language;
  int gold;
} op_parse_options;

OP_API op_status op_parse(const op_config* config, const op_parse_options* options, char** summary);
OP_API op_status op_analyze(const op_config* config, const char* const* reports, size_t report_count,
                            const char* checkpoint, char** summary);

typedef struct op_synth_options {
  const char* const* languages;
  size_t language_count;
  int dim;
  size_t train_sentences;
  size_t dev_sentences;
  size_t test_sentences;
  size_t min_tokens;
  size_t max_tokens;
  int lexical;
  uint64_t seed;
} op_synth_options;

OP_API void op_synth_defaults(op_synth_options* options);
/* Writes a planted synthetic project; `config_path` receives its config. */
OP_API op_status op_synth(const char* dir, const op_synth_options* options, char** config_path);

/* ---- treebanks ---- */

typedef struct op_treebank op_treebank;

OP_API op_status op_treebank_load(const char* path, op_treebank** out);
OP_API op_status op_treebank_parse(const char* text, op_treebank** out);
OP_API size_t op_treebank_size(const op_treebank* tb);
OP_API size_t op_treebank_sentence_length(const op_treebank* tb, size_t sentence);
/* Writes sentence_length 1-based heads (0 = root). */
OP_API op_status op_treebank_heads(const op_treebank* tb, size_t sentence, int* heads);
/* Writes the n*n gold tree distance matrix, row-major. */
OP_API op_status op_treebank_distances(const op_treebank* tb, size_t sentence, int* dists);
OP_API void op_treebank_free(op_treebank* tb);

/* ---- embeddings (OPEMB1) ---- */

typedef struct op_embeddings op_embeddings;

OP_API op_status op_embeddings_read(const char* path, op_embeddings** out);
OP_API op_status op_embeddings_info(const op_embeddings* e, int* dim, int* layer, size_t* count);
OP_API const char* op_embeddings_language(const op_embeddings* e);
/* Row-major words x dim view, valid until the handle is freed. */
OP_API op_status op_embeddings_sentence(const op_embeddings* e, size_t sentence, const float** data, size_t* words);
OP_API op_status op_embeddings_write(const char* path, const char* language, int layer, int dim, size_t count,
                                     const uint32_t* words, const float* data);
OP_API void op_embeddings_free(op_embeddings* e);

/* ---- probes ---- */

typedef struct op_model op_model;

OP_API op_status op_model_create(const char* regime, const char* const* languages, size_t language_count, int dim,
                                 uint64_t seed, op_model** out);
OP_API op_status op_model_load(const char* path, op_model** out);
OP_API op_status op_model_save(const op_model* model, const char* path);
OP_API uint64_t op_model_trainable_parameters(const op_model* model);
OP_API int op_model_dim(const op_model* model);
OP_API const char* op_model_regime(const op_model* model);
/* Distance tasks fill words*words (row-major), depth tasks fill words. */
OP_API op_status op_model_predict(const op_model* model, const char* language, const char* task, const float* vectors,
                                  size_t words, double* out);
OP_API void op_model_free(op_model* model);

/* ---- trees ---- */

/* Minimum spanning tree of the n*n distance matrix oriented away from the
 * shallowest token; writes n 1-based heads. */
OP_API op_status op_extract_tree(const double* dists, const double* depths, size_t n, int* heads);
/* Attachment counts; tokens tagged PUNCT (upos may be NULL) are excluded. */
OP_API op_status op_score_heads(const int* predicted, const int* gold, const char* const* upos, size_t n,
                                size_t* uas_correct, size_t* uas_total, size_t* uuas_correct, size_t* uuas_total);

#ifdef __cplusplus
}
#endif

#endif
