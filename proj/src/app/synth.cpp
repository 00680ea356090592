#include "app/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include "error.hpp"
#include "fsutil.hpp"
#include "ingest/conllu.hpp"
#include "ingest/tree.hpp"
#include "json.hpp"
#include "probe/checkpoint.hpp"
#include "probe/model.hpp"

namespace orthoprobe::app {

Eigen::MatrixXd random_orthogonal(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k)
    if (r(k, k) < 0) q.col(k) = -q.col(k);
  return q;
}

Eigen::MatrixXd small_rotation(int dim, double angle, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  Eigen::MatrixXd k = a - a.transpose();
  // Spectral radius of a real skew-symmetric matrix = largest singular value.
  const double radius = Eigen::JacobiSVD<Eigen::MatrixXd>(k).singularValues()(0);
  if (radius > 0) k *= angle / radius;
  return k.exp();
}

PlantedUniverse make_universe(const UniverseOptions& o) {
  if (o.min_tokens < 1 || o.max_tokens < o.min_tokens) throw ContractError("invalid sentence length range");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  PlantedUniverse u;
  u.dim = o.dim;
  u.min_tokens = o.min_tokens;
  u.max_tokens = o.max_tokens;
  u.noise = o.noise;
  u.dep_offset = 0;
  u.dep_dims = static_cast<int>(o.max_tokens) - 1;
  u.lex_offset = u.dep_dims;
  u.lex_dims = o.lexical ? static_cast<int>(o.lex_nodes - std::min(o.lex_nodes, o.lex_trees)) : 0;
  if (u.dep_dims + u.lex_dims > o.dim)
    throw ContractError("planted structure needs " + std::to_string(u.dep_dims + u.lex_dims) +
                        " coordinates, dimension is " + std::to_string(o.dim));
  u.dep_scale = Eigen::VectorXd::Zero(o.dim);
  u.lex_scale = Eigen::VectorXd::Zero(o.dim);
  for (int k = 0; k < u.dep_dims; ++k) u.dep_scale[u.dep_offset + k] = scale(rng);
  for (int k = 0; k < u.lex_dims; ++k) u.lex_scale[u.lex_offset + k] = scale(rng);

  if (o.lexical) {
    // Nodes 0..trees-1 are roots; every later node hangs below a random
    // earlier node of a random tree and owns one lexical coordinate.
    const std::size_t trees = std::min(o.lex_nodes, o.lex_trees);
    std::vector<std::ptrdiff_t> parent(o.lex_nodes, -1);
    std::ostringstream forest;
    int next_coord = 0;
    for (std::size_t i = 0; i < o.lex_nodes; ++i) {
      u.lex_nodes.push_back("n" + std::to_string(i));
      Eigen::VectorXd pos = Eigen::VectorXd::Zero(o.dim);
      if (i >= trees) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        parent[i] = static_cast<std::ptrdiff_t>(pick(rng));
        pos = u.lex_positions[static_cast<std::size_t>(parent[i])];
        pos[u.lex_offset + next_coord++] += 1.0;
      }
      u.lex_positions.push_back(pos);
      forest << u.lex_nodes[i] << '\t' << (parent[i] < 0 ? "-" : u.lex_nodes[static_cast<std::size_t>(parent[i])])
             << '\n';
    }
    u.forest_text = forest.str();
  }
  return u;
}

namespace {

const char* const kTags[] = {"NOUN", "VERB", "ADJ", "ADP", "DET", "PUNCT"};

// Uniform random labelled tree (Pruefer decoding) rooted at a uniform token.
std::vector<int> random_heads(std::size_t n, std::mt19937_64& rng) {
  std::vector<int> heads(n, 0);
  if (n == 1) return heads;
  std::vector<std::vector<std::size_t>> adj(n);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  if (n == 2) {
    adj[0].push_back(1);
    adj[1].push_back(0);
  } else {
    std::vector<std::size_t> code(n - 2);
    for (auto& c : code) c = any(rng);
    std::vector<std::size_t> degree(n, 1);
    for (auto c : code) ++degree[c];
    for (auto c : code) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      adj[leaf].push_back(c);
      adj[c].push_back(leaf);
      --degree[leaf];
      --degree[c];
    }
    std::size_t u = n, v = n;
    for (std::size_t i = 0; i < n; ++i)
      if (degree[i] == 1) (u == n ? u : v) = i;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  const std::size_t root = any(rng);
  std::vector<std::size_t> queue{root};
  std::vector<bool> seen(n, false);
  seen[root] = true;
  for (std::size_t q = 0; q < queue.size(); ++q)
    for (auto w : adj[queue[q]])
      if (!seen[w]) {
        seen[w] = true;
        heads[w] = static_cast<int>(queue[q]) + 1;
        queue.push_back(w);
      }
  return heads;
}

}  // namespace

SyntheticSplit generate_split(const PlantedUniverse& u, const Eigen::MatrixXd& rotation, const std::string& language,
                              std::size_t count, std::uint64_t seed, int dep_layer, int lex_layer) {
  if (rotation.rows() != u.dim || rotation.cols() != u.dim) throw ContractError("rotation has the wrong shape");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(u.min_tokens, u.max_tokens);
  std::uniform_int_distribution<std::size_t> tag(0, std::size(kTags) - 1);
  std::normal_distribution<double> noise(0.0, u.noise);
  std::bernoulli_distribution has_lex(u.lexnode_rate);
  const bool lexical = u.lex_dims > 0;
  std::uniform_int_distribution<std::size_t> node(0, lexical ? u.lex_nodes.size() - 1 : 0);
  const auto forest = lexical ? ingest::HypernymyForest::parse(u.forest_text) : ingest::HypernymyForest{};

  SyntheticSplit split;
  ingest::EmbeddingSet dep{language, dep_layer, u.dim, {}};
  ingest::EmbeddingSet lex{language, lex_layer, u.dim, {}};

  auto observe = [&](Eigen::VectorXd z, const Eigen::VectorXd& scale, int offset, int dims) {
    for (int k = 0; k < u.dim; ++k) {
      if (k >= offset && k < offset + dims) {
        z[k] /= scale[k];
      } else {
        z[k] = noise(rng);
      }
    }
    return Eigen::VectorXd(rotation * z);
  };

  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t n = length(rng);
    ingest::SentenceAnnotation sent;
    sent.id = language + "-" + std::to_string(s + 1);
    const auto heads = random_heads(n, rng);
    for (std::size_t i = 0; i < n; ++i) {
      ingest::Token t;
      t.form = "w" + std::to_string(i + 1);
      t.lemma = t.form;
      t.upos = kTags[tag(rng)];
      t.head = heads[i];
      t.deprel = heads[i] == 0 ? "root" : "dep";
      if (lexical && has_lex(rng)) {
        t.lexnode = u.lex_nodes[node(rng)];
        t.misc = "LexNode=" + *t.lexnode;
      }
      sent.tokens.push_back(std::move(t));
    }
    sent.dep_depths = ingest::compute_tree_depths(heads);
    sent.dep_dists = ingest::compute_tree_distances(heads);

    // Dependency coordinates: edge of the k-th non-root token gets axis k.
    std::vector<int> axis(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (heads[i] != 0) axis[i] = next++;
    std::vector<Eigen::VectorXd> pos(n);
    std::vector<std::size_t> by_depth(n);
    std::iota(by_depth.begin(), by_depth.end(), std::size_t{0});
    std::stable_sort(by_depth.begin(), by_depth.end(),
                     [&](std::size_t a, std::size_t b) { return sent.dep_depths[a] < sent.dep_depths[b]; });
    for (std::size_t i : by_depth) {
      pos[i] = heads[i] == 0 ? Eigen::VectorXd::Zero(u.dim) : pos[static_cast<std::size_t>(heads[i] - 1)];
      if (heads[i] != 0) pos[i][u.dep_offset + axis[i]] += 1.0;
    }

    Eigen::MatrixXf dep_m(n, u.dim);
    Eigen::MatrixXf lex_m(n, u.dim);
    for (std::size_t i = 0; i < n; ++i) {
      dep_m.row(i) = observe(pos[i], u.dep_scale, u.dep_offset, u.dep_dims).cast<float>().transpose();
      if (lexical) {
        Eigen::VectorXd lp = Eigen::VectorXd::Zero(u.dim);
        if (sent.tokens[i].lexnode) {
          const auto it = std::find(u.lex_nodes.begin(), u.lex_nodes.end(), *sent.tokens[i].lexnode);
          lp = u.lex_positions[static_cast<std::size_t>(it - u.lex_nodes.begin())];
          lex_m.row(i) = observe(lp, u.lex_scale, u.lex_offset, u.lex_dims).cast<float>().transpose();
        } else {
          lex_m.row(i) = observe(lp, u.lex_scale, u.lex_offset, 0).cast<float>().transpose();
        }
      }
    }
    dep.sentences.push_back(std::move(dep_m));
    if (lexical) {
      lex.sentences.push_back(std::move(lex_m));
      ingest::annotate_lexical(sent, forest);
    }
    split.sentences.push_back(std::move(sent));
  }
  split.layers.push_back(std::move(dep));
  if (lexical) split.layers.push_back(std::move(lex));
  return split;
}

ingest::Corpus to_corpus(SyntheticSplit split, const std::string& language, ingest::Split which) {
  return ingest::assemble_corpus(language, which, std::move(split.sentences), split.layers);
}

std::string write_fixture(const std::string& dir, const FixtureOptions& o) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  if (o.languages.empty()) throw ContractError("fixture needs at least one language");
  fs::create_directories(dir);
  UniverseOptions uo;
  uo.dim = o.dim;
  uo.min_tokens = o.min_tokens;
  uo.max_tokens = o.max_tokens;
  uo.lexical = o.lexical;
  uo.seed = o.seed;
  const auto universe = make_universe(uo);

  std::mt19937_64 rng(o.seed + 1);
  const Eigen::MatrixXd base = random_orthogonal(o.dim, rng);
  json languages = json::array();
  std::vector<probe::OrthogonalMap> planted_maps;
  std::vector<probe::ScalingVector> planted_scalers;
  std::ostringstream features;
  std::ostringstream sizes;
  features << "language,feature_id,value,area\n";
  sizes << "language,tokens\n";
  constexpr int kFeatures = 12;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t l = 0; l < o.languages.size(); ++l) {
    const auto& lang = o.languages[l];
    const double relatedness = o.languages.size() > 1 ? double(l) / double(o.languages.size() - 1) : 0.0;
    const Eigen::MatrixXd rotation =
        l == 0 ? base : Eigen::MatrixXd(small_rotation(o.dim, o.max_angle * relatedness, rng) * base);
    planted_maps.push_back({rotation, true});
    for (auto t : probe::kAllTasks) {
      if (!o.lexical && probe::is_lexical(t)) continue;
      planted_scalers.push_back({t, lang, probe::is_lexical(t) ? universe.lex_scale : universe.dep_scale});
    }
    json entry = {{"name", lang}, {"family", l < o.families.size() ? o.families[l] : "Other"}};
    if (o.lexical) {
      write_file_atomic((fs::path(dir) / (lang + ".forest")).string(), universe.forest_text);
      entry["forest"] = lang + ".forest";
    }
    const std::pair<const char*, std::size_t> splits[] = {
        {"train", o.train_sentences}, {"dev", o.dev_sentences}, {"test", o.test_sentences}};
    std::uint64_t split_seed = o.seed * 1000 + l * 10;
    for (const auto& [name, count] : splits) {
      auto data = generate_split(universe, rotation, lang, count, ++split_seed);
      const std::string stem = lang + "-" + name;
      write_file_atomic((fs::path(dir) / (stem + ".conllu")).string(), ingest::write_conllu(data.sentences));
      json emb = json::object();
      for (const auto& layer : data.layers) {
        const std::string file = stem + ".L" + std::to_string(layer.layer) + ".emb";
        ingest::write_embeddings(layer, (fs::path(dir) / file).string());
        emb[std::to_string(layer.layer)] = file;
      }
      entry[name] = {{"treebank", stem + ".conllu"}, {"embeddings", emb}};
    }
    languages.push_back(entry);

    // Feature agreement with the first language decays with relatedness.
    for (int f = 0; f < kFeatures; ++f) {
      const bool agree = l == 0 || unit(rng) > 0.7 * relatedness;
      const int value = agree ? f % 3 : (f % 3) + 1;
      features << lang << ",F" << f << ',' << value << ',' << (f % 2 == 0 ? "Word Order" : "Lexicon") << '\n';
    }
    sizes << lang << ',' << static_cast<std::uint64_t>(1000000.0 / (1.0 + 3.0 * relatedness) + 1000 * l) << '\n';
  }
  write_file_atomic((fs::path(dir) / "features.csv").string(), features.str());
  write_file_atomic((fs::path(dir) / "corpus_sizes.csv").string(), sizes.str());

  std::vector<probe::Task> planted_tasks;
  for (auto t : probe::kAllTasks)
    if (o.lexical || !probe::is_lexical(t)) planted_tasks.push_back(t);
  const probe::ProbeModel planted(probe::Regime::InLang, o.languages, o.dim, planted_tasks, probe::LayerChoice{},
                                  std::move(planted_maps), std::move(planted_scalers));
  probe::save_checkpoint(planted, (fs::path(dir) / "planted.ckpt").string(), {{"planted", true}});

  json tasks = o.lexical ? json{"dep_depth", "dep_distance", "lex_depth", "lex_distance"}
                         : json{"dep_depth", "dep_distance"};
  json config = {{"languages", languages},
                 {"regime", "InLang"},
                 {"tasks", tasks},
                 {"layers", {{"dependency", 7}, {"lexical", 5}}},
                 {"training", {{"seed", 1}, {"dso_weight", 1.0}}},
                 {"evaluation", {{"seeds", {1, 2}}}},
                 {"transfer", {{"targets", {o.languages.back()}}, {"grid", {0, 10}}}},
                 {"analysis", {{"features", "features.csv"}, {"corpus_sizes", "corpus_sizes.csv"}}},
                 {"out", "out"}};
  const std::string path = (fs::path(dir) / "config.json").string();
  write_file_atomic(path, config.dump(2) + "\n");
  return path;
}

}  // namespace orthoprobe::app
