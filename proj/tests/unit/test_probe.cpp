#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "error.hpp"
#include "helpers.hpp"
#include "probe/adam.hpp"
#include "probe/checkpoint.hpp"
#include "probe/geometry.hpp"
#include "probe/gradients.hpp"
#include "probe/model.hpp"

using namespace orthoprobe;
using namespace orthoprobe::probe;

namespace {

Eigen::MatrixXd random_orthogonal(int dim, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(testutil::gaussian(dim, dim, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
}

Eigen::MatrixXd naive_baseline_distances(const Eigen::MatrixXd& B, const Eigen::MatrixXd& H) {
  const auto n = H.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index r = 0; r < B.rows(); ++r) {
        double p = 0.0;
        for (Eigen::Index c = 0; c < B.cols(); ++c) p += B(r, c) * (H(i, c) - H(j, c));
        s += p * p;
      }
      out(i, j) = s;
    }
  return out;
}

Eigen::VectorXd naive_baseline_depths(const Eigen::MatrixXd& B, const Eigen::MatrixXd& H) {
  Eigen::VectorXd out(H.rows());
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < B.rows(); ++r) {
      double p = 0.0;
      for (Eigen::Index c = 0; c < B.cols(); ++c) p += B(r, c) * H(i, c);
      s += p * p;
    }
    out[i] = s;
  }
  return out;
}

ProbeModel small_model(Regime regime, std::vector<std::string> langs, int dim, std::uint64_t seed = 3,
                       std::vector<Task> tasks = {Task::DepDepth, Task::DepDistance}) {
  ProbeModel::Options o;
  o.regime = regime;
  o.languages = std::move(langs);
  o.dim = dim;
  o.tasks = std::move(tasks);
  o.seed = seed;
  o.init_scale = 0.5;
  return ProbeModel::create(o);
}

Batch make_batch(std::size_t lang, Task task, const std::vector<std::shared_ptr<const ingest::SentencePair>>& pairs) {
  Batch b{lang, task, {}};
  for (const auto& p : pairs) b.sentences.push_back(p.get());
  return b;
}

}  // namespace

TEST_CASE("baseline predictions: examples and naive oracles") {
  Eigen::MatrixXd H(2, 2);
  H << 0, 0, 3, 4;
  CHECK(predict_distances_baseline(Eigen::MatrixXd::Identity(2, 2), H)(0, 1) == doctest::Approx(25));
  Eigen::MatrixXd h(1, 3);
  h << 1, 2, 2;
  CHECK(predict_depths_baseline(Eigen::MatrixXd::Identity(3, 3), h)(0) == doctest::Approx(9));
  CHECK(predict_depths_baseline(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(1, 3))(0) == 0);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto B = testutil::gaussian(3, 6, rng);
    const auto X = testutil::gaussian(5, 6, rng);
    const auto D = predict_distances_baseline(B, X);
    CHECK((D - naive_baseline_distances(B, X)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(D.diagonal().cwiseAbs().maxCoeff() == 0);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() == 0);
    CHECK(D.minCoeff() >= 0);
    CHECK((predict_depths_baseline(B, X) - naive_baseline_depths(B, X)).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(predict_distances_baseline(Eigen::MatrixXd::Identity(3, 3), H), ContractError);
  CHECK_THROWS_AS(predict_depths_baseline(Eigen::MatrixXd::Identity(3, 3), H), ContractError);
}

TEST_CASE("orthogonal probe predictions: examples") {
  Eigen::MatrixXd H(2, 2);
  H << 0, 0, 3, 4;
  CHECK(predict_distances(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1), H)(0, 1) == doctest::Approx(25));
  Eigen::MatrixXd V(2, 2);
  V << 0, -1, 1, 0;
  Eigen::MatrixXd E(2, 2);
  E << 1, 0, 0, 1;
  CHECK(predict_distances(V, Eigen::Vector2d(2, 1), E)(0, 1) == doctest::Approx(5));
  Eigen::MatrixXd p(1, 2);
  p << 3, 4;
  CHECK(predict_depths(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1), p)(0) == doctest::Approx(25));
  CHECK(predict_depths(V, Eigen::Vector2d(1, 1), Eigen::MatrixXd::Zero(1, 2))(0) == 0);
  CHECK_THROWS_AS(predict_distances(V, Eigen::Vector3d(1, 1, 1), E), ContractError);
  CHECK_THROWS_AS(predict_depths(Eigen::MatrixXd::Identity(2, 3), Eigen::Vector2d(1, 1), E), ContractError);
}

TEST_CASE("orthogonal probe: sign invariance, factorised equivalence, rotation covariance") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + trial;
    const auto V = random_orthogonal(dim, rng);
    const Eigen::VectorXd d = testutil::gaussian(dim, 1, rng);
    const auto H = testutil::gaussian(6, dim, rng);
    const auto D = predict_distances(V, d, H);
    const auto Z = predict_depths(V, d, H);

    Eigen::VectorXd flipped = d;
    flipped[trial % dim] = -flipped[trial % dim];
    CHECK((predict_distances(V, flipped, H) - D).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd B = d.asDiagonal() * V.transpose();
    CHECK((predict_distances_baseline(B, H) - D).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((predict_depths_baseline(B, H) - Z).cwiseAbs().maxCoeff() < 1e-9);

    const auto W = random_orthogonal(dim, rng);
    const Eigen::MatrixXd HW = H * W.transpose();  // every h becomes W h
    CHECK((predict_distances(W * V, d, HW) - D).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((predict_depths(W * V, d, HW) - Z).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(D.diagonal().cwiseAbs().maxCoeff() == 0);
  }
}

TEST_CASE("losses: examples and pair-loop oracle") {
  PairMask all = PairMask::Constant(2, 2, true);
  Eigen::MatrixXd pred(2, 2), gold(2, 2);
  pred << 0, 3, 3, 0;
  gold << 0, 1, 1, 0;
  CHECK(*distance_loss(pred, gold, all) == doctest::Approx(2));
  CHECK(*distance_loss(gold, gold, all) == 0);
  CHECK_FALSE(distance_loss(pred, gold, PairMask::Constant(2, 2, false)));
  CHECK_FALSE(depth_loss(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2), Mask::Constant(2, false)));
  CHECK(*depth_loss(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 5), Mask::Constant(2, true)) == doctest::Approx(1.5));
  CHECK_THROWS_AS(distance_loss(pred, Eigen::MatrixXd::Zero(3, 3), all), ContractError);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd p = testutil::gaussian(4, 4, rng).cwiseAbs();
    p = (p + p.transpose()).eval();
    const auto heads = testutil::random_heads(4, rng);
    const Eigen::MatrixXd g = ingest::compute_tree_distances(heads).cast<double>();
    double oracle = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) oracle += std::abs(p(i, j) - g(i, j));
    oracle /= 6.0;
    const double l = *distance_loss(p, g, PairMask::Constant(4, 4, true));
    CHECK(l == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(l >= 0);
  }
}

TEST_CASE("DSO penalty") {
  CHECK(dso_penalty(Eigen::MatrixXd::Identity(3, 3)) == 0);
  CHECK(dso_penalty(2.0 * Eigen::MatrixXd::Identity(2, 2)) == doctest::Approx(36));
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(4, 4);
  perm(0, 2) = perm(1, 0) = perm(2, 3) = perm(3, 1) = 1;
  CHECK(dso_penalty(perm) == 0);
  CHECK_THROWS_AS(dso_penalty(Eigen::MatrixXd::Zero(2, 3)), ContractError);
  CHECK(orthogonality_residual(2.0 * Eigen::MatrixXd::Identity(2, 2)) == doctest::Approx(std::sqrt(18.0)));

  // Pure penalty descent from a Gaussian start.
  std::mt19937_64 rng(6);
  for (int dim : {4, 8, 16}) {
    Eigen::MatrixXd V = testutil::gaussian(dim, dim, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
    for (int step = 0; step < 2000; ++step) V -= 0.01 * dso_gradient(V);
    CHECK(dso_penalty(V) <= 0.01 * dim);
  }
}

TEST_CASE("polar projection") {
  std::mt19937_64 rng(7);
  const auto Q = random_orthogonal(6, rng);
  CHECK((polar_project(Q) - Q).cwiseAbs().maxCoeff() < 1e-10);
  const auto P = polar_project(Q + 0.05 * testutil::gaussian(6, 6, rng));
  CHECK(orthogonality_residual(P) < 1e-10);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(8);
  const int dim = 4;
  auto model = small_model(Regime::InLang, {"aa"}, dim);
  model.maps()[0].matrix = random_orthogonal(dim, rng) + 0.1 * testutil::gaussian(dim, dim, rng);
  std::vector<std::shared_ptr<const ingest::SentencePair>> pairs;
  for (int s = 0; s < 3; ++s)
    pairs.push_back(testutil::pair(testutil::sentence(testutil::random_heads(3, rng)), testutil::gaussian(3, dim, rng)));
  const double lambda = 0.3;
  const double h = 1e-5;
  int checked = 0;
  for (Task task : {Task::DepDistance, Task::DepDepth}) {
    const auto batch = make_batch(0, task, pairs);
    const auto g = batch_gradient(model, batch, lambda);
    CHECK(g.objective() == doctest::Approx(batch_objective(model, batch, lambda)).epsilon(1e-12));
    REQUIRE(g.map_grad);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) {
        auto plus = model, minus = model;
        plus.maps()[0].matrix(r, c) += h;
        minus.maps()[0].matrix(r, c) -= h;
        const double fd = (batch_objective(plus, batch, lambda) - batch_objective(minus, batch, lambda)) / (2 * h);
        const double an = (*g.map_grad)(r, c);
        CHECK(std::abs(an - fd) <= 1e-4 * std::max({std::abs(an), std::abs(fd), 1e-6}));
        ++checked;
      }
    for (int k = 0; k < dim; ++k) {
      auto plus = model, minus = model;
      plus.scalers()[g.scaler].values[k] += h;
      minus.scalers()[g.scaler].values[k] -= h;
      const double fd = (batch_objective(plus, batch, lambda) - batch_objective(minus, batch, lambda)) / (2 * h);
      const double an = g.scaler_grad[k];
      CHECK(std::abs(an - fd) <= 1e-4 * std::max({std::abs(an), std::abs(fd), 1e-6}));
      ++checked;
    }
  }
  CHECK(checked == 2 * (dim * dim + dim));
}

TEST_CASE("gradients vanish at the optimum with no penalty") {
  // Embeddings built so that identity map and unit scale reproduce gold: a
  // chain 1-2-3 laid out on orthogonal axes.
  Eigen::MatrixXd H(3, 3);
  H << 0, 0, 0, 1, 0, 0, 1, 1, 0;
  auto pair = testutil::pair(testutil::sentence({0, 1, 2}), H);
  auto model = small_model(Regime::InLang, {"aa"}, 3, 1, {Task::DepDistance});
  model.scalers()[0].values = Eigen::VectorXd::Ones(3);
  const auto g = batch_gradient(model, make_batch(0, Task::DepDistance, {pair}), 0.0);
  CHECK(g.loss == 0);
  CHECK(g.map_grad->cwiseAbs().maxCoeff() == 0);
  CHECK(g.scaler_grad.cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("frozen anchor receives no map gradient") {
  std::mt19937_64 rng(9);
  auto model = small_model(Regime::MappedLangs, {"aa", "bb"}, 3);
  CHECK_FALSE(model.map_for(0).trainable);
  CHECK(model.map_for(1).trainable);
  auto pair = testutil::pair(testutil::sentence({0, 1, 1}), testutil::gaussian(3, 3, rng));
  const auto anchor = batch_gradient(model, make_batch(0, Task::DepDistance, {pair}), 1.0);
  CHECK_FALSE(anchor.map_grad);
  CHECK(anchor.penalty == 0);
  const auto other = batch_gradient(model, make_batch(1, Task::DepDistance, {pair}), 1.0);
  CHECK(other.map_grad);
}

TEST_CASE("non-finite gradients name the parameter") {
  auto model = small_model(Regime::InLang, {"aa"}, 2);
  model.maps()[0].matrix(0, 0) = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd H(2, 2);
  H << 1, 0, 0, 1;
  auto pair = testutil::pair(testutil::sentence({0, 1}), H);
  try {
    batch_gradient(model, make_batch(0, Task::DepDistance, {pair}), 0.1);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("'aa'") != std::string::npos);
  }
}

TEST_CASE("model layout per regime") {
  const std::vector<std::string> langs{"a", "b", "c"};
  ProbeModel::Options o;
  o.languages = langs;
  o.dim = 5;
  o.regime = Regime::InLang;
  auto in = ProbeModel::create(o);
  CHECK(in.maps().size() == 3);
  CHECK(in.scalers().size() == 12);
  CHECK(in.trainable_parameter_count() == 3 * 25 + 12 * 5);
  o.regime = Regime::MappedLangs;
  auto mapped = ProbeModel::create(o);
  CHECK(mapped.maps().size() == 3);
  CHECK(mapped.scalers().size() == 4);
  CHECK(mapped.maps()[0].matrix == Eigen::MatrixXd::Identity(5, 5));
  CHECK(mapped.scaler_index(Task::LexDepth, 0) == mapped.scaler_index(Task::LexDepth, 2));
  o.regime = Regime::AllLangs;
  auto all = ProbeModel::create(o);
  CHECK(all.maps().size() == 1);
  CHECK(all.map_index(2) == 0);
  CHECK(all.scalers().size() == 4);

  ProbeModel::Options full;
  full.regime = Regime::MappedLangs;
  full.languages = {"en", "de", "fr", "es", "zh", "id", "fi", "ar", "ko"};
  full.dim = 768;
  CHECK(ProbeModel::create(full).trainable_parameter_count() == 4721664);

  o.regime = Regime::MappedLangs;
  o.languages = {"a"};
  CHECK_THROWS_AS(ProbeModel::create(o), ConfigError);
  o.languages = {"a", "a"};
  CHECK_THROWS_AS(ProbeModel::create(o), ConfigError);
  o.languages = {};
  CHECK_THROWS_AS(ProbeModel::create(o), ConfigError);
  o.languages = {"a"};
  o.regime = Regime::InLang;
  o.dim = 0;
  CHECK_THROWS_AS(ProbeModel::create(o), ConfigError);
  CHECK_THROWS_AS(in.language_index("zz"), ConfigError);
}

TEST_CASE("model creation is deterministic in the seed") {
  auto a = small_model(Regime::InLang, {"x", "y"}, 6, 42);
  auto b = small_model(Regime::InLang, {"x", "y"}, 6, 42);
  auto c = small_model(Regime::InLang, {"x", "y"}, 6, 43);
  for (std::size_t i = 0; i < a.scalers().size(); ++i) CHECK(a.scalers()[i].values == b.scalers()[i].values);
  CHECK(a.scalers()[0].values != c.scalers()[0].values);
}

TEST_CASE("task and regime names") {
  for (Task t : kAllTasks) CHECK(parse_task(to_string(t)) == t);
  for (Regime r : {Regime::InLang, Regime::MappedLangs, Regime::AllLangs}) CHECK(parse_regime(to_string(r)) == r);
  CHECK_THROWS_AS(parse_task("pos"), ConfigError);
  CHECK_THROWS_AS(parse_regime("Everything"), ConfigError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  std::mt19937_64 rng(10);
  auto model = small_model(Regime::MappedLangs, {"aa", "bb", "cc"}, 5);
  model.maps()[2].matrix = testutil::gaussian(5, 5, rng);
  const auto bytes = encode_checkpoint(model, {{"seed", 7}});
  const auto loaded = decode_checkpoint(bytes);
  CHECK(loaded.manifest.at("seed") == 7);
  const auto& m = loaded.model;
  CHECK(m.regime() == Regime::MappedLangs);
  CHECK(m.languages() == model.languages());
  CHECK(m.tasks() == model.tasks());
  CHECK(m.layers() == model.layers());
  for (std::size_t i = 0; i < model.maps().size(); ++i) {
    CHECK(m.maps()[i].matrix == model.maps()[i].matrix);
    CHECK(m.maps()[i].trainable == model.maps()[i].trainable);
  }
  for (std::size_t i = 0; i < model.scalers().size(); ++i) CHECK(m.scalers()[i].values == model.scalers()[i].values);
  CHECK(encode_checkpoint(m, {{"seed", 7}}) == bytes);

  CHECK_THROWS_AS(decode_checkpoint("garbage"), FormatError);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 8)), FormatError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.ckpt"), IoError);
}

TEST_CASE("adam: first step moves each coordinate by the learning rate") {
  Eigen::VectorXd p(3), g(3);
  p << 1, 2, 3;
  g << 0.5, -2, 0;
  AdamState<Eigen::VectorXd> adam(p);
  adam.step(p, g, 0.1, AdamSettings{});
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(2.1));
  CHECK(p[2] == 3);
  CHECK(adam.steps() == 1);
  // Second step against an explicit recurrence.
  Eigen::VectorXd g2(3);
  g2 << 1, 1, 1;
  adam.step(p, g2, 0.1, AdamSettings{});
  const double m = 0.9 * 0.05 + 0.1 * 1.0, v = 0.999 * 0.00025 + 0.001;
  const double first = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  const double expected = first - 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  CHECK(p[0] == doctest::Approx(expected).epsilon(1e-12));
}
