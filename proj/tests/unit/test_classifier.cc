#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "genreforge/classifier.h"
#include "genreforge/error.h"
#include "genreforge/hashing.h"

using namespace genreforge;
namespace fs = std::filesystem;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Prng& rng) {
  Matrix m(r, c);
  for (double& x : m.data) x = 2.0 * uniform_unit(rng) - 1.0;
  return m;
}

// Forward pass written directly from the model definition.
double oracle_forward(const HeadParams& h, std::span<const double> x) {
  double z = h.output_bias;
  if (h.hidden_dim == 0) {
    for (std::size_t i = 0; i < x.size(); ++i) z += h.output_weights[i] * x[i];
  } else {
    for (std::size_t k = 0; k < h.hidden_dim; ++k) {
      double a = h.hidden_bias[k];
      for (std::size_t i = 0; i < x.size(); ++i)
        a += h.hidden_weights[k * h.input_dim + i] * x[i];
      z += h.output_weights[k] * std::tanh(a);
    }
  }
  return 1.0 / (1.0 + std::exp(-z));
}

PairDataset toy_dataset(std::size_t per_class, std::uint64_t seed) {
  PairDataset d{Task::make(Genre::Novel, Genre::Poetry), Language::EN, {}};
  const std::vector<std::string> a{"the ledger of accounts", "a ledger entry", "accounts due"};
  const std::vector<std::string> b{"oh moonlit rose", "moonlit sighs", "rose of night oh"};
  Prng rng(seed);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int label = i % 2;
    const auto& pool = label == 0 ? a : b;
    SentenceRecord r{"r" + std::to_string(i), pool[uniform_below(rng, pool.size())],
                     Language::EN, label == 0 ? Genre::Novel : Genre::Poetry,
                     i < 3 * per_class / 2 ? Split::Train : Split::Test, 0};
    d.records.push_back({r, label});
  }
  return d;
}

EncoderConfig enc64() {
  EncoderConfig e;
  e.dim = 64;
  return e;
}

}  // namespace

TEST_CASE("forward examples") {
  const auto zero = HeadParams::zeros(5, 0);
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(forward(zero, x) == 0.5);
  CHECK(predict(zero, x) == 0);  // ties go to label 0

  HeadParams big = HeadParams::zeros(1, 0);
  big.output_weights[0] = 1000.0;
  CHECK(forward(big, std::vector<double>{1.0}) > 1.0 - 1e-12);
  CHECK(forward(big, std::vector<double>{-1.0}) < 1e-12);
  CHECK(std::isfinite(forward(big, std::vector<double>{-1.0})));
  CHECK(label_from_probability(0.5) == 0);
  CHECK(label_from_probability(0.5000001) == 1);

  CHECK_THROWS_AS(forward(zero, std::vector<double>{1.0}), Error);
}

TEST_CASE("forward matches the definition for both heads") {
  Prng rng(4);
  for (std::size_t hidden : {0u, 8u}) {
    const auto h = HeadParams::random(12, hidden, 99);
    for (int t = 0; t < 50; ++t) {
      const Matrix x = random_matrix(1, 12, rng);
      CHECK(forward(h, x.row(0)) == doctest::Approx(oracle_forward(h, x.row(0))).epsilon(1e-12));
      CHECK(predict(h, x.row(0)) == (oracle_forward(h, x.row(0)) > 0.5 ? 1 : 0));
    }
  }
}

TEST_CASE("loss examples") {
  const Matrix X(4, 3, 0.7);
  const std::vector<int> y{0, 1, 1, 0};
  const auto lg = loss_and_grad(HeadParams::zeros(3, 0), X, y, 0.0);
  CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  HeadParams sure = HeadParams::zeros(1, 0);
  sure.output_weights[0] = 1e6;
  const Matrix one(1, 1, 1.0);
  const auto wrong = loss_and_grad(sure, one, std::vector<int>{0}, 0.0);
  CHECK(std::isfinite(wrong.loss));
  CHECK(wrong.loss == doctest::Approx(-std::log(kProbabilityClamp)).epsilon(1e-6));
  const auto right = loss_and_grad(sure, one, std::vector<int>{1}, 0.0);
  CHECK(right.loss < 1e-9);

  // L2 touches weights only.
  HeadParams w = HeadParams::zeros(3, 0);
  w.output_weights = {1, 2, 0};
  w.output_bias = 5;
  const auto a = loss_and_grad(w, X, y, 0.0);
  const auto b = loss_and_grad(w, X, y, 0.1);
  CHECK(b.loss - a.loss == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.grad.output_bias == a.grad.output_bias);
}

TEST_CASE("analytic gradients match central differences") {
  Prng rng(31);
  for (std::size_t hidden : {0u, 6u}) {
    const Matrix X = random_matrix(10, 7, rng);
    std::vector<int> y(10);
    for (int& v : y) v = static_cast<int>(uniform_below(rng, 2));
    HeadParams h = HeadParams::random(7, hidden, 5);
    const double l2 = 1e-3;
    const auto lg = loss_and_grad(h, X, y, l2);
    for (std::size_t i = 0; i < h.parameter_count(); ++i) {
      const double eps = 1e-6;
      const double orig = h.parameter(i);
      h.parameter(i) = orig + eps;
      const double up = loss_and_grad(h, X, y, l2).loss;
      h.parameter(i) = orig - eps;
      const double down = loss_and_grad(h, X, y, l2).loss;
      h.parameter(i) = orig;
      const double fd = (up - down) / (2 * eps);
      const double an = lg.grad.parameter(i);
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("train_head separates a toy problem and is deterministic") {
  Prng rng(8);
  Matrix X(60, 2);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    y[i] = static_cast<int>(i % 2);
    X(i, 0) = (y[i] ? 1.0 : -1.0) + 0.3 * (uniform_unit(rng) - 0.5);
    X(i, 1) = uniform_unit(rng);
  }
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 30;
  cfg.batch_size = 8;
  cfg.seed = 3;
  const auto a = train_head(X, y, cfg);
  const auto b = train_head(X, y, cfg);
  CHECK(a.head == b.head);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());
  for (std::size_t i = 0; i < 60; ++i) CHECK(predict(a.head, X.row(i)) == y[i]);

  cfg.seed = 4;
  CHECK_FALSE(train_head(X, y, cfg).head == a.head);

  const std::vector<int> ones(60, 1);
  try {
    train_head(X, ones, cfg);
    FAIL("expected SingleClassTrainSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingleClassTrainSet);
  }
}

TEST_CASE("train on records reaches perfect test accuracy on separable text") {
  const auto d = toy_dataset(40, 1);
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  const auto r = train(d, FeatureStore{}, enc64(), FeatureSpec{}, cfg, "toy");
  const auto p = predict_split(r.model, d, FeatureStore{}, Split::Test);
  CHECK(p.predicted.size() == d.count(Split::Test));
  CHECK(p.predicted == p.labels);
  CHECK(r.model.layout == make_layout(64, FeatureSpec{}));
}

TEST_CASE("model save/load round trip preserves predictions") {
  const auto d = toy_dataset(30, 2);
  FeatureStore store;
  for (const auto& lr : d.records)
    store.metre[lr.record.sentence_id] =
        MetrePattern{lr.record.sentence_id, StressMarks(lr.label + 1, 1), 0, 0};
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.hidden_dim = 4;
  const auto r = train(d, store, enc64(), FeatureSpec::parse("metre"), cfg, "m");
  CHECK(r.model.features.pad_len >= 1);

  const fs::path path = fs::temp_directory_path() / "gf_model_test.json";
  save_model(r.model, path);
  const auto back = load_model(path);
  CHECK(back.head == r.model.head);
  CHECK(back.layout == r.model.layout);
  CHECK(back.stats == r.model.stats);
  CHECK(back.features == r.model.features);
  CHECK(predict_split(back, d, store, Split::Test).predicted ==
        predict_split(r.model, d, store, Split::Test).predicted);
  CHECK(model_to_json(back) == model_to_json(r.model));

  auto j = nlohmann::json::parse(model_to_json(r.model));
  j["layout"][0]["length"] = 65;
  try {
    model_from_json(j.dump());
    FAIL("expected LayoutMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLayoutMismatch);
  }
  fs::remove(path);
}
