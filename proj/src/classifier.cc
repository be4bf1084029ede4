#include "genreforge/classifier.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include <nlohmann/json.hpp>

#include "genreforge/error.h"
#include "genreforge/hashing.h"

namespace genreforge {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1)
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(l2 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "l2 must be >= 0");
}

// ---------------------------------------------------------------------------
// Parameters

HeadParams HeadParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  HeadParams h;
  h.input_dim = input_dim;
  h.hidden_dim = hidden_dim;
  h.hidden_weights.assign(hidden_dim * input_dim, 0.0);
  h.hidden_bias.assign(hidden_dim, 0.0);
  h.output_weights.assign(hidden_dim > 0 ? hidden_dim : input_dim, 0.0);
  return h;
}

HeadParams HeadParams::random(std::size_t input_dim, std::size_t hidden_dim,
                              std::uint64_t seed) {
  HeadParams h = zeros(input_dim, hidden_dim);
  Prng rng(seed);
  auto fill = [&](std::vector<double>& w, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    for (double& x : w) x = (2.0 * uniform_unit(rng) - 1.0) * bound;
  };
  fill(h.hidden_weights, input_dim);
  fill(h.output_weights, hidden_dim > 0 ? hidden_dim : input_dim);
  return h;
}

std::size_t HeadParams::parameter_count() const {
  return hidden_weights.size() + hidden_bias.size() + output_weights.size() + 1;
}

double& HeadParams::parameter(std::size_t i) {
  if (i < hidden_weights.size()) return hidden_weights[i];
  i -= hidden_weights.size();
  if (i < hidden_bias.size()) return hidden_bias[i];
  i -= hidden_bias.size();
  if (i < output_weights.size()) return output_weights[i];
  i -= output_weights.size();
  if (i == 0) return output_bias;
  throw Error(ErrorCode::kInvalidArgument, "parameter index out of range");
}

double HeadParams::parameter(std::size_t i) const {
  return const_cast<HeadParams*>(this)->parameter(i);
}

// ---------------------------------------------------------------------------
// Forward

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

void check_shape(const HeadParams& head, std::size_t n) {
  if (n != head.input_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "input length " + std::to_string(n) + ", model expects " +
                    std::to_string(head.input_dim));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Fills `hidden` with tanh activations; returns the logit.
double logit_with_hidden(const HeadParams& head, std::span<const double> x,
                         std::vector<double>& hidden) {
  if (head.hidden_dim == 0) return dot(head.output_weights, x) + head.output_bias;
  hidden.resize(head.hidden_dim);
  for (std::size_t j = 0; j < head.hidden_dim; ++j) {
    std::span<const double> row(head.hidden_weights.data() + j * head.input_dim,
                                head.input_dim);
    hidden[j] = std::tanh(dot(row, x) + head.hidden_bias[j]);
  }
  return dot(head.output_weights, hidden) + head.output_bias;
}

}  // namespace

double logit(const HeadParams& head, std::span<const double> x) {
  check_shape(head, x.size());
  std::vector<double> hidden;
  return logit_with_hidden(head, x, hidden);
}

double forward(const HeadParams& head, std::span<const double> x) {
  return sigmoid(logit(head, x));
}

int predict(const HeadParams& head, std::span<const double> x) {
  return logit(head, x) > 0.0 ? 1 : 0;
}

int label_from_probability(double p) { return p > 0.5 ? 1 : 0; }

// ---------------------------------------------------------------------------
// Loss

LossGrad loss_and_grad(const HeadParams& head, const Matrix& X,
                       std::span<const int> labels,
                       std::span<const std::size_t> rows, double l2) {
  if (rows.empty())
    throw Error(ErrorCode::kInvalidArgument, "loss over an empty batch");
  check_shape(head, X.cols);
  if (labels.size() != X.rows)
    throw Error(ErrorCode::kShapeMismatch, "labels do not match rows");

  LossGrad out;
  out.grad = HeadParams::zeros(head.input_dim, head.hidden_dim);
  HeadParams& g = out.grad;
  const double inv_b = 1.0 / static_cast<double>(rows.size());
  std::vector<double> hidden;

  for (std::size_t r : rows) {
    const auto x = X.row(r);
    const double y = labels[r];
    const double p = sigmoid(logit_with_hidden(head, x, hidden));
    const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    out.loss -= inv_b * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));

    const double dz = (p - y) * inv_b;
    g.output_bias += dz;
    if (head.hidden_dim == 0) {
      for (std::size_t i = 0; i < head.input_dim; ++i)
        g.output_weights[i] += dz * x[i];
      continue;
    }
    for (std::size_t j = 0; j < head.hidden_dim; ++j) {
      g.output_weights[j] += dz * hidden[j];
      const double da = dz * head.output_weights[j] * (1.0 - hidden[j] * hidden[j]);
      g.hidden_bias[j] += da;
      double* gw = g.hidden_weights.data() + j * head.input_dim;
      for (std::size_t i = 0; i < head.input_dim; ++i) gw[i] += da * x[i];
    }
  }

  double sq = 0.0;
  for (std::size_t i = 0; i < head.hidden_weights.size(); ++i) {
    sq += head.hidden_weights[i] * head.hidden_weights[i];
    g.hidden_weights[i] += 2.0 * l2 * head.hidden_weights[i];
  }
  for (std::size_t i = 0; i < head.output_weights.size(); ++i) {
    sq += head.output_weights[i] * head.output_weights[i];
    g.output_weights[i] += 2.0 * l2 * head.output_weights[i];
  }
  out.loss += l2 * sq;
  return out;
}

LossGrad loss_and_grad(const HeadParams& head, const Matrix& X,
                       std::span<const int> labels, double l2) {
  std::vector<std::size_t> rows(X.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return loss_and_grad(head, X, labels, rows, l2);
}

// ---------------------------------------------------------------------------
// Training

HeadTrainResult train_head(const Matrix& X, std::span<const int> labels,
                           const TrainConfig& config) {
  config.validate();
  if (labels.size() != X.rows)
    throw Error(ErrorCode::kShapeMismatch, "labels do not match rows");
  const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
  const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (!has0 || !has1) {
    throw Error(ErrorCode::kSingleClassTrainSet,
                "training data must contain both labels");
  }

  HeadTrainResult out;
  // Separate streams for initialization and shuffling.
  out.head = HeadParams::random(X.cols, config.hidden_dim, mix64(config.seed));
  Prng shuffle_rng(mix64(config.seed ^ 0x7368756666ULL));
  std::vector<std::size_t> order(X.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    seeded_shuffle(order, shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      const LossGrad lg = loss_and_grad(out.head, X, labels, batch, config.l2);
      for (std::size_t i = 0; i < out.head.parameter_count(); ++i)
        out.head.parameter(i) -= config.learning_rate * lg.grad.parameter(i);
    }
    out.epoch_loss.push_back(loss_and_grad(out.head, X, labels, config.l2).loss);
  }
  return out;
}

InputVector model_input(const ClassifierModel& model, std::string_view text,
                        const LinguisticFeatures& features) {
  const auto sentence = encode_sentence(text, model.encoder);
  return concat_features(sentence, features, model.features, model.stats);
}

TrainResult train(const PairDataset& dataset, const FeatureStore& store,
                  const EncoderConfig& encoder, const FeatureSpec& features,
                  const TrainConfig& config, std::string model_id) {
  encoder.validate();
  config.validate();

  std::vector<const LabeledRecord*> train_records;
  std::vector<LinguisticFeatures> train_features;
  for (const auto& r : dataset.records) {
    if (r.record.split != Split::Train) continue;
    train_records.push_back(&r);
    train_features.push_back(store.lookup(r.record.sentence_id));
  }

  ClassifierModel model;
  model.model_id = std::move(model_id);
  model.task = dataset.task;
  model.language = dataset.language;
  model.encoder = encoder;
  model.features = features;
  model.train_config = config;
  if (model.features.metre && model.features.pad_len == 0) {
    std::vector<MetrePattern> patterns;
    for (const auto& f : train_features) {
      if (!f.metre) throw Error(ErrorCode::kMissingFeature, "metre feature missing");
      patterns.push_back(MetrePattern{"", *f.metre, 0, 0});
    }
    model.features.pad_len = default_pad_len(patterns);
  }
  model.stats = compute_feature_stats(train_features, model.features);
  model.layout = make_layout(encoder.dim, model.features);

  Matrix X(train_records.size(), model.layout.total());
  std::vector<int> labels;
  labels.reserve(train_records.size());
  for (std::size_t i = 0; i < train_records.size(); ++i) {
    const auto input =
        model_input(model, train_records[i]->record.text, train_features[i]);
    std::copy(input.values.begin(), input.values.end(), X.row(i).begin());
    labels.push_back(train_records[i]->label);
  }

  HeadTrainResult trained = train_head(X, labels, config);
  model.head = std::move(trained.head);
  return {std::move(model), std::move(trained.epoch_loss)};
}

Predictions predict_split(const ClassifierModel& model,
                          const PairDataset& dataset, const FeatureStore& store,
                          Split split) {
  Predictions out;
  for (const auto& r : dataset.records) {
    if (r.record.split != split) continue;
    const auto input =
        model_input(model, r.record.text, store.lookup(r.record.sentence_id));
    out.predicted.push_back(predict(model.head, input.values));
    out.labels.push_back(r.label);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json moments_json(const std::optional<Moments>& m) {
  if (!m) return nullptr;
  return json{{"mean", m->mean}, {"std", m->std}};
}

std::optional<Moments> moments_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return Moments{j.at("mean").get<double>(), j.at("std").get<double>()};
}

}  // namespace

std::string model_to_json(const ClassifierModel& m) {
  json j;
  j["format"] = "genreforge-model";
  j["version"] = kModelFormatVersion;
  j["model_id"] = m.model_id;
  j["task"] = m.task.id();
  j["language"] = std::string(to_string(m.language));
  j["encoder"] = {{"ngram_min", m.encoder.ngram_min},
                  {"ngram_max", m.encoder.ngram_max},
                  {"dim", m.encoder.dim},
                  {"hash_seed", m.encoder.hash_seed},
                  {"normalize", m.encoder.normalize},
                  {"hash", "fnv1a64+splitmix64"}};
  auto kinds = json::array();
  for (FeatureKind k : m.features.kinds()) kinds.push_back(std::string(to_string(k)));
  j["features"] = {{"kinds", kinds},
                   {"pad_len", m.features.pad_len},
                   {"syntax_tree", "dependency"}};
  j["stats"] = {{"depth", moments_json(m.stats.depth)},
                {"ratio", moments_json(m.stats.ratio)},
                {"metaphor", moments_json(m.stats.metaphor)}};
  auto layout = json::array();
  for (const auto& s : m.layout.segments)
    layout.push_back({{"name", s.name}, {"offset", s.offset}, {"length", s.length}});
  j["layout"] = layout;
  j["train"] = {{"learning_rate", m.train_config.learning_rate},
                {"epochs", m.train_config.epochs},
                {"batch_size", m.train_config.batch_size},
                {"l2", m.train_config.l2},
                {"seed", m.train_config.seed},
                {"hidden_dim", m.train_config.hidden_dim},
                {"prng", kPrngName}};
  j["threshold"] = m.threshold;
  j["cache_key"] = m.cache_key;
  j["head"] = {{"input_dim", m.head.input_dim},
               {"hidden_dim", m.head.hidden_dim},
               {"hidden_weights", m.head.hidden_weights},
               {"hidden_bias", m.head.hidden_bias},
               {"output_weights", m.head.output_weights},
               {"output_bias", m.head.output_bias}};
  return j.dump() + "\n";
}

ClassifierModel model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
  try {
    if (j.at("format") != "genreforge-model")
      throw Error(ErrorCode::kParseError, "not a genreforge model file");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kParseError,
                  "unsupported model version " + j.at("version").dump());
    }
    ClassifierModel m;
    m.model_id = j.at("model_id").get<std::string>();
    m.task = Task::parse(j.at("task").get<std::string>());
    m.language = language_or_throw(j.at("language").get<std::string>());
    const auto& enc = j.at("encoder");
    m.encoder.ngram_min = enc.at("ngram_min").get<int>();
    m.encoder.ngram_max = enc.at("ngram_max").get<int>();
    m.encoder.dim = enc.at("dim").get<std::size_t>();
    m.encoder.hash_seed = enc.at("hash_seed").get<std::uint64_t>();
    m.encoder.normalize = enc.at("normalize").get<bool>();
    m.encoder.validate();
    for (const auto& k : j.at("features").at("kinds")) {
      switch (parse_feature_kind(k.get<std::string>())) {
        case FeatureKind::Syntax: m.features.syntax = true; break;
        case FeatureKind::Metaphor: m.features.metaphor = true; break;
        case FeatureKind::Metre: m.features.metre = true; break;
      }
    }
    m.features.pad_len = j.at("features").at("pad_len").get<std::size_t>();
    const auto& st = j.at("stats");
    m.stats.depth = moments_from(st.at("depth"));
    m.stats.ratio = moments_from(st.at("ratio"));
    m.stats.metaphor = moments_from(st.at("metaphor"));
    for (const auto& s : j.at("layout")) {
      m.layout.segments.push_back({s.at("name").get<std::string>(),
                                   s.at("offset").get<std::size_t>(),
                                   s.at("length").get<std::size_t>()});
    }
    const auto& tr = j.at("train");
    m.train_config.learning_rate = tr.at("learning_rate").get<double>();
    m.train_config.epochs = tr.at("epochs").get<int>();
    m.train_config.batch_size = tr.at("batch_size").get<std::size_t>();
    m.train_config.l2 = tr.at("l2").get<double>();
    m.train_config.seed = tr.at("seed").get<std::uint64_t>();
    m.train_config.hidden_dim = tr.at("hidden_dim").get<std::size_t>();
    m.threshold = j.at("threshold").get<double>();
    m.cache_key = j.value("cache_key", std::string());
    const auto& h = j.at("head");
    m.head.input_dim = h.at("input_dim").get<std::size_t>();
    m.head.hidden_dim = h.at("hidden_dim").get<std::size_t>();
    m.head.hidden_weights = h.at("hidden_weights").get<std::vector<double>>();
    m.head.hidden_bias = h.at("hidden_bias").get<std::vector<double>>();
    m.head.output_weights = h.at("output_weights").get<std::vector<double>>();
    m.head.output_bias = h.at("output_bias").get<double>();

    if (m.threshold != 0.5)
      throw Error(ErrorCode::kParseError, "decision threshold must be 0.5");
    const Layout expected = make_layout(m.encoder.dim, m.features);
    if (!(expected == m.layout)) {
      throw Error(ErrorCode::kLayoutMismatch,
                  "stored layout disagrees with encoder/feature configuration");
    }
    const std::size_t in = m.layout.total();
    const std::size_t hid = m.head.hidden_dim;
    if (m.head.input_dim != in || m.head.hidden_weights.size() != hid * in ||
        m.head.hidden_bias.size() != hid ||
        m.head.output_weights.size() != (hid > 0 ? hid : in) ||
        hid != m.train_config.hidden_dim) {
      throw Error(ErrorCode::kLayoutMismatch,
                  "weight shapes do not match layout of width " +
                      std::to_string(in));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
}

void save_model(const ClassifierModel& model, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << model_to_json(model);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

ClassifierModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return model_from_json(data);
}

}  // namespace genreforge
