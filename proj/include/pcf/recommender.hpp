#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pcf/classical_cf.hpp"
#include "pcf/dataset.hpp"
#include "pcf/error.hpp"
#include "pcf/perceptron.hpp"
#include "pcf/random.hpp"
#include "pcf/training.hpp"

namespace pcf {

/// Settings for the per-user pipeline.
///
/// Ratings are binarized with `rating_threshold` (rating scale) and
/// recommendations are made when h(x) >= `decision_threshold` (probability
/// scale). The network is [n_features, hidden..., 1].
struct RecommenderConfig {
  double rating_threshold = 3.0;
  double decision_threshold = 0.5;
  Preprocessing preprocessing = Preprocessing::mean_normalize;
  std::vector<std::size_t> hidden_layers{4};
  Activation hidden = Activation::sigmoid;
  bool bias = false;
  /// `train.seed` is the run seed; each user derives its own from it.
  TrainConfig train;

  Topology topology_for(std::size_t n_features) const {
    std::vector<std::size_t> layers{n_features};
    layers.insert(layers.end(), hidden_layers.begin(), hidden_layers.end());
    layers.push_back(1);
    return Topology(std::move(layers));
  }
};

/// Seed used for `user_id` under run seed `run_seed`; independent of which
/// other users are trained alongside.
inline std::uint64_t user_seed(std::uint64_t run_seed, std::string_view user_id) {
  return derive_seed(run_seed, SeedStream::user, hash_string(user_id));
}

struct TrainingMeta {
  TrainConfig config;
  double final_cost = 0.0;
  bool single_class = false;
};

/// Everything needed to score new items for one user.
struct UserModel {
  std::string user_id;
  Network net;
  ScalingStats stats;
  double threshold = 0.5;
  double rating_threshold = 3.0;
  TrainingMeta meta;
};

struct Recommendation {
  std::string item_id;
  double score = 0.0;
  bool recommended = false;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct Candidate {
  std::string item_id;
  Vector features;
};

/// Index of `user_id`; a user absent from the ratings is cold.
inline std::size_t require_user(const RatingsDataset& d, const std::string& user_id) {
  const auto j = d.user_index(user_id);
  if (!j) throw ColdUserError("user '" + user_id + "' has no ratings");
  return *j;
}

/// One example per item rated by `user`: the (preprocessed) feature row and
/// the binarized label, K = 1.
inline std::vector<Example> build_user_examples(const RatingsDataset& d, std::size_t user, const BinaryLabels& labels,
                                                const FeatureMatrix& x) {
  if (user >= d.n_users()) throw ColdUserError("user index " + std::to_string(user) + " has no ratings");
  if (x.n_items() != d.n_items()) {
    throw DimensionError("feature matrix has " + std::to_string(x.n_items()) + " rows for " +
                         std::to_string(d.n_items()) + " items");
  }
  std::vector<Example> out;
  for (const auto& r : d.ratings_of_user(user)) {
    const auto label = labels.label(r.item, r.user);
    if (!label) throw Error("no label for item '" + d.item_ids()[r.item] + "'");
    auto row = x.values.row(r.item);
    out.push_back({Vector(row.begin(), row.end()), Vector{static_cast<double>(*label)}});
  }
  if (out.empty()) throw ColdUserError("user '" + d.user_ids()[user] + "' has no ratings");
  return out;
}

/// Preprocesses `raw_features` (rows aligned with d's items), builds the
/// user's examples and trains a fresh network on them.
inline UserModel train_user(const RatingsDataset& d, const FeatureMatrix& raw_features, std::size_t user,
                            const RecommenderConfig& cfg) {
  if (!(cfg.decision_threshold > 0.0 && cfg.decision_threshold < 1.0)) {
    throw ConfigError("decision threshold must lie in (0, 1)");
  }
  const FeatureMatrix x = preprocess(raw_features, cfg.preprocessing);
  const auto examples = build_user_examples(d, user, binarize(d, cfg.rating_threshold), x);

  UserModel model;
  model.user_id = d.user_ids()[user];
  model.stats = *x.stats;
  model.threshold = cfg.decision_threshold;
  model.rating_threshold = cfg.rating_threshold;
  model.meta.config = cfg.train;
  model.meta.config.seed = user_seed(cfg.train.seed, model.user_id);
  model.meta.single_class = std::ranges::all_of(examples, [&](const Example& e) { return e.y == examples[0].y; });

  DescentResult fit = train_network(cfg.topology_for(x.n_features()), cfg.hidden, cfg.bias, examples,
                                    model.meta.config);
  model.net = std::move(fit.net);
  model.meta.final_cost = fit.cost_history.empty() ? total_cost_regularized(model.net, examples, cfg.train.lambda)
                                                   : fit.cost_history.back();
  return model;
}

/// h(x) for raw (unpreprocessed) item features.
inline double score(const UserModel& model, std::span<const double> raw_features) {
  return forward(model.net, apply_stats(model.stats, raw_features)).output().front();
}

/// Scores every candidate; sorted by score descending, then item id ascending.
inline std::vector<Recommendation> recommend(const UserModel& model, std::span<const Candidate> candidates,
                                             std::optional<double> threshold = std::nullopt) {
  const double t = threshold.value_or(model.threshold);
  std::vector<Recommendation> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const double s = score(model, c.features);
    out.push_back({c.item_id, s, s >= t});
  }
  std::ranges::sort(out, [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  });
  return out;
}

inline std::vector<Candidate> candidates_from(const FeatureMatrix& f) {
  std::vector<Candidate> out;
  for (std::size_t r = 0; r < f.n_items(); ++r) {
    auto row = f.values.row(r);
    out.push_back({f.item_ids[r], Vector(row.begin(), row.end())});
  }
  return out;
}

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// `item_id,score,recommended` table.
inline void write_recommendations(std::ostream& out, std::span<const Recommendation> recs) {
  out << "item_id,score,recommended\n";
  for (const auto& r : recs) out << r.item_id << ',' << format_shortest(r.score) << ',' << (r.recommended ? "yes" : "no") << '\n';
}

// ---------------------------------------------------------------------------
// Model files: JSON with every double written as a hexadecimal float.
// ---------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

class ModelFormatError : public Error {
 public:
  enum class Kind { version_mismatch, corrupt, shape };

  ModelFormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline std::string format_hex(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::abs(v), std::chars_format::hex);
  return std::string(std::signbit(v) ? "-0x" : "0x") + std::string(buf, ptr);
}

inline double parse_hex(std::string_view s) {
  const bool negative = !s.empty() && s.front() == '-';
  if (negative) s.remove_prefix(1);
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) {
    throw ModelFormatError(ModelFormatError::Kind::corrupt, "malformed hex float '" + std::string(s) + "'");
  }
  s.remove_prefix(2);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ModelFormatError(ModelFormatError::Kind::corrupt, "malformed hex float '" + std::string(s) + "'");
  }
  return negative ? -v : v;
}

namespace detail {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json values = json::array();
  for (double v : m.values()) values.push_back(format_hex(v));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

inline Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& values = j.at("values");
  if (rows == 0 || cols == 0 || values.size() != rows * cols) {
    throw ModelFormatError(ModelFormatError::Kind::shape, "matrix declares " + Matrix::shape_string(rows, cols) +
                                                              " but holds " + std::to_string(values.size()) +
                                                              " values");
  }
  std::vector<double> entries;
  entries.reserve(values.size());
  for (const auto& v : values) entries.push_back(parse_hex(v.get<std::string>()));
  return Matrix(rows, cols, std::move(entries));
}

inline json read_document(std::istream& in, std::string_view expected_kind) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelFormatError(ModelFormatError::Kind::corrupt, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "pcf-model") {
      throw ModelFormatError(ModelFormatError::Kind::corrupt, "not a model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFormatError(ModelFormatError::Kind::version_mismatch,
                             "model file version " + std::to_string(version) + ", expected " +
                                 std::to_string(kModelFormatVersion));
    }
    if (doc.at("kind").get<std::string>() != expected_kind) {
      throw ModelFormatError(ModelFormatError::Kind::corrupt, "model file holds a '" +
                                                                  doc.at("kind").get<std::string>() + "' model, expected '" +
                                                                  std::string(expected_kind) + "'");
    }
  } catch (const json::exception& e) {
    throw ModelFormatError(ModelFormatError::Kind::corrupt, std::string("model file header: ") + e.what());
  }
  return doc;
}

template <class Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ModelFormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw ModelFormatError(ModelFormatError::Kind::corrupt, std::string("model file: ") + e.what());
  } catch (const DimensionError& e) {
    throw ModelFormatError(ModelFormatError::Kind::shape, e.what());
  } catch (const Error& e) {
    throw ModelFormatError(ModelFormatError::Kind::corrupt, e.what());
  }
}

}  // namespace detail

inline void save_model(const UserModel& m, std::ostream& out) {
  using detail::json;
  json stats = json::array();
  for (const auto& c : m.stats.columns) {
    stats.push_back({{"mean", format_hex(c.mean)},
                     {"min", format_hex(c.min)},
                     {"max", format_hex(c.max)},
                     {"stddev", format_hex(c.stddev)},
                     {"max_abs", format_hex(c.max_abs)}});
  }
  json weights = json::array();
  for (const auto& w : m.net.weights) weights.push_back(detail::matrix_to_json(w));
  const TrainConfig& c = m.meta.config;
  json doc = {
      {"format", "pcf-model"},
      {"version", kModelFormatVersion},
      {"kind", "perceptron"},
      {"user_id", m.user_id},
      {"topology", m.net.topology.layers},
      {"activation", to_string(m.net.hidden)},
      {"bias", m.net.bias},
      {"threshold", format_hex(m.threshold)},
      {"rating_threshold", format_hex(m.rating_threshold)},
      {"stats", {{"method", to_string(m.stats.method)}, {"columns", std::move(stats)}}},
      {"weights", std::move(weights)},
      {"training",
       {{"seed", c.seed},
        {"alpha", format_hex(c.alpha)},
        {"lambda", format_hex(c.lambda)},
        {"mode", to_string(c.mode)},
        {"batch_size", c.batch_size},
        {"epochs", c.epochs},
        {"init_bound", format_hex(c.init_bound)},
        {"paper_literal_backprop", c.paper_literal_backprop},
        {"final_cost", format_hex(m.meta.final_cost)},
        {"single_class", m.meta.single_class}}},
  };
  out << doc.dump(1) << '\n';
}

inline UserModel load_model(std::istream& in) {
  const auto doc = detail::read_document(in, "perceptron");
  return detail::guarded([&] {
    UserModel m;
    m.user_id = doc.at("user_id").get<std::string>();
    m.net.topology = Topology(doc.at("topology").get<std::vector<std::size_t>>());
    m.net.hidden = parse_activation(doc.at("activation").get<std::string>());
    m.net.bias = doc.at("bias").get<bool>();
    for (const auto& w : doc.at("weights")) m.net.weights.push_back(detail::matrix_from_json(w));
    m.net.validate();
    m.threshold = parse_hex(doc.at("threshold").get<std::string>());
    m.rating_threshold = parse_hex(doc.at("rating_threshold").get<std::string>());

    const auto& stats = doc.at("stats");
    m.stats.method = parse_preprocessing(stats.at("method").get<std::string>());
    for (const auto& c : stats.at("columns")) {
      m.stats.columns.push_back({parse_hex(c.at("mean").get<std::string>()), parse_hex(c.at("min").get<std::string>()),
                                 parse_hex(c.at("max").get<std::string>()), parse_hex(c.at("stddev").get<std::string>()),
                                 parse_hex(c.at("max_abs").get<std::string>())});
    }
    if (m.stats.columns.size() != m.net.topology.inputs()) {
      throw ModelFormatError(ModelFormatError::Kind::shape,
                             "model has statistics for " + std::to_string(m.stats.columns.size()) +
                                 " features but the network takes " + std::to_string(m.net.topology.inputs()));
    }

    const auto& t = doc.at("training");
    TrainConfig& c = m.meta.config;
    c.seed = t.at("seed").get<std::uint64_t>();
    c.alpha = parse_hex(t.at("alpha").get<std::string>());
    c.lambda = parse_hex(t.at("lambda").get<std::string>());
    c.mode = parse_descent_mode(t.at("mode").get<std::string>());
    c.batch_size = t.at("batch_size").get<std::size_t>();
    c.epochs = t.at("epochs").get<std::size_t>();
    c.init_bound = parse_hex(t.at("init_bound").get<std::string>());
    c.paper_literal_backprop = t.at("paper_literal_backprop").get<bool>();
    m.meta.final_cost = parse_hex(t.at("final_cost").get<std::string>());
    m.meta.single_class = t.at("single_class").get<bool>();
    return m;
  });
}

/// Classical factor model together with the id tables it was trained on.
struct ClassicalModel {
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  CfModel model;
};

inline void save_classical_model(const ClassicalModel& m, std::ostream& out) {
  using detail::json;
  json doc = {{"format", "pcf-model"},
              {"version", kModelFormatVersion},
              {"kind", "classical"},
              {"user_ids", m.user_ids},
              {"item_ids", m.item_ids},
              {"X", detail::matrix_to_json(m.model.X)},
              {"Theta", detail::matrix_to_json(m.model.Theta)}};
  out << doc.dump(1) << '\n';
}

inline ClassicalModel load_classical_model(std::istream& in) {
  const auto doc = detail::read_document(in, "classical");
  return detail::guarded([&] {
    ClassicalModel m;
    m.user_ids = doc.at("user_ids").get<std::vector<std::string>>();
    m.item_ids = doc.at("item_ids").get<std::vector<std::string>>();
    m.model.X = detail::matrix_from_json(doc.at("X"));
    m.model.Theta = detail::matrix_from_json(doc.at("Theta"));
    m.model.validate();
    if (m.model.X.rows() != m.item_ids.size() || m.model.Theta.rows() != m.user_ids.size()) {
      throw ModelFormatError(ModelFormatError::Kind::shape, "classical model factors do not match its id tables");
    }
    return m;
  });
}

}  // namespace pcf
