#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "pcf/classical_cf.hpp"
#include "pcf/dataset.hpp"
#include "pcf/error.hpp"
#include "pcf/parallel.hpp"
#include "pcf/perceptron.hpp"
#include "pcf/recommender.hpp"
#include "pcf/training.hpp"
#include "pcf/tuning.hpp"

namespace pcf::cli {

namespace fs = std::filesystem;

/// Exit codes: 0 success, 1 I/O or configuration failure, 2 verification failure.
enum ExitCode : int { kOk = 0, kFailure = 1, kVerificationFailed = 2 };

/// Everything a command needs, assembled from defaults, the config file and flags.
struct RunConfig {
  fs::path ratings;
  fs::path features;
  fs::path model_dir = "models";
  fs::path output;
  fs::path candidates;

  double rating_min = 1.0;
  double rating_max = 5.0;
  std::optional<double> rating_threshold;    // default: midpoint of the rating scale
  std::optional<double> decision_threshold;  // default 0.5; when set, overrides stored model thresholds

  RecommenderConfig rec;

  double holdout_fraction = 0.8;
  std::vector<double> tune_alpha;
  std::vector<double> tune_lambda;
  std::vector<std::size_t> tune_batch_size;
  std::size_t trials = 8;
  bool random_search = false;

  std::size_t gradcheck_samples = 10;
  CfConfig cf{0.005, 0.0, 2, 2000, 0, true};

  std::vector<std::string> users;
  bool keep_going = false;
  std::size_t jobs = 1;
  bool quiet = false;

  std::uint64_t seed() const { return rec.train.seed; }

  double effective_rating_threshold() const {
    return rating_threshold.value_or(0.5 * (rating_min + rating_max));
  }

  RecommenderConfig recommender() const {
    RecommenderConfig r = rec;
    r.rating_threshold = effective_rating_threshold();
    r.decision_threshold = decision_threshold.value_or(0.5);
    return r;
  }
};

namespace detail {

inline std::string normalize_key(std::string_view key) {
  std::string k(text::trim(key));
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

inline double to_double(const std::string& key, std::string_view v) {
  const auto d = text::parse_double(v);
  if (!d) throw ConfigError(key + ": '" + std::string(v) + "' is not a number");
  return *d;
}

inline std::uint64_t to_uint(const std::string& key, std::string_view v) {
  v = text::trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": '" + std::string(v) + "' is not a non-negative integer");
  }
  return out;
}

inline bool to_bool(const std::string& key, std::string_view v) {
  v = text::trim(v);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": '" + std::string(v) + "' is not a boolean");
}

inline std::vector<std::string_view> list_items(std::string_view v) {
  std::vector<std::string_view> out;
  v = text::trim(v);
  if (v.empty() || v == "none") return out;
  for (auto part : text::split(v, ','))
    if (!part.empty()) out.push_back(part);
  return out;
}

}  // namespace detail

/// Applies one `key = value` setting. `base` resolves relative paths.
inline void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& value,
                          const fs::path& base = {}) {
  using namespace detail;
  const std::string key = normalize_key(raw_key);
  auto path = [&] { return base.empty() ? fs::path(value) : base / fs::path(value); };
  TrainConfig& t = c.rec.train;

  if (key == "ratings") c.ratings = path();
  else if (key == "features") c.features = path();
  else if (key == "model_dir") c.model_dir = path();
  else if (key == "output") c.output = path();
  else if (key == "candidates") c.candidates = path();
  else if (key == "rating_min") c.rating_min = to_double(key, value);
  else if (key == "rating_max") c.rating_max = to_double(key, value);
  else if (key == "rating_threshold") c.rating_threshold = to_double(key, value);
  else if (key == "decision_threshold") c.decision_threshold = to_double(key, value);
  else if (key == "hidden") {
    c.rec.hidden_layers.clear();
    for (auto item : list_items(value)) {
      const auto n = to_uint(key, item);
      if (n == 0) throw ConfigError("hidden: layer sizes must be positive");
      c.rec.hidden_layers.push_back(n);
    }
  } else if (key == "activation") c.rec.hidden = parse_activation(text::trim(value));
  else if (key == "bias") c.rec.bias = to_bool(key, value);
  else if (key == "preprocess") c.rec.preprocessing = parse_preprocessing(text::trim(value));
  else if (key == "alpha") t.alpha = to_double(key, value);
  else if (key == "lambda") t.lambda = to_double(key, value);
  else if (key == "mode") t.mode = parse_descent_mode(text::trim(value));
  else if (key == "batch_size") t.batch_size = to_uint(key, value);
  else if (key == "epochs") t.epochs = to_uint(key, value);
  else if (key == "seed") t.seed = to_uint(key, value);
  else if (key == "init_bound") t.init_bound = to_double(key, value);
  else if (key == "gradcheck") {
    const auto v = text::trim(value);
    if (v == "once") t.gradcheck_once = true;
    else if (v == "off") t.gradcheck_once = false;
    else throw ConfigError("gradcheck: expected 'off' or 'once'");
  } else if (key == "gradcheck_step") t.gradcheck_step = to_double(key, value);
  else if (key == "gradcheck_tolerance") t.gradcheck_tolerance = to_double(key, value);
  else if (key == "gradcheck_samples") c.gradcheck_samples = to_uint(key, value);
  else if (key == "paper_literal_backprop") t.paper_literal_backprop = to_bool(key, value);
  else if (key == "holdout_fraction") c.holdout_fraction = to_double(key, value);
  else if (key == "tune_alpha") {
    c.tune_alpha.clear();
    for (auto item : list_items(value)) c.tune_alpha.push_back(to_double(key, item));
  } else if (key == "tune_lambda") {
    c.tune_lambda.clear();
    for (auto item : list_items(value)) c.tune_lambda.push_back(to_double(key, item));
  } else if (key == "tune_batch_size") {
    c.tune_batch_size.clear();
    for (auto item : list_items(value)) c.tune_batch_size.push_back(to_uint(key, item));
  } else if (key == "trials") c.trials = to_uint(key, value);
  else if (key == "random") c.random_search = to_bool(key, value);
  else if (key == "cf_latent") c.cf.latent = to_uint(key, value);
  else if (key == "cf_alpha") c.cf.alpha = to_double(key, value);
  else if (key == "cf_lambda") c.cf.lambda = to_double(key, value);
  else if (key == "cf_iters") c.cf.iters = to_uint(key, value);
  else if (key == "user") {
    c.users.clear();
    for (auto item : list_items(value)) c.users.emplace_back(item);
  } else if (key == "keep_going") c.keep_going = to_bool(key, value);
  else if (key == "jobs") c.jobs = to_uint(key, value);
  else if (key == "quiet") c.quiet = to_bool(key, value);
  else throw ConfigError("unknown setting '" + key + "'");
}

/// Reads `key = value` lines; '#' starts a comment line.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open config file " + p.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(p.string() + ": expected key = value", number);
    out.emplace_back(std::string(text::trim(t.substr(0, eq))), std::string(text::trim(t.substr(eq + 1))));
  }
  return out;
}

namespace detail {

inline std::ifstream open_input(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(std::string("no ") + what + " path configured");
  std::ifstream in(p);
  if (!in) throw Error(std::string("cannot read ") + what + " file " + p.string());
  return in;
}

struct Inputs {
  RatingsDataset ratings;
  FeatureMatrix features;  // rows aligned with ratings.item_ids()
};

inline Inputs load_inputs(const RunConfig& c) {
  auto rin = open_input(c.ratings, "ratings");
  Inputs in{load_ratings(rin), {}};
  auto fin = open_input(c.features, "features");
  in.features = load_features(fin, in.ratings);
  return in;
}

inline std::vector<std::size_t> selected_users(const RunConfig& c, const RatingsDataset& d) {
  std::vector<std::size_t> out;
  if (c.users.empty()) {
    for (std::size_t j = 0; j < d.n_users(); ++j) out.push_back(j);
    return out;
  }
  for (const auto& id : c.users) {
    if (!d.user_index(id)) throw ColdUserError("user '" + id + "' has no ratings in " + c.ratings.string());
    out.push_back(require_user(d, id));
  }
  return out;
}

/// The first --user, or the first user of the ratings file.
inline std::size_t single_user(const RunConfig& c, const RatingsDataset& d) { return selected_users(c, d).front(); }

class Log {
 public:
  Log(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
  void info(const std::string& msg) const {
    if (!quiet_) err_ << msg << '\n';
  }
  void error(const std::string& msg) const { err_ << "error: " << msg << '\n'; }

 private:
  std::ostream& err_;
  bool quiet_;
};

/// Writes to `path`, or to `fallback` when no path is configured.
template <class Fn>
void emit(const fs::path& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  fn(f);
}

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::vector<Example> user_examples(const RatingsDataset& d, const FeatureMatrix& processed, std::size_t user,
                                          double rating_threshold) {
  return build_user_examples(d, user, binarize(d, rating_threshold), processed);
}

}  // namespace detail

inline int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const detail::Log log(err, c.quiet);
  const auto in = detail::load_inputs(c);
  const auto users = detail::selected_users(c, in.ratings);
  const RecommenderConfig rc = c.recommender();

  struct Outcome {
    std::optional<UserModel> model;
    std::string error;
  };
  auto outcomes = parallel_map<Outcome>(users.size(), c.jobs, [&](std::size_t k) {
    try {
      return Outcome{train_user(in.ratings, in.features, users[k], rc), {}};
    } catch (const std::exception& e) {
      return Outcome{std::nullopt, e.what()};
    }
  });

  fs::create_directories(c.model_dir);
  bool failed = false;
  out << "user_id,final_cost,single_class\n";
  for (std::size_t k = 0; k < users.size(); ++k) {
    const std::string& id = in.ratings.user_ids()[users[k]];
    if (!outcomes[k].model) {
      log.error("user '" + id + "': " + outcomes[k].error);
      failed = true;
      if (!c.keep_going) return kFailure;
      continue;
    }
    const UserModel& m = *outcomes[k].model;
    const fs::path file = c.model_dir / (id + ".model");
    std::ofstream f(file, std::ios::binary);
    if (!f) throw Error("cannot write " + file.string());
    save_model(m, f);
    out << id << ',' << format_shortest(m.meta.final_cost) << ',' << (m.meta.single_class ? "yes" : "no") << '\n';
    log.info("trained " + id + " -> " + file.string());
  }
  return failed ? kFailure : kOk;
}

inline int cmd_gradcheck(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const detail::Log log(err, c.quiet);
  const auto in = detail::load_inputs(c);
  const RecommenderConfig rc = c.recommender();
  const std::size_t user = detail::single_user(c, in.ratings);
  const FeatureMatrix x = preprocess(in.features, rc.preprocessing);
  auto examples = detail::user_examples(in.ratings, x, user, rc.rating_threshold);
  examples = shuffle_examples(std::move(examples), derive_seed(c.seed(), SeedStream::sampling));
  if (c.gradcheck_samples > 0 && examples.size() > c.gradcheck_samples) examples.resize(c.gradcheck_samples);

  const Topology topology = rc.topology_for(x.n_features());
  const TrainConfig& t = rc.train;
  const Network net = random_init(topology, t.init_bound, derive_seed(c.seed(), SeedStream::init), rc.hidden, rc.bias);
  const GradientSet analytic = backprop(net, examples, t.lambda, {t.paper_literal_backprop, std::nullopt});
  const GradientSet numeric = numerical_gradient(net, examples, t.lambda, t.gradcheck_step);
  const double eps = gradient_check(analytic, numeric);
  const bool pass = eps <= t.gradcheck_tolerance;

  out << "user " << in.ratings.user_ids()[user] << "\n"
      << "topology " << topology.to_string() << "\n"
      << "activation " << to_string(rc.hidden) << (t.paper_literal_backprop ? " (paper-literal backprop)" : "") << "\n"
      << "examples " << examples.size() << "\n"
      << "epsilon " << format_shortest(eps) << "\n"
      << "tolerance " << format_shortest(t.gradcheck_tolerance) << "\n"
      << (pass ? "PASS" : "FAIL") << "\n";
  if (!pass) log.error("gradient check failed: epsilon " + format_shortest(eps));
  return pass ? kOk : kVerificationFailed;
}

inline int cmd_tune(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const detail::Log log(err, c.quiet);
  if (c.tune_alpha.empty() || c.tune_lambda.empty()) {
    throw ConfigError("tuning needs tune_alpha and tune_lambda values");
  }
  const auto in = detail::load_inputs(c);
  const RecommenderConfig rc = c.recommender();
  const std::size_t user = detail::single_user(c, in.ratings);
  const std::string& user_id = in.ratings.user_ids()[user];
  const FeatureMatrix x = preprocess(in.features, rc.preprocessing);
  const auto split = holdout_split(detail::user_examples(in.ratings, x, user, rc.rating_threshold),
                                   c.holdout_fraction, derive_seed(c.seed(), SeedStream::split, hash_string(user_id)));

  SearchSpace space;
  space.alpha_values = c.tune_alpha;
  space.lambda_values = c.tune_lambda;
  space.batch_sizes = c.tune_batch_size.empty() ? std::vector<std::size_t>{rc.train.batch_size} : c.tune_batch_size;
  space.fixed = rc.train;
  space.hidden = rc.hidden;
  space.bias = rc.bias;
  const Topology topology = rc.topology_for(x.n_features());

  log.info("tuning user " + user_id + " on " + std::to_string(split.train.size()) + " train / " +
           std::to_string(split.validation.size()) + " validation examples");
  const auto trials = c.random_search ? random_search(space, c.trials, c.seed(), split, topology, c.jobs)
                                      : grid_search(space, split, topology, c.jobs);
  detail::emit(c.output, out, [&](std::ostream& o) { write_trial_table(o, trials); });

  if (trials.front().diverged) {
    out << "# best none (every trial diverged)\n";
  } else {
    const TrialResult& best = trials.front();
    out << "# best trial=" << best.index << " alpha=" << format_shortest(best.config.alpha)
        << " lambda=" << format_shortest(best.config.lambda) << " batch_size=" << best.config.batch_size
        << " mode=" << to_string(best.config.mode) << " epochs=" << best.config.epochs << " seed=" << best.config.seed
        << " validation_cost=" << format_shortest(best.validation_cost) << "\n";
  }
  return kOk;
}

inline int cmd_recommend(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const detail::Log log(err, c.quiet);
  if (c.users.empty()) throw ConfigError("recommend needs --user");
  const fs::path file = c.model_dir / (c.users.front() + ".model");
  auto min = detail::open_input(file, "model");
  const UserModel model = load_model(min);
  auto cin = detail::open_input(c.candidates, "candidates");
  const auto candidates = candidates_from(load_features(cin));
  const auto recs = recommend(model, candidates, c.decision_threshold);
  detail::emit(c.output, out, [&](std::ostream& o) { write_recommendations(o, recs); });
  log.info(std::to_string(recs.size()) + " candidates scored for " + model.user_id);
  return kOk;
}

/// Accuracy and mean cross-entropy of 0/1 decisions.
struct Score {
  std::size_t correct = 0;
  std::size_t total = 0;
  double cost = 0.0;

  void add(double h, double label, double threshold) {
    correct += ((h >= threshold) == (label >= 0.5)) ? 1 : 0;
    ++total;
    cost += example_cost(h, label);
  }
  void merge(const Score& o) {
    correct += o.correct;
    total += o.total;
    cost += o.cost;
  }
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  double mean_cost() const { return total ? cost / static_cast<double>(total) : 0.0; }
};

struct EvalRow {
  std::string user_id;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  Score mlp_train, mlp_validation, cf_train, cf_validation;
};

/// Per-user holdout comparison of the perceptron against the classical
/// baseline. The baseline keeps the supplied item features fixed and fits
/// user parameters to ratings centred on the rating threshold, so
/// sigmoid(theta . x) >= 0.5 exactly when the predicted rating reaches it.
inline std::vector<EvalRow> evaluate(const RunConfig& c) {
  const auto in = detail::load_inputs(c);
  const RecommenderConfig rc = c.recommender();
  const auto users = detail::selected_users(c, in.ratings);
  const FeatureMatrix x = preprocess(in.features, rc.preprocessing);
  const Topology topology = rc.topology_for(x.n_features());
  const double t = rc.decision_threshold;

  struct UserSplit {
    std::vector<Rating> train, validation;
  };
  std::vector<UserSplit> splits;
  for (auto j : users) {
    const auto& id = in.ratings.user_ids()[j];
    auto s = holdout_split(in.ratings.ratings_of_user(j), c.holdout_fraction,
                           derive_seed(c.seed(), SeedStream::split, hash_string(id)));
    splits.push_back({std::move(s.train), std::move(s.validation)});
  }

  auto to_example = [&](const Rating& r) {
    auto row = x.values.row(r.item);
    return Example{Vector(row.begin(), row.end()),
                   Vector{static_cast<double>(binarize_rating(r.value, rc.rating_threshold))}};
  };

  auto rows = parallel_map<EvalRow>(users.size(), c.jobs, [&](std::size_t k) {
    EvalRow row;
    row.user_id = in.ratings.user_ids()[users[k]];
    std::vector<Example> train, validation;
    for (const auto& r : splits[k].train) train.push_back(to_example(r));
    for (const auto& r : splits[k].validation) validation.push_back(to_example(r));
    row.n_train = train.size();
    row.n_validation = validation.size();
    TrainConfig cfg = rc.train;
    cfg.seed = user_seed(rc.train.seed, row.user_id);
    const Network net = train_network(topology, rc.hidden, rc.bias, train, cfg).net;
    for (const auto& e : train) row.mlp_train.add(predict(net, e.x)[0], e.y[0], t);
    for (const auto& e : validation) row.mlp_validation.add(predict(net, e.x)[0], e.y[0], t);
    return row;
  });

  // Classical baseline over the training side of every selected user.
  RatingsDataset train_side;
  for (std::size_t k = 0; k < users.size(); ++k)
    for (const auto& r : splits[k].train)
      train_side.add(in.ratings.user_ids()[r.user], in.ratings.item_ids()[r.item], r.value - rc.rating_threshold);
  CfConfig cf = c.cf;
  cf.learn_features = false;
  cf.seed = derive_seed(c.seed(), SeedStream::init);
  const FeatureMatrix fixed = align_features(x, train_side);
  const CfModel model = cf_train(train_side, cf, fixed.values);

  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto theta = model.Theta.row(*train_side.user_index(rows[k].user_id));
    auto add = [&](Score& s, const Rating& r) {
      s.add(cf_predict(theta, x.values.row(r.item)), binarize_rating(r.value, rc.rating_threshold), t);
    };
    for (const auto& r : splits[k].train) add(rows[k].cf_train, r);
    for (const auto& r : splits[k].validation) add(rows[k].cf_validation, r);
  }
  return rows;
}

inline int cmd_eval(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const detail::Log log(err, c.quiet);
  const auto rows = evaluate(c);
  EvalRow all;
  all.user_id = "ALL";
  for (const auto& r : rows) {
    all.n_train += r.n_train;
    all.n_validation += r.n_validation;
    all.mlp_train.merge(r.mlp_train);
    all.mlp_validation.merge(r.mlp_validation);
    all.cf_train.merge(r.cf_train);
    all.cf_validation.merge(r.cf_validation);
  }
  detail::emit(c.output, out, [&](std::ostream& o) {
    o << "user_id,n_train,n_validation,mlp_train_acc,mlp_val_acc,mlp_val_cost,cf_train_acc,cf_val_acc,cf_val_cost\n";
    auto line = [&](const EvalRow& r) {
      using detail::fixed;
      o << r.user_id << ',' << r.n_train << ',' << r.n_validation << ',' << fixed(r.mlp_train.accuracy()) << ','
        << fixed(r.mlp_validation.accuracy()) << ',' << fixed(r.mlp_validation.mean_cost()) << ','
        << fixed(r.cf_train.accuracy()) << ',' << fixed(r.cf_validation.accuracy()) << ','
        << fixed(r.cf_validation.mean_cost()) << '\n';
    };
    for (const auto& r : rows) line(r);
    line(all);
  });
  log.info("evaluated " + std::to_string(rows.size()) + " users");
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Per-user perceptron collaborative filtering"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all");

  std::string config_path;
  std::map<std::string, std::string> given;
  std::vector<std::string> user_flags;

  app.add_option("--config", config_path, "key = value settings file");
  // Flags that carry a value map one-to-one onto config keys.
  const std::vector<std::pair<std::string, std::string>> valued = {
      {"--seed", "seed"},
      {"--jobs", "jobs"},
      {"--ratings", "ratings"},
      {"--features", "features"},
      {"--model-dir", "model_dir"},
      {"--output", "output"},
      {"--candidates", "candidates"},
      {"--rating-threshold", "rating_threshold"},
      {"--decision-threshold", "decision_threshold"},
      {"--hidden", "hidden"},
      {"--activation", "activation"},
      {"--preprocess", "preprocess"},
      {"--alpha", "alpha"},
      {"--lambda", "lambda"},
      {"--mode", "mode"},
      {"--batch-size", "batch_size"},
      {"--epochs", "epochs"},
      {"--init-bound", "init_bound"},
      {"--gradcheck", "gradcheck"},
      {"--tolerance", "gradcheck_tolerance"},
      {"--holdout", "holdout_fraction"},
      {"--tune-alpha", "tune_alpha"},
      {"--tune-lambda", "tune_lambda"},
      {"--tune-batch-size", "tune_batch_size"},
      {"--trials", "trials"},
  };
  std::map<std::string, std::string> flag_values;
  for (const auto& [flag, key] : valued) app.add_option(flag, flag_values[key], "sets '" + key + "'");
  const std::vector<std::pair<std::string, std::string>> switches = {
      {"--quiet", "quiet"},
      {"--paper-literal-backprop", "paper_literal_backprop"},
      {"--keep-going", "keep_going"},
      {"--random", "random"},
      {"--bias", "bias"},
  };
  std::map<std::string, bool> switch_values;
  for (const auto& [flag, key] : switches) app.add_flag(flag, switch_values[key], "sets '" + key + "'");
  app.add_option("--user", user_flags, "restrict to these users (repeatable)");

  auto* train = app.add_subcommand("train", "train one model per user and write <user>.model files");
  auto* gradcheck = app.add_subcommand("gradcheck", "compare backprop against finite differences");
  auto* tune = app.add_subcommand("tune", "grid or random hyperparameter search");
  auto* rec = app.add_subcommand("recommend", "score candidate items for a user");
  auto* eval = app.add_subcommand("eval", "holdout accuracy of the perceptron and the classical baseline");

  std::vector<std::string> args(argv + 1, argv + argc);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      const fs::path p(config_path);
      for (const auto& [k, v] : read_config_file(p)) apply_setting(cfg, k, v, p.parent_path());
    }
    for (const auto& [flag, key] : valued)
      if (app.count(flag) > 0) apply_setting(cfg, key, flag_values[key]);
    for (const auto& [flag, key] : switches)
      if (app.count(flag) > 0) apply_setting(cfg, key, "true");
    if (!user_flags.empty()) cfg.users = user_flags;

    if (train->parsed()) return cmd_train(cfg, out, err);
    if (gradcheck->parsed()) return cmd_gradcheck(cfg, out, err);
    if (tune->parsed()) return cmd_tune(cfg, out, err);
    if (rec->parsed()) return cmd_recommend(cfg, out, err);
    if (eval->parsed()) return cmd_eval(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace pcf::cli
