// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pcf/classical_cf.hpp"
#include "pcf/cli.hpp"
#include "pcf/dataset.hpp"
#include "pcf/recommender.hpp"
#include "pcf/synthetic.hpp"
#include "pcf/training.hpp"
#include "pcf/tuning.hpp"
#include "support.hpp"

namespace {

using namespace pcf;
namespace fs = std::filesystem;
using testing::data_path;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double squared_weights(const Network& net) {
  double s = 0.0;
  for (const auto& w : net.weights) s += sum_of_squares(w.values());
  return s;
}

double accuracy(const Network& net, const std::vector<Example>& ex) {
  std::size_t ok = 0;
  for (const auto& e : ex) ok += ((predict(net, e.x)[0] >= 0.5) == (e.y[0] >= 0.5)) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(ex.size());
}

Outcome gradient_check_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto suite = testing::gradcheck_suite();
  double worst = 0.0;
  for (const auto& c : suite) worst = std::max(worst, testing::check_case(c));
  const double secs = seconds_since(t0);
  return {suite.size() >= 20 && worst <= 1e-7 && secs < 5.0,
          std::to_string(suite.size()) + " cases, max eps " + num(worst) + ", " + num(secs) + " s"};
}

Outcome mutation_sensitivity() {
  double least = INFINITY;
  std::size_t mutants = 0;
  for (const auto& c : testing::gradcheck_suite()) {
    for (std::size_t layer = 1; layer < c.net.topology.depth(); ++layer) {
      least = std::min(least, testing::check_case(c, {false, layer}));
      ++mutants;
    }
  }
  return {least > 1e-3, std::to_string(mutants) + " mutants, min eps " + num(least)};
}

double cf_cost_loop(const CfModel& m, const RatingsDataset& d, double lambda) {
  double sum = 0.0, reg = 0.0;
  for (std::size_t i = 0; i < d.n_items(); ++i)
    for (std::size_t j = 0; j < d.n_users(); ++j)
      if (d.rated(i, j)) {
        double p = 0.0;
        for (std::size_t k = 0; k < m.latent(); ++k) p += m.Theta(j, k) * m.X(i, k);
        sum += (p - *d.rating(i, j)) * (p - *d.rating(i, j));
      }
  for (double v : m.X.values()) reg += v * v;
  for (double v : m.Theta.values()) reg += v * v;
  return sum / 2 + lambda / 2 * reg;
}

Outcome cf_gradient_oracle() {
  Rng rng(17);
  double worst = 0.0;
  const int instances = 50;
  for (int trial = 0; trial < instances; ++trial) {
    RatingsDataset d;
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t i = 0; i < 3; ++i)
        if (i == 0 || j == 0 || rng.uniform01() < 0.7) d.add("u" + std::to_string(j), "i" + std::to_string(i), 1 + rng.below(5));
    CfModel m{Matrix(3, 2), Matrix(4, 2)};
    for (double& v : m.X.values()) v = rng.uniform(-1, 1);
    for (double& v : m.Theta.values()) v = rng.uniform(-1, 1);
    const double lambda = trial % 2 ? 0.0 : rng.uniform(0.1, 2.0);
    const auto g = cf_gradients(m, d, lambda);
    const double h = 1e-6;
    auto fd = [&](Matrix& p) {
      Matrix out(p.rows(), p.cols());
      for (std::size_t k = 0; k < p.values().size(); ++k) {
        const double saved = p.values()[k];
        p.values()[k] = saved + h;
        const double up = cf_cost_loop(m, d, lambda);
        p.values()[k] = saved - h;
        const double down = cf_cost_loop(m, d, lambda);
        p.values()[k] = saved;
        out.values()[k] = (up - down) / (2 * h);
      }
      return out;
    };
    const Matrix nx = fd(m.X), nt = fd(m.Theta);
    for (auto [a, n] : {std::pair{&g.dX, &nx}, {&g.dTheta, &nt}}) {
      const double rel = frobenius_norm(axpy(-1.0, *a, *n)) / std::max(frobenius_norm(*a) + frobenius_norm(*n), 1e-300);
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-6, std::to_string(instances) + " instances, max relative error " + num(worst)};
}

struct ToyData {
  RatingsDataset ratings;
  FeatureMatrix features;
};

ToyData load_toy() {
  std::ifstream r(data_path("toy/ratings.csv")), f(data_path("toy/features.csv"));
  ToyData t;
  t.ratings = load_ratings(r);
  t.features = load_features(f, t.ratings);
  return t;
}

bool hidden_units_identical(const Matrix& w) {
  for (std::size_t i = 1; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (w(i, j) != w(0, j)) return false;
  return true;
}

Outcome symmetry_breaking() {
  // u01 of the toy corpus, first two normalized features, so the network is [2,3,1].
  const ToyData toy = load_toy();
  const FeatureMatrix x = mean_normalize(toy.features);
  auto examples = build_user_examples(toy.ratings, require_user(toy.ratings, "u01"), binarize(toy.ratings, 3.0), x);
  for (auto& e : examples) e.x.resize(2);

  TrainConfig cfg;
  cfg.alpha = 1.0;
  cfg.lambda = 0.1;
  cfg.epochs = 50;
  const auto zero = descend(Network::zeros({2, 3, 1}), examples, cfg);
  const Matrix& w = zero.net.weights[0];
  const bool kept = hidden_units_identical(w) && w(0, 0) != 0.0;

  cfg.epochs = 1;
  const auto random = descend(random_init({2, 3, 1}, 0.12, 42), examples, cfg);
  const bool broken = !hidden_units_identical(random.net.weights[0]);
  return {kept && broken, std::string("zero init: hidden units ") + (kept ? "identical" : "differ") +
                              " after 50 epochs; random init: " + (broken ? "differ" : "identical") + " after 1"};
}

Outcome regularization_monotonicity() {
  const auto ex = synthetic::separable_examples(60, 2, 15);
  std::vector<double> norms, costs;
  for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
    TrainConfig cfg;
    cfg.alpha = 0.3;
    cfg.lambda = lambda;
    cfg.epochs = 1500;
    cfg.seed = 3;
    const auto r = train_network({2, 3, 1}, Activation::sigmoid, false, ex, cfg);
    norms.push_back(squared_weights(r.net));
    costs.push_back(total_cost(r.net, ex));
  }
  bool ok = true;
  std::string detail = "sum theta^2:";
  for (std::size_t k = 0; k < norms.size(); ++k) {
    detail += " " + num(norms[k]);
    if (k && !(norms[k] < norms[k - 1] && costs[k] >= costs[k - 1])) ok = false;
  }
  detail += "; cost:";
  for (double c : costs) detail += " " + num(c);
  return {ok, detail};
}

Outcome optimizer_consistency() {
  const auto ex = synthetic::separable_examples(60, 3, 12);
  TrainConfig cfg;
  cfg.alpha = 0.5;
  cfg.lambda = 5.0;
  cfg.epochs = 200;
  const Network start = random_init({3, 1}, 0.12, 4);
  const auto batch = descend(start, ex, cfg);
  const double optimum = total_cost(batch.net, ex);
  bool ok = true;
  for (std::size_t i = 1; i < batch.cost_history.size(); ++i)
    if (batch.cost_history[i] > batch.cost_history[i - 1]) ok = false;
  std::string detail = "batch " + num(optimum) + (ok ? " (monotone)" : " (NOT monotone)");
  for (auto [mode, b] : {std::pair{DescentMode::stochastic, 1}, {DescentMode::minibatch, 2}, {DescentMode::minibatch, 10}}) {
    TrainConfig c = cfg;
    c.mode = mode;
    c.batch_size = b;
    const double cost = total_cost(descend(start, ex, c).net, ex);
    const double rel = std::abs(cost - optimum) / optimum;
    if (rel > 0.05) ok = false;
    detail += ", " + std::string(to_string(mode)) + (mode == DescentMode::minibatch ? " b=" + std::to_string(b) : "") +
              " " + num(100 * rel) + "%";
  }
  return {ok, detail};
}

Outcome nonlinearity_advantage() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ex = synthetic::xor_examples(200, 2024);
  TrainConfig cfg;
  cfg.alpha = 1.0;
  cfg.epochs = 3000;
  cfg.init_bound = 0.5;
  cfg.seed = 7;
  const double deep = accuracy(train_network({2, 4, 1}, Activation::tanh, true, ex, cfg).net, ex);
  const double flat = accuracy(train_network({2, 1}, Activation::tanh, true, ex, cfg).net, ex);
  const double secs = seconds_since(t0);
  return {deep >= 0.95 && flat <= 0.80 && secs < 10.0,
          "[2,4,1] " + num(deep) + ", [2,1] " + num(flat) + " training accuracy, " + num(secs) + " s"};
}

Outcome preprocessing_exactness() {
  Rng rng(23);
  double worst_mean = 0.0, worst_std = 0.0;
  bool replay = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 3 + rng.below(40), cols = 1 + rng.below(5);
    FeatureMatrix f{{}, Matrix(rows, cols), std::nullopt};
    for (std::size_t r = 0; r < rows; ++r) f.item_ids.push_back("i" + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) {
      const double offset = rng.uniform(-50, 50), spread = rng.uniform(0.1, 20);
      for (std::size_t r = 0; r < rows; ++r) f.values(r, c) = offset + spread * rng.uniform01();
    }
    const auto norm = mean_normalize(f);
    const auto stdz = mean_standardize(f);
    for (std::size_t c = 0; c < cols; ++c) {
      double mn = 0, ms = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        mn += norm.values(r, c);
        ms += stdz.values(r, c);
      }
      mn /= rows;
      ms /= rows;
      double var = 0;
      for (std::size_t r = 0; r < rows; ++r) var += (stdz.values(r, c) - ms) * (stdz.values(r, c) - ms);
      worst_mean = std::max({worst_mean, std::abs(mn), std::abs(ms)});
      worst_std = std::max(worst_std, std::abs(std::sqrt(var / rows) - 1.0));
    }
    for (const auto& p : {norm, stdz, feature_scale(f)})
      if (!(apply_stats(f, *p.stats).values == p.values)) replay = false;
  }
  return {worst_mean <= 1e-12 && worst_std <= 1e-12 && replay,
          "max |mean| " + num(worst_mean) + ", max |std-1| " + num(worst_std) + ", replay " +
              (replay ? "bit-exact" : "differs")};
}

bool same_trials(const std::vector<TrialResult>& a, const std::vector<TrialResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].index != b[i].index || !(a[i].config == b[i].config) || a[i].train_cost != b[i].train_cost ||
        a[i].validation_cost != b[i].validation_cost || a[i].diverged != b[i].diverged)
      return false;
  return true;
}

Outcome tuning_determinism() {
  const auto split = holdout_split(synthetic::separable_examples(50, 3, 1), 0.8, 1);
  SearchSpace s;
  s.alpha_values = {0.3, 1.0};
  s.lambda_values = {0.0, 0.1, 1.0};
  s.batch_sizes = {10};
  s.fixed.epochs = 60;
  s.fixed.seed = 5;
  const Topology t{3, 2, 1};
  const auto grid = grid_search(s, split, t);
  const bool six = grid.size() == 6;
  const bool replay = same_trials(random_search(s, 8, 11, split, t), random_search(s, 8, 11, split, t, 4));
  const auto& best = grid.front();
  const auto fit = train_network(t, s.hidden, s.bias, split.train, best.config);
  const bool reproduced = total_cost(fit.net, split.validation) == best.validation_cost;
  return {six && replay && reproduced, std::to_string(grid.size()) + " grid trials, random replay " +
                                           (replay ? "identical" : "differs") + ", best retrain " +
                                           (reproduced ? "exact" : "differs")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "pcf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  return code;
}

// Trains every toy user and scores the candidates for each; returns the concatenated artefacts.
std::string toy_end_to_end(const fs::path& dir, bool& ok) {
  const std::string cfg = data_path("toy/config.txt");
  const std::string models = (dir / "models").string();
  std::string text;
  ok = run_cli({"--config", cfg, "--quiet", "--seed", "42", "--model-dir", models, "train"}, &text) == 0;
  std::string all = text;
  for (int u = 1; u <= 10 && ok; ++u) {
    const std::string id = (u < 10 ? "u0" : "u") + std::to_string(u);
    all += slurp(fs::path(models) / (id + ".model"));
    ok = run_cli({"--config", cfg, "--quiet", "--seed", "42", "--model-dir", models, "--user", id, "recommend"},
                 &text) == 0;
    all += text;
  }
  return all;
}

Outcome end_to_end_reproducibility() {
  const fs::path base = fs::temp_directory_path() / "pcf-acceptance";
  fs::remove_all(base);
  bool ok_a = false, ok_b = false;
  const std::string a = toy_end_to_end(base / "a", ok_a);
  const std::string b = toy_end_to_end(base / "b", ok_b);
  fs::remove_all(base);
  const bool same = ok_a && ok_b && a == b;
  return {same, "10 models + 10 recommendation tables, " + std::to_string(a.size()) + " bytes, " +
                    (same ? "byte-identical" : "differ or failed")};
}

Outcome sigmoid_only_derivative_contract() {
  std::string out;
  const int code = run_cli({"--config", data_path("toy/config.txt"), "--quiet", "--activation", "relu",
                            "--paper-literal-backprop", "gradcheck"},
                           &out);
  std::string eps;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);)
    if (line.rfind("epsilon ", 0) == 0) eps = line.substr(8);
  return {code == 2, "exit " + std::to_string(code) + ", epsilon " + eps};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient-check suite", gradient_check_suite},
      {"mutation sensitivity", mutation_sensitivity},
      {"classical gradient oracle", cf_gradient_oracle},
      {"symmetry breaking", symmetry_breaking},
      {"regularization monotonicity", regularization_monotonicity},
      {"optimizer consistency", optimizer_consistency},
      {"nonlinearity advantage", nonlinearity_advantage},
      {"preprocessing exactness", preprocessing_exactness},
      {"tuning determinism", tuning_determinism},
      {"end-to-end reproducibility", end_to_end_reproducibility},
      {"sigmoid-only derivative, relu", sigmoid_only_derivative_contract},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-30s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
