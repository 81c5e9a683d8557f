#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcf/error.hpp"
#include "pcf/parallel.hpp"
#include "pcf/perceptron.hpp"
#include "pcf/random.hpp"
#include "pcf/training.hpp"

namespace pcf {

/// Grid over (alpha, lambda, b). Everything else comes from `fixed`.
struct SearchSpace {
  std::vector<double> alpha_values;
  std::vector<double> lambda_values;
  std::vector<std::size_t> batch_sizes;
  TrainConfig fixed;
  Activation hidden = Activation::sigmoid;
  bool bias = false;

  std::size_t cell_count() const { return alpha_values.size() * lambda_values.size() * batch_sizes.size(); }

  /// Cell `index` in alpha-major, then lambda, then b order.
  TrainConfig cell(std::size_t index) const {
    TrainConfig c = fixed;
    const std::size_t nb = batch_sizes.size();
    const std::size_t nl = lambda_values.size();
    c.batch_size = batch_sizes[index % nb];
    c.lambda = lambda_values[(index / nb) % nl];
    c.alpha = alpha_values[index / (nb * nl)];
    return c;
  }

  void validate(std::size_t train_count) const {
    if (alpha_values.empty() || lambda_values.empty() || batch_sizes.empty()) {
      throw ConfigError("search space has an empty dimension");
    }
    for (std::size_t i = 0; i < cell_count(); ++i) cell(i).validate(train_count);
  }
};

template <class T>
struct Split {
  std::vector<T> train;
  std::vector<T> validation;
};

/// Seeded shuffle, then the first round(fraction * n) items train.
template <class T>
Split<T> holdout_split(std::vector<T> items, double fraction, std::uint64_t seed) {
  if (items.size() < 2) throw ConfigError("holdout split needs at least 2 items, got " + std::to_string(items.size()));
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("holdout fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(items.size())));
  if (n_train == 0 || n_train >= items.size()) {
    throw ConfigError("holdout fraction " + std::to_string(fraction) + " leaves an empty side for " +
                      std::to_string(items.size()) + " items");
  }
  items = shuffle_examples(std::move(items), seed);
  Split<T> s;
  s.train.assign(std::make_move_iterator(items.begin()), std::make_move_iterator(items.begin() + n_train));
  s.validation.assign(std::make_move_iterator(items.begin() + n_train), std::make_move_iterator(items.end()));
  return s;
}

struct TrialResult {
  std::size_t index = 0;
  TrainConfig config;
  double train_cost = std::numeric_limits<double>::infinity();
  double validation_cost = std::numeric_limits<double>::infinity();
  bool diverged = false;
  /// 1-based position among non-diverged trials; 0 for diverged ones.
  std::size_t rank = 0;
};

/// Trains one configuration and scores it with the unregularized cost.
inline TrialResult run_trial(std::size_t index, const TrainConfig& cfg, const Topology& topology, Activation hidden,
                             bool bias, const Split<Example>& data) {
  TrialResult r;
  r.index = index;
  r.config = cfg;
  try {
    const DescentResult fit = train_network(topology, hidden, bias, data.train, cfg);
    r.train_cost = total_cost(fit.net, data.train);
    r.validation_cost = total_cost(fit.net, data.validation);
    r.diverged = !std::isfinite(r.train_cost) || !std::isfinite(r.validation_cost);
  } catch (const DivergenceError&) {
    r.diverged = true;
  }
  if (r.diverged) {
    r.train_cost = r.validation_cost = std::numeric_limits<double>::infinity();
  }
  return r;
}

/// Orders by validation cost (ties by trial index), diverged trials last.
inline void rank_trials(std::vector<TrialResult>& trials) {
  std::stable_sort(trials.begin(), trials.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.diverged != b.diverged) return !a.diverged;
    if (!a.diverged && a.validation_cost != b.validation_cost) return a.validation_cost < b.validation_cost;
    return a.index < b.index;
  });
  std::size_t rank = 0;
  for (auto& t : trials) t.rank = t.diverged ? 0 : ++rank;
}

namespace detail {

inline void check_split(const Split<Example>& data) {
  if (data.train.empty()) throw ConfigError("training side of the split is empty");
  if (data.validation.empty()) throw ConfigError("validation side of the split is empty");
}

}  // namespace detail

/// Every cell of the grid once; trial i is seeded from (fixed.seed, i).
inline std::vector<TrialResult> grid_search(const SearchSpace& space, const Split<Example>& data,
                                            const Topology& topology, std::size_t jobs = 1) {
  detail::check_split(data);
  space.validate(data.train.size());
  auto trials = parallel_map<TrialResult>(space.cell_count(), jobs, [&](std::size_t i) {
    TrainConfig cfg = space.cell(i);
    cfg.seed = derive_seed(space.fixed.seed, SeedStream::trial, i);
    return run_trial(i, cfg, topology, space.hidden, space.bias, data);
  });
  rank_trials(trials);
  return trials;
}

/// n_trials cells drawn uniformly with replacement using `seed`.
inline std::vector<TrialResult> random_search(const SearchSpace& space, std::size_t n_trials, std::uint64_t seed,
                                              const Split<Example>& data, const Topology& topology,
                                              std::size_t jobs = 1) {
  if (n_trials == 0) throw ConfigError("random search needs at least one trial");
  detail::check_split(data);
  space.validate(data.train.size());
  Rng rng(derive_seed(seed, SeedStream::sampling));
  std::vector<std::size_t> cells(n_trials);
  for (auto& c : cells) c = static_cast<std::size_t>(rng.below(space.cell_count()));
  auto trials = parallel_map<TrialResult>(n_trials, jobs, [&](std::size_t i) {
    TrainConfig cfg = space.cell(cells[i]);
    cfg.seed = derive_seed(space.fixed.seed, SeedStream::trial, i);
    return run_trial(i, cfg, topology, space.hidden, space.bias, data);
  });
  rank_trials(trials);
  return trials;
}

/// One line per trial in rank order:
/// trial alpha lambda b train_cost validation_cost diverged
inline void write_trial_table(std::ostream& out, std::span<const TrialResult> trials) {
  out << "# trial alpha lambda b train_cost validation_cost diverged\n";
  char buf[256];
  for (const auto& t : trials) {
    std::snprintf(buf, sizeof buf, "%zu %.10g %.10g %zu %.10g %.10g %d\n", t.index, t.config.alpha, t.config.lambda,
                  t.config.batch_size, t.train_cost, t.validation_cost, t.diverged ? 1 : 0);
    out << buf;
  }
}

}  // namespace pcf
