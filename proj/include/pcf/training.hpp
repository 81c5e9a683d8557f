#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pcf/error.hpp"
#include "pcf/matrix.hpp"
#include "pcf/perceptron.hpp"
#include "pcf/random.hpp"

namespace pcf {

/// Per-layer partial derivatives D^(l), shaped like the network's weights.
struct GradientSet {
  std::vector<Matrix> per_layer;

  /// All entries, layer-major then row-major.
  Vector flatten() const {
    Vector out;
    for (const auto& m : per_layer) out.insert(out.end(), m.values().begin(), m.values().end());
    return out;
  }

  bool congruent_with(const GradientSet& other) const {
    if (per_layer.size() != other.per_layer.size()) return false;
    for (std::size_t l = 0; l < per_layer.size(); ++l)
      if (!per_layer[l].same_shape(other.per_layer[l])) return false;
    return true;
  }
};

/// Draws every weight uniformly from (-bound, bound), never exactly zero and
/// never repeating a value within one layer.
inline Network random_init(const Topology& topology, double bound, std::uint64_t seed,
                           Activation hidden = Activation::sigmoid, bool bias = false) {
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ConfigError("init bound must be positive and finite");
  Network net = Network::zeros(topology, hidden, bias);
  Rng rng(seed);
  for (auto& w : net.weights) {
    std::unordered_set<double> used;
    for (double& v : w.values()) {
      double draw;
      do {
        draw = rng.uniform(-bound, bound);
      } while (draw == 0.0 || draw == -bound || !used.insert(draw).second);
      v = draw;
    }
  }
  return net;
}

/// Knobs that alter how backprop forms deltas.
struct BackpropOptions {
  /// Use a(1 - a) as the hidden-layer derivative regardless of the activation.
  bool paper_literal_derivative = false;
  /// Fault injection for verifying the checker: negate the delta of this
  /// layer (activation index 1..L-1, the last being the output layer).
  std::optional<std::size_t> negate_delta_layer;
};

/// Gradient of total_cost_regularized over `batch`:
/// D^(l) = Delta^(l) / m + (lambda / m) theta^(l), bias columns unregularized.
inline GradientSet backprop(const Network& net, std::span<const Example> batch, double lambda,
                            const BackpropOptions& opts = {}) {
  if (batch.empty()) throw Error("backprop: batch is empty");
  net.validate();
  const std::size_t last = net.topology.depth() - 1;

  GradientSet g;
  for (const auto& w : net.weights) g.per_layer.emplace_back(w.rows(), w.cols());

  Vector a_prev;
  for (const auto& e : batch) {
    const ForwardTrace t = forward(net, e.x);
    const Vector& h = t.output();
    if (e.y.size() != h.size()) {
      throw DimensionError("backprop: label has " + std::to_string(e.y.size()) + " entries, network has " +
                           std::to_string(h.size()) + " outputs");
    }
    Vector delta(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) delta[k] = h[k] - e.y[k];
    if (opts.negate_delta_layer == last)
      for (double& d : delta) d = -d;

    for (std::size_t l = last; l >= 1; --l) {
      const Matrix& w = net.weights[l - 1];
      a_prev = t.activations[l - 1];
      if (net.bias) a_prev.push_back(1.0);
      add_outer(g.per_layer[l - 1], delta, a_prev);
      if (l == 1) break;

      Vector back = matvec_transposed(w, delta);
      if (net.bias) back.pop_back();
      const Vector& a = t.activations[l - 1];
      const Vector& z = t.pre_activations[l - 1];
      for (std::size_t k = 0; k < back.size(); ++k) {
        back[k] *= opts.paper_literal_derivative ? a[k] * (1.0 - a[k]) : activate_derivative(net.hidden, a[k], z[k]);
      }
      if (opts.negate_delta_layer == l - 1)
        for (double& d : back) d = -d;
      delta = std::move(back);
    }
  }

  const double m = static_cast<double>(batch.size());
  for (std::size_t l = 0; l < g.per_layer.size(); ++l) {
    Matrix& d = g.per_layer[l];
    const Matrix& w = net.weights[l];
    const std::size_t regularized_cols = net.bias ? w.cols() - 1 : w.cols();
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (std::size_t j = 0; j < d.cols(); ++j) {
        d(i, j) /= m;
        if (j < regularized_cols) d(i, j) += lambda / m * w(i, j);
      }
    }
  }
  return g;
}

/// Central differences of `cost` with respect to each entry of `params`,
/// one entry perturbed at a time and restored afterwards.
template <class Cost>
Vector central_difference(std::span<double> params, Cost&& cost, double gamma) {
  Vector out(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    const double up = saved + gamma;
    const double down = saved - gamma;
    params[k] = up;
    const double c_up = cost();
    params[k] = down;
    const double c_down = cost();
    params[k] = saved;
    // Divide by the representable step, not the nominal 2 * gamma.
    out[k] = (c_up - c_down) / (up - down);
  }
  return out;
}

/// Finite-difference estimate of the gradient of total_cost_regularized.
inline GradientSet numerical_gradient(const Network& net, std::span<const Example> examples, double lambda,
                                      double gamma = 1e-7) {
  if (!(gamma > 0.0)) throw ConfigError("gradient check step must be positive");
  Network probe = net;
  GradientSet g;
  for (auto& w : probe.weights) {
    const Vector d = central_difference(w.values(), [&] { return total_cost_regularized(probe, examples, lambda); },
                                        gamma);
    g.per_layer.emplace_back(w.rows(), w.cols(), d);
  }
  return g;
}

/// ||numeric - analytic|| / (||numeric|| + ||analytic||), in [0, 1]; 0 when both vanish.
inline double gradient_check(const GradientSet& analytic, const GradientSet& numeric) {
  if (!analytic.congruent_with(numeric)) throw DimensionError("gradient_check: gradient sets differ in shape");
  const Vector a = analytic.flatten();
  const Vector n = numeric.flatten();
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff += (n[k] - a[k]) * (n[k] - a[k]);
  const double denom = std::sqrt(sum_of_squares(n)) + std::sqrt(sum_of_squares(a));
  if (denom == 0.0) return 0.0;
  return std::sqrt(diff) / denom;
}

enum class DescentMode { batch, stochastic, minibatch };

inline const char* to_string(DescentMode m) {
  switch (m) {
    case DescentMode::batch: return "batch";
    case DescentMode::stochastic: return "stochastic";
    case DescentMode::minibatch: return "minibatch";
  }
  return "batch";
}

inline DescentMode parse_descent_mode(std::string_view s) {
  if (s == "batch") return DescentMode::batch;
  if (s == "stochastic" || s == "sgd") return DescentMode::stochastic;
  if (s == "minibatch" || s == "mini-batch") return DescentMode::minibatch;
  throw ConfigError("unknown descent mode '" + std::string(s) + "'");
}

struct TrainConfig {
  double alpha = 0.5;
  double lambda = 0.0;
  DescentMode mode = DescentMode::batch;
  std::size_t batch_size = 10;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
  double init_bound = 0.12;
  bool gradcheck_once = false;
  double gradcheck_step = 1e-7;
  double gradcheck_tolerance = 1e-7;
  bool paper_literal_backprop = false;

  /// Throws ConfigError when a field is out of range for `example_count` examples.
  void validate(std::size_t example_count) const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be non-negative");
    if (!(init_bound > 0.0)) throw ConfigError("init_bound must be positive");
    if (!(gradcheck_step > 0.0)) throw ConfigError("gradcheck step must be positive");
    if (mode == DescentMode::minibatch && (batch_size < 2 || batch_size > example_count)) {
      throw ConfigError("mini-batch size " + std::to_string(batch_size) + " must lie in [2, " +
                        std::to_string(example_count) + "]");
    }
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct DescentResult {
  Network net;
  std::vector<double> cost_history;
  std::optional<double> gradcheck_epsilon;
};

/// Gradient descent in batch, stochastic or mini-batch mode. The cost after
/// each epoch is total_cost_regularized over all `examples`.
///
/// Stochastic and mini-batch steps rescale lambda by |block| / m so that each
/// step is an unbiased estimate of the full regularized gradient.
/// Shuffling is redone every epoch from (seed, epoch).
inline DescentResult descend(Network net, std::span<const Example> examples, const TrainConfig& cfg) {
  if (examples.empty()) throw Error("descend: no training examples");
  cfg.validate(examples.size());
  net.validate();

  DescentResult result;
  const std::size_t m = examples.size();
  const BackpropOptions opts{cfg.paper_literal_backprop, std::nullopt};
  bool first_gradient = true;

  std::vector<Example> block;
  auto step = [&](std::span<const Example> batch) {
    const double lambda = cfg.lambda * static_cast<double>(batch.size()) / static_cast<double>(m);
    const GradientSet g = backprop(net, batch, lambda, opts);
    if (first_gradient && cfg.gradcheck_once) {
      const double eps = gradient_check(g, numerical_gradient(net, batch, lambda, cfg.gradcheck_step));
      result.gradcheck_epsilon = eps;
      if (!(eps <= cfg.gradcheck_tolerance)) {
        throw GradientCheckError("gradient check failed: epsilon " + std::to_string(eps) + " exceeds tolerance " +
                                     std::to_string(cfg.gradcheck_tolerance),
                                 eps);
      }
    }
    first_gradient = false;
    for (std::size_t l = 0; l < net.weights.size(); ++l) net.weights[l] = axpy(-cfg.alpha, g.per_layer[l], net.weights[l]);
  };

  std::vector<std::size_t> order(m);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.mode == DescentMode::batch) {
      step(examples);
    } else {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(derive_seed(cfg.seed, SeedStream::shuffle, epoch));
      rng.shuffle(std::span<std::size_t>(order));
      const std::size_t b = cfg.mode == DescentMode::stochastic ? 1 : cfg.batch_size;
      for (std::size_t start = 0; start < m; start += b) {
        block.clear();
        for (std::size_t k = start; k < std::min(start + b, m); ++k) block.push_back(examples[order[k]]);
        step(block);
      }
    }
    const double cost = total_cost_regularized(net, examples, cfg.lambda);
    if (!std::isfinite(cost)) {
      throw DivergenceError("descent diverged: cost is not finite at epoch " + std::to_string(epoch), epoch);
    }
    for (const auto& w : net.weights)
      for (double v : w.values())
        if (!std::isfinite(v)) throw DivergenceError("descent diverged: weights not finite at epoch " + std::to_string(epoch), epoch);
    result.cost_history.push_back(cost);
  }
  result.net = std::move(net);
  return result;
}

/// random_init from (cfg.seed, init stream) followed by descend.
inline DescentResult train_network(const Topology& topology, Activation hidden, bool bias,
                                   std::span<const Example> examples, const TrainConfig& cfg) {
  Network net = random_init(topology, cfg.init_bound, derive_seed(cfg.seed, SeedStream::init), hidden, bias);
  return descend(std::move(net), examples, cfg);
}

}  // namespace pcf
