#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "pcf/dataset.hpp"
#include "pcf/error.hpp"
#include "pcf/matrix.hpp"
#include "pcf/perceptron.hpp"
#include "pcf/random.hpp"

namespace pcf {

/// Jointly learned item features X (n_m x n) and user parameters Theta (n_u x n).
struct CfModel {
  Matrix X;
  Matrix Theta;

  std::size_t latent() const noexcept { return X.cols(); }

  void validate() const {
    if (X.cols() != Theta.cols()) {
      throw DimensionError("classical model: item features " + X.shape() + " and user parameters " + Theta.shape() +
                           " disagree on latent size");
    }
    for (const Matrix* m : {&X, &Theta})
      for (double v : m->values())
        if (!std::isfinite(v)) throw Error("classical model has a non-finite entry");
  }

  friend bool operator==(const CfModel&, const CfModel&) = default;
};

struct CfConfig {
  double alpha = 0.01;
  double lambda = 0.0;
  std::size_t latent = 2;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  /// When false, X stays at the supplied features and only Theta is fitted.
  bool learn_features = true;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("classical alpha must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("classical lambda must be non-negative");
    if (latent == 0) throw ConfigError("classical latent dimension must be at least 1");
  }
};

namespace detail {

inline void check_cf_dims(const CfModel& model, const RatingsDataset& d) {
  if (model.X.rows() != d.n_items() || model.Theta.rows() != d.n_users() || model.X.cols() != model.Theta.cols()) {
    throw DimensionError("classical model X " + model.X.shape() + ", Theta " + model.Theta.shape() +
                         " does not fit " + std::to_string(d.n_items()) + " items x " + std::to_string(d.n_users()) +
                         " users");
  }
}

}  // namespace detail

/// 1/2 sum_{r(i,j)=1} (theta_j . x_i - y_ij)^2 + lambda/2 (||Theta||^2 + ||X||^2)
inline double cf_cost(const CfModel& model, const RatingsDataset& d, double lambda) {
  detail::check_cf_dims(model, d);
  double fit = 0.0;
  for (const auto& r : d.entries()) {
    const double err = dot(model.Theta.row(r.user), model.X.row(r.item)) - r.value;
    fit += err * err;
  }
  return 0.5 * fit + 0.5 * lambda * (sum_of_squares(model.Theta.values()) + sum_of_squares(model.X.values()));
}

struct CfGradients {
  Matrix dX;
  Matrix dTheta;
};

/// Exact partial derivatives of cf_cost. The regularizer contributes
/// lambda * x (not lambda / 2 * x).
inline CfGradients cf_gradients(const CfModel& model, const RatingsDataset& d, double lambda) {
  detail::check_cf_dims(model, d);
  CfGradients g{scale(lambda, model.X), scale(lambda, model.Theta)};
  const std::size_t n = model.latent();
  for (const auto& r : d.entries()) {
    auto x = model.X.row(r.item);
    auto t = model.Theta.row(r.user);
    const double err = dot(t, x) - r.value;
    auto gx = g.dX.row(r.item);
    auto gt = g.dTheta.row(r.user);
    for (std::size_t k = 0; k < n; ++k) {
      gx[k] += err * t[k];
      gt[k] += err * x[k];
    }
  }
  return g;
}

/// Uniform(-0.5, 0.5) initialization of both factors.
inline CfModel cf_init(std::size_t n_items, std::size_t n_users, std::size_t latent, std::uint64_t seed) {
  CfModel m{Matrix(n_items, latent), Matrix(n_users, latent)};
  Rng rng(derive_seed(seed, SeedStream::init));
  for (double& v : m.X.values()) v = rng.uniform(-0.5, 0.5);
  for (double& v : m.Theta.values()) v = rng.uniform(-0.5, 0.5);
  return m;
}

/// Simultaneous gradient descent on X and Theta for cfg.iters iterations.
/// With learn_features = false, `fixed_features` (n_m x n) replaces the
/// random X and is never updated.
inline CfModel cf_train(const RatingsDataset& d, const CfConfig& cfg,
                        const std::optional<Matrix>& fixed_features = std::nullopt) {
  if (d.size() == 0) throw Error("cf_train: dataset is empty");
  CfConfig effective = cfg;
  if (!cfg.learn_features) {
    if (!fixed_features) throw ConfigError("cf_train: fixed features required when features are not learned");
    effective.latent = fixed_features->cols();
  }
  effective.validate();

  CfModel model = cf_init(d.n_items(), d.n_users(), effective.latent, cfg.seed);
  if (!cfg.learn_features) {
    if (fixed_features->rows() != d.n_items()) {
      throw DimensionError("cf_train: fixed features " + fixed_features->shape() + " for " +
                           std::to_string(d.n_items()) + " items");
    }
    model.X = *fixed_features;
  }

  for (std::size_t it = 0; it < cfg.iters; ++it) {
    const CfGradients g = cf_gradients(model, d, cfg.lambda);
    if (cfg.learn_features) model.X = axpy(-cfg.alpha, g.dX, model.X);
    model.Theta = axpy(-cfg.alpha, g.dTheta, model.Theta);
    const double cost = cf_cost(model, d, cfg.lambda);
    if (!std::isfinite(cost)) {
      throw DivergenceError("classical descent diverged: cost is not finite at iteration " + std::to_string(it), it);
    }
  }
  return model;
}

/// h = sigmoid(theta . x)
inline double cf_predict(std::span<const double> theta, std::span<const double> x) {
  if (theta.size() != x.size()) {
    throw DimensionError("cf_predict: theta has " + std::to_string(theta.size()) + " entries, x has " +
                         std::to_string(x.size()));
  }
  return sigmoid(dot(theta, x));
}

}  // namespace pcf
