#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcf/error.hpp"
#include "pcf/matrix.hpp"

namespace pcf {

/// Hidden-layer nonlinearity. The output layer is always sigmoid so that
/// h(x) stays inside (0, 1) for the cross-entropy cost.
enum class Activation { sigmoid, tanh, relu };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "sigmoid";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double activate(Activation kind, double z) {
  switch (kind) {
    case Activation::sigmoid: return sigmoid(z);
    case Activation::tanh: return std::tanh(z);
    case Activation::relu: return z > 0.0 ? z : 0.0;
  }
  return z;
}

/// g'(z) expressed through a = g(z). The relu derivative at z = 0 is 0.
inline double activate_derivative(Activation kind, double a, double z) {
  switch (kind) {
    case Activation::sigmoid: return a * (1.0 - a);
    case Activation::tanh: return 1.0 - a * a;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

/// Layer sizes [s_1, ..., s_L]; s_1 is the feature count, s_L the output count K.
struct Topology {
  std::vector<std::size_t> layers;

  Topology() = default;
  Topology(std::initializer_list<std::size_t> sizes) : layers(sizes) { validate(); }
  explicit Topology(std::vector<std::size_t> sizes) : layers(std::move(sizes)) { validate(); }

  void validate() const {
    if (layers.size() < 2) throw ConfigError("topology needs at least an input and an output layer");
    for (auto s : layers)
      if (s == 0) throw ConfigError("topology layer sizes must be positive");
  }

  std::size_t depth() const noexcept { return layers.size(); }
  std::size_t inputs() const { return layers.front(); }
  std::size_t outputs() const { return layers.back(); }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < layers.size(); ++i) s += (i ? "," : "") + std::to_string(layers[i]);
    return s;
  }

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// Feed-forward network. weights[l] maps layer l to layer l + 1 and has
/// shape (s_{l+1} x s_l), or (s_{l+1} x (s_l + 1)) with bias units, in which
/// case the last column holds the bias weights.
struct Network {
  Topology topology;
  std::vector<Matrix> weights;
  Activation hidden = Activation::sigmoid;
  bool bias = false;

  /// Network with every weight zero.
  static Network zeros(const Topology& t, Activation hidden = Activation::sigmoid, bool bias = false) {
    t.validate();
    Network net{t, {}, hidden, bias};
    for (std::size_t l = 0; l + 1 < t.depth(); ++l)
      net.weights.emplace_back(t.layers[l + 1], t.layers[l] + (bias ? 1 : 0));
    return net;
  }

  /// Throws unless the weight list matches the topology.
  void validate() const {
    topology.validate();
    if (weights.size() != topology.depth() - 1) {
      throw DimensionError("network has " + std::to_string(weights.size()) + " weight matrices for " +
                           std::to_string(topology.depth()) + " layers");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const std::size_t r = topology.layers[l + 1];
      const std::size_t c = topology.layers[l] + (bias ? 1 : 0);
      if (weights[l].rows() != r || weights[l].cols() != c) {
        throw DimensionError("weight matrix " + std::to_string(l + 1) + " is " + weights[l].shape() +
                             ", topology requires " + Matrix::shape_string(r, c));
      }
      for (double v : weights[l].values())
        if (!std::isfinite(v)) throw Error("weight matrix " + std::to_string(l + 1) + " has a non-finite entry");
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    return n;
  }

  Activation activation_of_layer(std::size_t layer) const {
    return layer + 1 == topology.depth() ? Activation::sigmoid : hidden;
  }

  friend bool operator==(const Network&, const Network&) = default;
};

/// Activations a^(1) = x, ..., a^(L) = h(x), plus the pre-activations z^(l)
/// (z[0] is unused and left empty).
struct ForwardTrace {
  std::vector<Vector> activations;
  std::vector<Vector> pre_activations;

  const Vector& output() const { return activations.back(); }
};

namespace detail {

/// W * [a; 1] with bias, W * a without.
inline Vector layer_input(const Matrix& w, std::span<const double> a, bool bias) {
  if (!bias) return matvec(w, a);
  if (w.cols() != a.size() + 1) {
    throw DimensionError("cannot apply " + w.shape() + " with bias to vector of length " + std::to_string(a.size()));
  }
  Vector z(w.rows(), 0.0);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    auto r = w.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += r[k] * a[k];
    z[i] = s + r[a.size()];
  }
  return z;
}

}  // namespace detail

inline ForwardTrace forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.topology.inputs()) {
    throw DimensionError("forward: input has " + std::to_string(x.size()) + " features, network expects " +
                         std::to_string(net.topology.inputs()));
  }
  ForwardTrace t;
  t.activations.reserve(net.topology.depth());
  t.pre_activations.reserve(net.topology.depth());
  t.activations.emplace_back(x.begin(), x.end());
  t.pre_activations.emplace_back();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Vector z = detail::layer_input(net.weights[l], t.activations.back(), net.bias);
    const Activation g = net.activation_of_layer(l + 1);
    Vector a(z.size());
    std::ranges::transform(z, a.begin(), [g](double v) { return activate(g, v); });
    t.pre_activations.push_back(std::move(z));
    t.activations.push_back(std::move(a));
  }
  return t;
}

/// h(x)
inline Vector predict(const Network& net, std::span<const double> x) { return forward(net, x).output(); }

/// Bounds applied to h inside the log terms of the cost.
inline constexpr double kCostClamp = 1e-12;

/// Cross-entropy of one output against a 0/1 label.
inline double example_cost(double h, double y) {
  const double hc = std::clamp(h, kCostClamp, 1.0 - kCostClamp);
  return -y * std::log(hc) - (1.0 - y) * std::log(1.0 - hc);
}

/// A training pair: features and a K-vector of 0/1 labels.
struct Example {
  Vector x;
  Vector y;

  friend bool operator==(const Example&, const Example&) = default;
};

/// Mean over examples of the summed per-output cross-entropy.
inline double total_cost(const Network& net, std::span<const Example> examples) {
  if (examples.empty()) throw Error("total_cost: example list is empty");
  double sum = 0.0;
  for (const auto& e : examples) {
    const Vector h = predict(net, e.x);
    if (e.y.size() != h.size()) {
      throw DimensionError("total_cost: label has " + std::to_string(e.y.size()) + " entries, network has " +
                           std::to_string(h.size()) + " outputs");
    }
    for (std::size_t k = 0; k < h.size(); ++k) sum += example_cost(h[k], e.y[k]);
  }
  return sum / static_cast<double>(examples.size());
}

/// Sum of squared weights, bias columns excluded.
inline double weight_penalty(const Network& net) {
  double s = 0.0;
  for (const auto& w : net.weights) {
    const std::size_t used = net.bias ? w.cols() - 1 : w.cols();
    for (std::size_t i = 0; i < w.rows(); ++i)
      for (std::size_t j = 0; j < used; ++j) s += w(i, j) * w(i, j);
  }
  return s;
}

/// total_cost + lambda / (2m) * sum of squared weights.
inline double total_cost_regularized(const Network& net, std::span<const Example> examples, double lambda) {
  const double base = total_cost(net, examples);
  if (lambda == 0.0) return base;
  return base + lambda / (2.0 * static_cast<double>(examples.size())) * weight_penalty(net);
}

}  // namespace pcf
