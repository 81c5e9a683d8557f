#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

#include "pcf/perceptron.hpp"
#include "pcf/random.hpp"
#include "pcf/training.hpp"

#ifndef PCF_DATA_DIR
#define PCF_DATA_DIR "data"
#endif

namespace pcf::testing {

inline std::string data_path(const std::string& rel) { return std::string(PCF_DATA_DIR) + "/" + rel; }

struct GradCase {
  Network net;
  std::vector<Example> examples;
  double lambda = 0.0;

  std::string describe() const {
    return "[" + net.topology.to_string() + "] " + to_string(net.hidden) + " lambda=" + std::to_string(lambda) +
           " m=" + std::to_string(examples.size());
  }
};

/// 24 randomized (topology, weights, data, lambda) tuples covering every
/// hidden activation, lambda in {0, 0.5, 10} and 5 to 20 examples.
inline std::vector<GradCase> gradcheck_suite(std::uint64_t seed = 2024) {
  const std::vector<Topology> topologies = {
      {2, 3, 1}, {3, 4, 1}, {4, 5, 2}, {5, 6, 4, 2}, {3, 3, 3, 1}, {2, 2, 1}, {5, 4, 3}, {4, 6, 4, 2},
  };
  const Activation kinds[] = {Activation::sigmoid, Activation::tanh, Activation::relu};
  const double lambdas[] = {0.0, 0.5, 10.0};
  Rng rng(seed);
  std::vector<GradCase> out;
  for (std::size_t i = 0; i < 24; ++i) {
    const Topology& t = topologies[i % topologies.size()];
    GradCase c;
    c.net = random_init(t, 1.0, rng.next(), kinds[i % 3]);
    c.lambda = lambdas[(i / 3) % 3];
    const std::size_t m = 5 + rng.below(16);
    for (std::size_t k = 0; k < m; ++k) {
      Example e{Vector(t.inputs()), Vector(t.outputs())};
      for (double& v : e.x) v = rng.uniform(-1.0, 1.0);
      for (double& v : e.y) v = static_cast<double>(rng.below(2));
      c.examples.push_back(std::move(e));
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline double check_case(const GradCase& c, const BackpropOptions& opts = {}) {
  return gradient_check(backprop(c.net, c.examples, c.lambda, opts), numerical_gradient(c.net, c.examples, c.lambda));
}

}  // namespace pcf::testing
