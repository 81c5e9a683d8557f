#pragma once

// Seeded synthetic data used by the bundled fixtures, the tests and the demos.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcf/perceptron.hpp"
#include "pcf/random.hpp"

namespace pcf::synthetic {

/// Uniform point in [-1, 1]^2 with both coordinates at least `margin` away from 0.
inline Vector xor_point(Rng& rng, double margin) {
  Vector x(2);
  for (double& v : x) {
    do {
      v = rng.uniform(-1.0, 1.0);
    } while (std::abs(v) < margin);
  }
  return x;
}

/// Label 1 when both coordinates share a sign (quadrants I and III).
inline double xor_label(const Vector& x) { return x[0] * x[1] > 0.0 ? 1.0 : 0.0; }

/// XOR-style preference data: n points in [-1, 1]^2, labelled by quadrant.
inline std::vector<Example> xor_examples(std::size_t n, std::uint64_t seed, double margin = 0.05) {
  Rng rng(seed);
  std::vector<Example> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector x = xor_point(rng, margin);
    const double y = xor_label(x);
    out.push_back({std::move(x), {y}});
  }
  return out;
}

/// n points in [-1, 1]^d labelled by sign(w . x) for a fixed direction w,
/// keeping only points at least `margin` from the separating hyperplane.
inline std::vector<Example> separable_examples(std::size_t n, std::size_t d, std::uint64_t seed,
                                               double margin = 0.1) {
  Rng rng(seed);
  Vector w(d);
  for (double& v : w) v = rng.uniform(-1.0, 1.0);
  const double norm = std::sqrt(sum_of_squares(w));
  for (double& v : w) v /= norm;
  std::vector<Example> out;
  out.reserve(n);
  while (out.size() < n) {
    Vector x(d);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const double s = dot(w, x);
    if (std::abs(s) < margin) continue;
    out.push_back({std::move(x), {s > 0.0 ? 1.0 : 0.0}});
  }
  return out;
}

}  // namespace pcf::synthetic
