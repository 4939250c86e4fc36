#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "psido/grid.hpp"

namespace psido::testing {

// Random band-limited function: independent complex Gaussian coefficients
// on frequencies with all signed indices |s| < n/4, transformed back.
inline SampledFunction random_bandlimited(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SampledFunction F(g);
  std::vector<std::size_t> idx(static_cast<std::size_t>(g.dim()));
  const long limit = static_cast<long>(g.points_per_axis()) / 4;
  for (std::size_t j = 0; j < F.size(); ++j) {
    g.unravel(j, idx);
    bool inside = true;
    for (std::size_t a : idx) inside = inside && std::abs(g.signed_index(a)) < limit;
    if (inside) F[j] = Complex(normal(rng), normal(rng));
  }
  return fourier_transform(F, Direction::inverse);
}

inline SampledFunction random_noise(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SampledFunction f(g);
  for (Complex& v : f.values()) v = Complex(normal(rng), normal(rng));
  return f;
}

inline SampledFunction gaussian(const Grid& g, double width = 1.0) {
  return SampledFunction::sample(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return std::exp(-0.5 * r2 / (width * width));
  });
}

inline double max_abs_diff(const SampledFunction& a, const SampledFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const SampledFunction& a) {
  double m = 0.0;
  for (const Complex& v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double l2(const SampledFunction& f) {
  double s = 0.0;
  for (const Complex& v : f.values()) s += std::norm(v);
  return std::sqrt(f.grid().cell_volume() * s);
}

}  // namespace psido::testing
