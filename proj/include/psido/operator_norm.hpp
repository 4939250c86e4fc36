#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psido/grid.hpp"
#include "psido/mixed_norm.hpp"
#include "psido/symbols.hpp"

namespace psido {

enum class NormMethod { power_iteration_p2, random_ascent };

const char* to_string(NormMethod method);

struct NormEstimateOptions {
  NormMethod method = NormMethod::power_iteration_p2;
  /// Power iterations, or dual-map steps per start for random_ascent.
  std::size_t iterations = 200;
  /// Relative change below which an iteration counts as converged.
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
  /// random_ascent: number of random starting functions (besides f = 1).
  std::size_t starts = 20;
  /// random_ascent: random coordinate perturbations tried on the best iterate.
  std::size_t perturbations = 20;
};

struct NormEstimate {
  double value = 0.0;
  NormMethod method = NormMethod::power_iteration_p2;
  bool converged = false;
  /// random_ascent only certifies a lower bound on the discrete norm.
  bool lower_bound = false;
  std::size_t iterations = 0;
};

/// Estimates the L^p -> L^p norm of the discretized T_sigma on `grid`.
/// power_iteration_p2 (p = (2, ..., 2) only): sqrt of the top eigenvalue of
/// T*T. random_ascent: maximizes ||Tf||_p / ||f||_p over Gaussian wave
/// packets refined by the dual-map step f <- J_{p'}(T* J_p(T f)) and random
/// perturbations; every value it returns is attained by some f.
NormEstimate operator_norm_estimate(const Symbol& s, const Grid& grid, const MixedExponent& p,
                                    const NormEstimateOptions& options);

struct ProbePoint {
  std::size_t n = 0;
  NormEstimate estimate;
};

struct ProbeReport {
  double p = 0.0;
  double half_extent = 0.0;
  std::vector<ProbePoint> points;
  /// last / first estimate
  double growth = 0.0;
  /// max / min - 1 over the sweep
  double variation = 0.0;
  double growth_factor = 1.2;
  /// growth >= growth_factor
  bool grows = false;
  bool all_converged = false;
};

/// random_ascent estimates for a multiplier at each resolution n on [-R, R)^d.
/// Requires p != 2 and a symbol that does not depend on x.
ProbeReport necessary_condition_probe(const Symbol& s, int dim, double p, double half_extent,
                                      std::span<const std::size_t> resolutions, NormEstimateOptions options,
                                      double growth_factor = 1.2);

struct NormBoundInputs {
  MixedExponent p = MixedExponent({2.0});
  double c1 = 1.0;
  double cq = 1.0;
  double cprime = 1.0;
};

/// c' prod_i max(p_i, (p_i - 1)^{-1/p_i}) (c_1 + c_q).
double theorem_norm_bound(const NormBoundInputs& inputs);

}  // namespace psido
