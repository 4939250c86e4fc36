#pragma once

#include <optional>
#include <span>
#include <vector>

#include "psido/dyadic.hpp"
#include "psido/symbols.hpp"

namespace psido {

/// Derivative orders and decay gain L for the kernel estimate
/// |d_x^a d_z^b k(x, z)| <= C |z|^{-d - m - delta|a| - |b| - L}.
struct KernelDecayParams {
  MultiIndex alpha;
  MultiIndex beta;
  double L = 0.0;

  /// -d - m - delta|a| - |b| - L
  double predicted_exponent(int dim, const SymbolClassParams& c) const;
  /// Requires rho > 0, L >= minimal_decay_gain(...) and d + m + delta|a| + |b| + L > 0.
  void validate(int dim, const SymbolClassParams& c) const;
};

/// (1 - rho) (floor((d + m + delta|a| + |b|) / rho) + 1)^+, rho > 0.
double minimal_decay_gain(int dim, const SymbolClassParams& c, int alpha_order, int beta_order);

struct DecayFit {
  /// Least-squares slope of log max|k| against log|z| over the shells;
  /// NaN when fewer than two shells carry a nonzero kernel.
  double slope = 0.0;
  double predicted_exponent = 0.0;
  /// Smallest C with |k(z)| <= C |z|^{predicted} on the window.
  double envelope = 0.0;
  bool degenerate = false;
  /// Envelope finite.
  bool pass = false;
  /// Per-shell witness radius and radial maximum.
  std::vector<double> shell_radius;
  std::vector<double> shell_max;
};

/// Fits the decay of d_z^beta k over log-spaced radial shells in
/// [z_lo, z_hi]. alpha only enters the predicted exponent: pass the
/// x-derivative kernel itself when |alpha| > 0.
/// Requires 2h <= z_lo < z_hi <= R/2.
DecayFit decay_fit(const Kernel& k, double z_lo, double z_hi, const KernelDecayParams& params, std::size_t shells = 16);

struct EnvelopeRow {
  int j = 0;
  /// sup_z |z|^M |d_x^a d_z^b k_j(x, z)|
  double sup = 0.0;
  /// 2^{j (d + m + delta|a| + |b| - rho M)}
  double scale = 0.0;
  double ratio = 0.0;
};

struct EnvelopeReport {
  std::vector<EnvelopeRow> rows;
  double max_over_min = 0.0;
  /// Least-squares slope of log2(sup) against j, and its prediction
  /// d + m + delta|a| + |b| - rho M.
  double growth_slope = 0.0;
  double predicted_growth = 0.0;
  double factor = 3.0;
  /// All pieces vanish identically (e.g. x-derivatives of a multiplier).
  bool degenerate = false;
  bool pass = false;
};

/// r_j = sup_z |z|^M |d_x^a d_z^b k_j| / 2^{j(d + m + delta|a| + |b| - rho M)}
/// for j = 1..J; passes when max r_j / min r_j <= factor.
/// z-derivatives are spectral (|b| <= 2); x-derivatives use finite
/// differences of the symbol at the fixed point x.
EnvelopeReport dyadic_envelope_check(const DyadicDecomposition& dd, int M, const MultiIndex& alpha,
                                     const MultiIndex& beta, double factor = 3.0,
                                     std::optional<std::span<const double>> x = std::nullopt);

}  // namespace psido
