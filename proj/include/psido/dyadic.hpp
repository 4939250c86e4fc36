#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "psido/grid.hpp"
#include "psido/symbols.hpp"

namespace psido {

/// C^4 smootherstep S(t) = t^5 (126 - 420 t + 540 t^2 - 315 t^3 + 70 t^4)
/// on [0, 1], clamped outside.
double smootherstep(double t);

/// eta(xi) = 1 - S(|xi| - 1): 1 on |xi| <= 1, 0 on |xi| >= 2.
double dyadic_cutoff(double radius);
/// zeta(xi) = eta(xi) - eta(2 xi), supported in 1/2 <= |xi| <= 2.
double ring_cutoff(double radius);

/// floor(log2(Nyquist)) - 1, at least 1.
int default_truncation(const Grid& grid);

/// The pieces sigma_0 = sigma eta and sigma_j = sigma zeta(2^{-j} .), j = 1..J,
/// on the frequency grid of `grid`.
class DyadicDecomposition {
 public:
  /// Requires J >= 1 and 2^{J-1} < Nyquist, so the top ring meets the
  /// resolved band.
  DyadicDecomposition(Symbol symbol, Grid grid, int J);

  const Symbol& symbol() const noexcept { return symbol_; }
  const Grid& grid() const noexcept { return grid_; }
  int truncation() const noexcept { return J_; }

  /// Cutoff weight of piece j at radius |xi|.
  static double weight(int j, double radius);
  /// Weights of piece j on the frequency grid (FFT order).
  std::span<const double> weights(int j) const;

  /// sigma_j(x, .) on the frequency grid. x may be omitted for symbols that
  /// do not depend on x.
  SampledFunction piece(int j, std::optional<std::span<const double>> x = std::nullopt) const;
  /// sum_{j <= J} sigma_j(x, .)
  SampledFunction reconstruction(std::optional<std::span<const double>> x = std::nullopt) const;
  /// sigma(x, .) eta(2^{-J} .), computed directly.
  SampledFunction truncated_symbol(std::optional<std::span<const double>> x = std::nullopt) const;
  /// sigma(x, .) on the frequency grid.
  SampledFunction full_symbol(std::optional<std::span<const double>> x = std::nullopt) const;

 private:
  SampledFunction weighted(std::span<const double> w, std::optional<std::span<const double>> x) const;

  Symbol symbol_;
  Grid grid_;
  int J_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> radius_;
};

DyadicDecomposition dyadic_decompose(const Symbol& s, const Grid& grid, int J);

/// k(x, z) sampled on the z grid (same box as the frequency grid's dual),
/// z = 0 at axis index n/2.
struct Kernel {
  SampledFunction values;
  /// Evaluation point for x-dependent symbols; empty otherwise.
  std::optional<std::vector<double>> x;
  SymbolClassParams params;
  int truncation = 0;
  /// Piece index, or -1 for a sum over 0..truncation.
  int piece = -1;

  const Grid& grid() const noexcept { return values.grid(); }
};

/// k_j(x, .) = inverse transform of sigma_j(x, .).
Kernel kernel_piece(const DyadicDecomposition& dd, int j, std::optional<std::span<const double>> x = std::nullopt);
/// sum_{j <= J} k_j(x, .)
Kernel kernel_sum(const DyadicDecomposition& dd, std::optional<std::span<const double>> x = std::nullopt);

/// CSV of (|z|, |k(z)|) pairs, one row per grid point.
void write_radial_csv(std::ostream& out, const Kernel& k);

/// Support mask threshold and off-support margin (in units of h).
inline constexpr double kSupportThreshold = 1e-14;
inline constexpr double kOffSupportMargin = 2.0;

/// Periodic Euclidean distance from grid point x to {|f| > 1e-14}; +inf
/// when f vanishes.
double distance_to_support(const SampledFunction& f, std::span<const double> x);

/// integral k(x, x - y) f(y) dy over supp f, with z = x - y wrapped
/// periodically. x must be a grid point at distance >= 2h from supp f.
Complex offsupport_apply(const Kernel& k, const SampledFunction& f, std::span<const double> x);

}  // namespace psido
