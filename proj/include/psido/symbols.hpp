#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psido/grid.hpp"

namespace psido {

/// Claimed membership in the nonsmooth class S^m_{rho,delta,N,N'}: the
/// bound |d_x^a d_xi^b sigma| <= C_{a,b} <xi>^{m - rho|b| + delta|a|} for
/// |a| <= N, |b| <= N'.
struct SymbolClassParams {
  double m = 0.0;
  double rho = 1.0;
  double delta = 0.0;
  int N = 4;
  int Nprime = 4;

  /// 0 <= rho <= 1, 0 <= delta < 1, N, N' >= 0. Parity of N, N' is not
  /// checked here; SmoothnessBudget enforces it.
  void validate() const;
};

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);
  static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(dim), 0)); }

  int order() const noexcept;
  std::size_t size() const noexcept { return entries_.size(); }
  int operator[](std::size_t i) const noexcept { return entries_[i]; }
  const std::vector<int>& entries() const noexcept { return entries_; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> entries_;
};

/// All multi-indices of length dim with order <= max_order, graded by order.
std::vector<MultiIndex> enumerate_multi_indices(int dim, int max_order);

enum class SymbolKind { multiplier, multiplication, separable, general };

const char* to_string(SymbolKind kind);

/// A symbol sigma(x, xi) with its claimed class.
///
/// The kind tag records structure the operator code can exploit:
/// multiplier symbols depend on xi only, multiplication symbols on x only,
/// separable symbols are a(x) b(xi). Evaluators must be reentrant.
class Symbol {
 public:
  using Evaluator = std::function<Complex(std::span<const double> x, std::span<const double> xi)>;
  using SpatialFactor = std::function<Complex(std::span<const double> x)>;
  using FrequencyFactor = std::function<Complex(std::span<const double> xi)>;

  static Symbol multiplier(FrequencyFactor b, SymbolClassParams params, std::string name);
  static Symbol multiplication(SpatialFactor a, SymbolClassParams params, std::string name);
  static Symbol separable(SpatialFactor a, FrequencyFactor b, SymbolClassParams params, std::string name);
  static Symbol general(Evaluator e, SymbolClassParams params, std::string name);
  static Symbol constant(Complex c, SymbolClassParams params = {0.0, 1.0, 0.0, 4, 4});

  /// Unchecked evaluation; see eval_symbol for the checked form.
  Complex operator()(std::span<const double> x, std::span<const double> xi) const;

  /// a(x); identically 1 for multipliers. Not available for general symbols.
  Complex spatial_factor(std::span<const double> x) const;
  /// b(xi); identically 1 for multiplication symbols. Not available for general symbols.
  Complex frequency_factor(std::span<const double> xi) const;

  SymbolKind kind() const noexcept { return kind_; }
  const SymbolClassParams& params() const noexcept { return params_; }
  const std::string& name() const noexcept { return name_; }
  /// Set only for Symbol::constant.
  const std::optional<Complex>& constant_value() const noexcept { return constant_; }

  bool depends_on_x() const noexcept { return kind_ != SymbolKind::multiplier; }
  bool depends_on_xi() const noexcept { return kind_ != SymbolKind::multiplication; }

  /// Same evaluator, different class claim.
  Symbol with_params(SymbolClassParams params) const;

 private:
  SymbolKind kind_ = SymbolKind::general;
  SymbolClassParams params_;
  std::string name_;
  SpatialFactor spatial_;
  FrequencyFactor frequency_;
  Evaluator general_;
  std::optional<Complex> constant_;
};

/// Checked evaluation: throws EvaluationError naming (x, xi) if the value
/// is not finite.
Complex eval_symbol(const Symbol& s, std::span<const double> x, std::span<const double> xi);

// Built-in families ---------------------------------------------------------

/// <xi>^m, claimed in S^m_{1,0}.
Symbol bessel_symbol(double m);
/// exp(i <xi>) <xi>^m, claimed in S^m_{0,0}.
Symbol wave_symbol(double m);
/// a(x) = sum_k c_k exp(i k omega (x_1 + ... + x_d)). Claimed smoothness
/// N is supplied by the caller; truncation makes higher derivatives grow
/// with the number of terms rather than being undefined.
Symbol fourier_series_multiplication(std::vector<Complex> coefficients, double omega, int claimed_N);
/// c_k = (1 + k)^{-(N + 3/2)}, k < terms: a C^N function whose (N+1)-st
/// derivative diverges as terms -> infinity.
std::vector<Complex> holder_coefficients(int smoothness, std::size_t terms);
/// a(x) <xi>^m with a from fourier_series_multiplication.
Symbol separable_symbol(std::vector<Complex> coefficients, double omega, double m, int claimed_N);
/// <kappa(x) xi>^m with kappa(x) = 1 + amplitude sin(omega (x_1 + ... + x_d)),
/// a genuinely (x, xi)-coupled symbol in S^m_{1,0}. Requires |amplitude| < 1.
Symbol variable_bessel_symbol(double m, double amplitude, double omega);

// Derivatives and class verification ----------------------------------------

/// Central-difference approximation of d_x^alpha d_xi^beta sigma(x, xi),
/// composed one axis at a time with fourth-order stencils.
/// Requires |alpha| + |beta| <= 8 and step > 0; steps below 1e-4 are
/// rejected for total order >= 4.
Complex finite_diff_derivative(const Symbol& s, const MultiIndex& alpha, const MultiIndex& beta,
                               std::span<const double> x, std::span<const double> xi, double step);

/// Default finite-difference step for a given total derivative order.
double default_fd_step(int order);

/// Finite sample set over which the class bound is fitted.
struct SymbolSampleSet {
  std::vector<std::vector<double>> x_points;
  std::vector<std::vector<double>> xi_points;
  /// 0 selects default_fd_step per order.
  double step = 0.0;

  /// xi = 0 plus geometric radii in [1/16, xi_max] along each axis, the
  /// negative first axis and the diagonal.
  static SymbolSampleSet radial(int dim, double xi_max, std::size_t radii,
                                std::vector<std::vector<double>> x_points);
  /// radial(...) up to the grid Nyquist with x_count points along the box diagonal.
  static SymbolSampleSet from_grid(const Grid& grid, std::size_t radii, std::size_t x_count);
};

struct DerivativeBound {
  MultiIndex alpha;
  MultiIndex beta;
  double fitted_constant = 0.0;
  std::vector<double> witness_x;
  std::vector<double> witness_xi;
  bool pass = false;
};

struct DerivativeBoundReport {
  SymbolClassParams claim;
  double cap = 0.0;
  std::vector<DerivativeBound> bounds;
  bool pass = false;

  const DerivativeBound* find(const MultiIndex& alpha, const MultiIndex& beta) const;
  /// Columns: alpha,beta,fitted_C,witness_x,witness_xi,pass. Multi-indices
  /// and points are space-separated inside a field.
  void write_csv(std::ostream& out) const;
};

/// Fits C_{a,b} = sup over the sample set of |d_x^a d_xi^b sigma| <xi>^{-m + rho|b| - delta|a|}
/// for |a| <= N, |b| <= N', |a| + |b| <= max_total_order. A pair passes when
/// its constant is finite and below cap. Sampling-based: the result is a
/// fitted constant, not a proof of membership.
DerivativeBoundReport verify_symbol_class(const Symbol& s, const SymbolSampleSet& samples, double cap,
                                          int max_total_order = 8);

/// sup over the grid of |x^alpha d^beta f(x)| with d^beta computed spectrally.
double schwartz_term(const SampledFunction& f, const MultiIndex& alpha, const MultiIndex& beta);

/// |f|_{N,N'} = max over |alpha| <= N, |beta| <= N' of schwartz_term. N' <= 4.
double schwartz_seminorm(const SampledFunction& f, int N, int Nprime);

/// d^beta f via multiplication by (i xi)^beta on the frequency grid.
/// Odd-order derivatives drop the unpaired Nyquist mode.
SampledFunction spectral_derivative(const SampledFunction& f, const MultiIndex& beta);

}  // namespace psido
