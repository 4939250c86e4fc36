#pragma once

#include <functional>
#include <span>
#include <vector>

#include "psido/grid.hpp"
#include "psido/mixed_norm.hpp"
#include "psido/symbols.hpp"

namespace psido {

enum class ProfileKind { gaussian, smooth_bump, cosine_squared };

const char* to_string(ProfileKind kind);
ProfileKind parse_profile(const std::string& name);

/// One-dimensional bump u -> p(u / width). gaussian: exp(-u^2/2);
/// smooth_bump: exp(1 - 1/(1 - u^2)) on |u| < 1; cosine_squared: cos^2(pi u / 2) on |u| < 1.
struct Profile {
  ProfileKind kind = ProfileKind::gaussian;
  double width = 1.0;

  double operator()(double u) const;
  bool compactly_supported() const noexcept { return kind != ProfileKind::gaussian; }
};

/// f(x_bar, x') = g(x_bar) (h(x' - a) - h(x' - b)), g and h products of
/// one-dimensional profiles. a, b = y' -/+ s e_1 with s = floor(t / 2h) h,
/// and h has support radius t - s, so both translates sit in the sup-norm
/// t-box around y' (periodically). The outer profile's own width is
/// replaced by t - s. Requires t >= 4h and y' on the grid.
SampledFunction make_cancellation_test_function(const Grid& grid, int l, double t, std::span<const double> yprime,
                                                const Profile& inner, const Profile& outer);

struct CZCheckConfig {
  int l = 0;
  double t = 1.0;
  std::vector<double> x0prime;
  /// Exclusion multiplier N > 1.
  double Nconst = 2.0;
  /// Exponents with split l; only the leading block is used.
  MixedExponent pbar = MixedExponent({2.0}, 0);

  void validate(const Grid& grid) const;
};

/// Membership of f in the cancellation class around x'_0.
struct CancellationCheck {
  bool support_ok = false;
  bool zero_mean_ok = false;
  /// Largest |f| outside the t-box.
  double max_outside = 0.0;
  /// Largest |integral f dx'| / max(1, integral |f| dx') over x_bar rows.
  double max_relative_mean = 0.0;
};

inline constexpr double kZeroMeanTolerance = 1e-12;

CancellationCheck check_cancellation_class(const SampledFunction& f, const CZCheckConfig& cfg);

using OperatorFn = std::function<SampledFunction(const SampledFunction&)>;

/// apply_psido bound to a symbol.
OperatorFn symbol_operator(const Symbol& s);

struct CZResult {
  double t = 0.0;
  /// integral over |x' - x'_0|_inf > N t of ||Tf(., x')||_{p_bar} dx'
  double lhs = 0.0;
  /// ||f||_{p_bar, 1}
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Throws PreconditionError naming the failed check when f is not in the
/// cancellation class. Distances in x' are periodic sup-norm distances.
CZResult cz_condition_check(const OperatorFn& op, const CZCheckConfig& cfg, const SampledFunction& f);

struct CZSweep {
  std::vector<CZResult> results;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  bool all_finite = false;
};

/// Runs cz_condition_check for each t with f built by make_cancellation_test_function.
/// Results are in input order.
CZSweep cz_sweep(const OperatorFn& op, const Grid& grid, CZCheckConfig cfg, std::span<const double> ts,
                 const Profile& inner, const Profile& outer);

}  // namespace psido
