#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "doctest.h"
#include "psido/budget.hpp"
#include "psido/cancellation.hpp"
#include "psido/dyadic.hpp"
#include "psido/errors.hpp"
#include "psido/kernel_decay.hpp"
#include "psido/operator_norm.hpp"
#include "psido/operators.hpp"
#include "test_support.hpp"

using namespace psido;

namespace {

Symbol bracket_power(double m) {
  return Symbol::multiplier(
      [m](std::span<const double> xi) {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return Complex(std::pow(1.0 + r2, 0.5 * m));
      },
      {m, 1.0, 0.0, 4, 4}, "bracket");
}

KernelDecayParams plain(int dim, double L = 0.0) { return {MultiIndex::zero(dim), MultiIndex::zero(dim), L}; }

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("decay fit against the closed-form bessel potential kernel") {
  // d = 2, <xi>^-1 has kernel exp(-|z|) / (2 pi |z|).
  const Grid g(2, 256, 2.0);
  const Kernel k = kernel_sum(DyadicDecomposition(bessel_symbol(-1.0), g, 8));
  const DecayFit fit = decay_fit(k, 0.05, 0.5, plain(2));
  CHECK(fit.predicted_exponent == -1.0);
  CHECK(fit.pass);
  CHECK_FALSE(fit.degenerate);
  REQUIRE(fit.shell_radius.size() >= 8);
  std::vector<double> lx, ly;
  for (double r : fit.shell_radius) {
    lx.push_back(std::log(r));
    ly.push_back(std::log(std::exp(-r) / (2.0 * std::numbers::pi * r)));
  }
  const double oracle = ls_slope(lx, ly);
  CHECK(std::abs(fit.slope - oracle) <= 0.05);

  const DecayFit small = decay_fit(k, 0.04, 0.25, plain(2));
  CHECK(small.slope >= -1.15);
  CHECK(small.slope <= -0.85);

  // The envelope is a sup over the window, so enlarging the window cannot shrink it.
  CHECK(decay_fit(k, 0.05, 1.0, plain(2)).envelope >= fit.envelope);

  CHECK_THROWS_AS(decay_fit(k, 0.01, 0.5, plain(2)), InvalidInput);
  CHECK_THROWS_AS(decay_fit(k, 0.05, 1.5, plain(2)), InvalidInput);
  CHECK_THROWS_AS(decay_fit(k, 0.5, 0.05, plain(2)), InvalidInput);
}

TEST_CASE("decay fit envelope and parameter checks") {
  const Grid g(1, 4096, 32.0);
  const Kernel k = kernel_sum(DyadicDecomposition(bracket_power(-2.0), g, 8));
  // exp(-|z|)/2 with exponent -d - m - L = -0.5: sup of exp(-r) sqrt(r) / 2 on [0.1, 2] sits at r = 1/2.
  const DecayFit fit = decay_fit(k, 0.1, 2.0, plain(1, 1.5));
  CHECK(fit.predicted_exponent == doctest::Approx(-0.5));
  CHECK(fit.pass);
  CHECK(std::abs(fit.envelope - 0.5 * std::exp(-0.5) * std::sqrt(0.5)) <= 1e-3 * fit.envelope);
  CHECK_THROWS_AS(decay_fit(k, 0.1, 2.0, plain(1, 0.0)), InvalidInput);  // d + m + L = -1

  const Kernel zero = kernel_sum(DyadicDecomposition(Symbol::constant(0.0), g, 8));
  const DecayFit z = decay_fit(zero, 0.1, 2.0, plain(1));
  CHECK(z.degenerate);
  CHECK(z.envelope == 0.0);
  CHECK(std::isnan(z.slope));

  CHECK(minimal_decay_gain(1, {-1.0, 1.0, 0.0, 4, 4}, 0, 0) == 0.0);
  // (1 - 1/2)(floor((1 + 0)/(1/2)) + 1) = 1.5
  CHECK(minimal_decay_gain(1, {0.0, 0.5, 0.0, 4, 4}, 0, 0) == 1.5);
  CHECK_THROWS_AS(plain(1, 1.0).validate(1, {0.0, 0.5, 0.0, 4, 4}), InvalidInput);
  CHECK_NOTHROW(plain(1, 1.5).validate(1, {0.0, 0.5, 0.0, 4, 4}));
  CHECK_THROWS_AS(plain(1, 5.0).validate(1, {0.0, 0.0, 0.0, 4, 4}), InvalidInput);
}

TEST_CASE("dyadic envelope") {
  const Grid g(1, 4096, 16.0);
  const DyadicDecomposition dd(bessel_symbol(-1.0), g, 6);
  const MultiIndex z = MultiIndex::zero(1);
  const EnvelopeReport r0 = dyadic_envelope_check(dd, 0, z, z);
  REQUIRE(r0.rows.size() == 6);
  CHECK(r0.pass);
  CHECK(r0.max_over_min <= 3.0);
  // Brute-force sup over the grid for each piece.
  for (const EnvelopeRow& row : r0.rows) {
    const double sup = psido::testing::max_abs(kernel_piece(dd, row.j).values);
    CHECK(row.sup == doctest::Approx(sup).epsilon(1e-12));
    CHECK(row.ratio == doctest::Approx(sup / std::pow(2.0, row.j * (1.0 - 1.0))).epsilon(1e-12));
  }

  const EnvelopeReport r2 = dyadic_envelope_check(dd, 2, z, z);
  CHECK(r0.predicted_growth - r2.predicted_growth == doctest::Approx(2.0));
  CHECK(std::abs((r0.growth_slope - r2.growth_slope) - 2.0) <= 0.3);

  // sigma = 1: every ring piece is the same rescaled bump, so r_j is flat.
  const DyadicDecomposition one(Symbol::constant(1.0), g, 6);
  const EnvelopeReport flat = dyadic_envelope_check(one, 0, z, z);
  CHECK(flat.max_over_min <= 1.01);

  // x-derivatives of a multiplier vanish identically.
  const EnvelopeReport dx = dyadic_envelope_check(dd, 0, MultiIndex({1}), z);
  CHECK(dx.degenerate);
  CHECK(dx.pass);

  CHECK_THROWS_AS(dyadic_envelope_check(dd, -1, z, z), InvalidInput);
  CHECK_THROWS_AS(dyadic_envelope_check(dd, 5, z, z), InvalidInput);  // M > N' = 4
  CHECK_THROWS_AS(dyadic_envelope_check(dd, 0, z, MultiIndex({3})), InvalidInput);
}

TEST_CASE("cancellation test functions") {
  const Grid g(2, 256, 8.0);
  const std::vector<double> y{0.0};
  const Profile inner{ProfileKind::gaussian, 1.0}, outer{ProfileKind::smooth_bump, 1.0};
  for (double t : {1.0, 2.0}) {
    CAPTURE(t);
    const SampledFunction f = make_cancellation_test_function(g, 1, t, y, inner, outer);
    double worst_mean = 0.0, outside = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < g.points_per_axis(); ++i) {
      Complex row = 0.0;
      for (std::size_t k = 0; k < g.points_per_axis(); ++k) {
        const Complex v = f[i * g.points_per_axis() + k];
        row += g.spacing() * v;
        peak = std::max(peak, std::abs(v));
        if (std::abs(g.coordinate(k)) > t) outside = std::max(outside, std::abs(v));
      }
      worst_mean = std::max(worst_mean, std::abs(row));
    }
    CHECK(peak > 0.1);
    CHECK(worst_mean <= 1e-12);
    CHECK(outside == 0.0);

    CZCheckConfig cfg{1, t, y, 2.0, MixedExponent({2.0, 2.0}, 1)};
    const CancellationCheck c = check_cancellation_class(f, cfg);
    CHECK(c.support_ok);
    CHECK(c.zero_mean_ok);
  }
  CHECK_THROWS_AS(make_cancellation_test_function(g, 1, 0.1, y, inner, outer), InvalidInput);
  CHECK_THROWS_AS(make_cancellation_test_function(g, 1, 1.0, y, inner, inner), InvalidInput);
  CHECK(parse_profile("cos2") == ProfileKind::cosine_squared);
  CHECK_THROWS_AS(parse_profile("triangle"), InvalidInput);
}

TEST_CASE("CZ condition check") {
  const Grid g(2, 128, 4.0);
  const std::vector<double> y{0.0};
  const Profile inner{ProfileKind::gaussian, 1.0}, outer{ProfileKind::smooth_bump, 1.0};
  CZCheckConfig cfg{1, 0.5, y, 3.0, MixedExponent({2.0, 2.0}, 1)};
  const SampledFunction f = make_cancellation_test_function(g, 1, 0.5, y, inner, outer);

  const CZResult id = cz_condition_check(symbol_operator(Symbol::constant(1.0)), cfg, f);
  CHECK(id.lhs == 0.0);
  CHECK(id.ratio == 0.0);
  CHECK(id.rhs > 0.0);

  const OperatorFn op = symbol_operator(bracket_power(-4.0));
  const CZResult base = cz_condition_check(op, cfg, f);
  CHECK(std::isfinite(base.ratio));
  CHECK(base.ratio > 0.0);
  CHECK(base.rhs == doctest::Approx(pbar_one_norm(f, cfg.pbar)).epsilon(1e-14));

  // Shift x'_0 and f together by a whole number of grid steps.
  const std::size_t shift = 10;
  CZCheckConfig moved = cfg;
  moved.x0prime = {shift * g.spacing()};
  SampledFunction fs(g);
  const std::size_t n = g.points_per_axis();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) fs[i * n + (k + shift) % n] = f[i * n + k];
  CHECK(std::abs(cz_condition_check(op, moved, fs).ratio - base.ratio) <= 1e-10 * base.ratio);

  SampledFunction biased = f;
  for (std::size_t i = 0; i < n; ++i) biased[i * n + n / 2] += 1e-3;
  CHECK_THROWS_AS(cz_condition_check(op, cfg, biased), PreconditionError);
  SampledFunction spread = f;
  spread[n - 1] = 1.0;  // x' = R - h, outside the t-box
  CHECK_THROWS_AS(cz_condition_check(op, cfg, spread), PreconditionError);

  CZCheckConfig empty = cfg;
  empty.t = 2.0;  // N t = 6 > R
  CHECK_THROWS_AS(empty.validate(g), InvalidInput);
  CZCheckConfig weak = cfg;
  weak.Nconst = 1.0;
  CHECK_THROWS_AS(weak.validate(g), InvalidInput);

  const std::vector<double> ts{0.25, 0.5, 1.0};
  const CZSweep sweep = cz_sweep(op, g, cfg, ts, inner, outer);
  REQUIRE(sweep.results.size() == 3);
  CHECK(sweep.all_finite);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(sweep.results[i].t == ts[i]);
  CHECK(sweep.results[1].ratio == doctest::Approx(base.ratio).epsilon(1e-12));
}

TEST_CASE("theorem norm bound") {
  CHECK(theorem_norm_bound({MixedExponent({2.0, 2.0})}) == 8.0);
  CHECK(theorem_norm_bound({MixedExponent({1.5}), 0.5, 0.5, 1.0}) == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-15));
  const NormBoundInputs a{MixedExponent({3.0, 1.2, 5.0}), 0.7, 1.3, 2.5};
  const NormBoundInputs b{MixedExponent({3.0, 1.2, 5.0}), 1.4, 2.6, 2.5};
  CHECK(theorem_norm_bound(b) == 2.0 * theorem_norm_bound(a));
  const NormBoundInputs c{MixedExponent({5.0, 3.0, 1.2}), 0.7, 1.3, 2.5};
  CHECK(theorem_norm_bound(c) == theorem_norm_bound(a));
  CHECK_THROWS_AS(theorem_norm_bound({MixedExponent({2.0}), -1.0, 1.0, 1.0}), InvalidInput);
}

TEST_CASE("operator norm estimates") {
  const Grid g(1, 128, 4.0);
  NormEstimateOptions power;
  NormEstimateOptions ascent;
  ascent.method = NormMethod::random_ascent;
  ascent.starts = 4;

  const Complex c(0.6, -0.8 * 2.0);
  for (const auto& opts : {power, ascent}) {
    const MixedExponent p = opts.method == NormMethod::power_iteration_p2 ? MixedExponent({2.0}) : MixedExponent({3.0});
    CHECK(std::abs(operator_norm_estimate(Symbol::constant(c), g, p, opts).value - std::abs(c)) <= 1e-6);
  }

  const Grid g512(1, 512, 8.0);
  const NormEstimate pi = operator_norm_estimate(bessel_symbol(-1.0), g512, MixedExponent({2.0}), power);
  CHECK(pi.converged);
  CHECK_FALSE(pi.lower_bound);
  CHECK(std::abs(pi.value - 1.0) <= 0.02);
  const NormEstimate ra = operator_norm_estimate(bessel_symbol(-1.0), g512, MixedExponent({2.0}), ascent);
  CHECK(ra.lower_bound);
  CHECK(ra.value <= pi.value + 1e-6);

  CHECK_THROWS_AS(operator_norm_estimate(bessel_symbol(-1.0), g, MixedExponent({3.0}), power), InvalidInput);

  const std::vector<std::size_t> ns{32, 64};
  const ProbeReport probe = necessary_condition_probe(Symbol::constant(1.0), 1, 4.0, 8.0, ns, ascent);
  for (const ProbePoint& pt : probe.points) CHECK(std::abs(pt.estimate.value - 1.0) <= 1e-6);
  CHECK_FALSE(probe.grows);
  CHECK_THROWS_AS(necessary_condition_probe(Symbol::constant(1.0), 1, 2.0, 8.0, ns, ascent), InvalidInput);
  CHECK_THROWS_AS(necessary_condition_probe(variable_bessel_symbol(-1.0, 0.5, 1.0), 1, 4.0, 8.0, ns, ascent),
                  InvalidInput);
}

TEST_CASE("condition report") {
  const ConditionReport r1 = condition_report(0.0, 1.0, 0.0, 3, {4.0});
  CHECK(r1.necessary_lp);
  CHECK(r1.sufficient_thm32);
  CHECK(r1.sufficient_margin == 0.0);

  const ConditionReport r2 = condition_report(0.0, 0.5, 0.0, 1, {4.0});
  CHECK(r2.necessary_margins[0] == doctest::Approx(-0.125));
  CHECK(r2.sufficient_margin == doctest::Approx(-1.25));
  CHECK_FALSE(r2.necessary_lp);
  CHECK(condition_report(-0.125, 0.5, 0.0, 1, {4.0}).necessary_lp);
  CHECK(condition_report(-1.25, 0.5, 0.0, 1, {4.0}).sufficient_thm32);
  CHECK_FALSE(condition_report(-1.25, 0.5, 0.6, 1, {4.0}).sufficient_thm32);  // delta > rho

  CHECK(condition_report(0.0, 0.5, 0.0, 2, {2.0}).sufficient_margin == doctest::Approx(-1.75));

  const ConditionReport mixed = condition_report(-0.2, 0.5, 0.0, 2, {4.0, 2.0, 1.25});
  REQUIRE(mixed.necessary_margins.size() == 3);
  CHECK(mixed.necessary_margins[1] == doctest::Approx(0.2));

  const double eps = 0.0625;
  CHECK(condition_report(-0.3 - eps, 0.4, 0.0, 2, {3.0}).necessary_margins[0] -
            condition_report(-0.3, 0.4, 0.0, 2, {3.0}).necessary_margins[0] ==
        doctest::Approx(eps).epsilon(1e-14));
  CHECK_THROWS_AS(condition_report(0.0, 1.5, 0.0, 1, {2.0}), InvalidInput);
}

namespace {

// Brute force over even integers 0..60 for the minimal solution.
std::optional<SmoothnessBudget> brute_force_budget(int d, double m, double rho, double delta) {
  const double one = 1.0 - delta;
  const double fe = 2.0 * std::floor(d / 2.0);
  SmoothnessBudget b{d, m, rho, delta, -1, -1, 0, -1};
  for (int v = 0; v <= 60 && b.N < 0; v += 2)
    if (v > ((3.0 - delta) * d + (5.0 - delta) * one) / (one * one)) b.N = v;
  for (int v = 0; v <= 60 && b.Nprime < 0; v += 2)
    if (v > 6.0 * d + 12.0 && v >= d + 1.0 && v > (d + m + 1.0) / rho) b.Nprime = v;
  if (b.N < 0 || b.Nprime < 0) return std::nullopt;
  if (!(b.N > (d + (fe + 2.0) * delta) / one) || !(b.N >= (-m + one * d + (fe + 2.0) * delta) / one))
    return std::nullopt;
  for (int v = 0; v <= 60 && b.Mprime < 0; v += 2)
    if (b.Nprime - v >= fe + 2.0 && v >= d + 1.0 && v > (d + m + 1.0) / rho && v >= d) b.Mprime = v;
  if (b.Mprime < 0) return std::nullopt;
  return b;
}

}  // namespace

TEST_CASE("smoothness budget") {
  const SmoothnessBudget b1 = smoothness_budget(1, 0.0, 1.0, 0.0);
  CHECK(b1.N == 10);
  CHECK(b1.Nprime == 20);
  CHECK(b1.M == 0);
  CHECK(b1.Mprime == 4);
  const SmoothnessBudget b2 = smoothness_budget(2, 0.0, 1.0, 0.5);
  CHECK(b2.N == 30);
  CHECK(b2.Nprime == 26);

  for (int d = 1; d <= 3; ++d)
    for (double m : {-3.0, -1.0, -0.5, 0.0, 1.0, 2.5})
      for (double rho : {0.25, 0.5, 0.75, 1.0})
        for (double delta : {0.0, 0.2, 0.5, 0.6}) {
          CAPTURE(d);
          CAPTURE(m);
          CAPTURE(rho);
          CAPTURE(delta);
          const auto oracle = brute_force_budget(d, m, rho, delta);
          if (!oracle) {
            CHECK_THROWS_AS(smoothness_budget(d, m, rho, delta), InfeasibleBudget);
            continue;
          }
          const SmoothnessBudget b = smoothness_budget(d, m, rho, delta);
          CHECK(b.N == oracle->N);
          CHECK(b.Nprime == oracle->Nprime);
          CHECK(b.M == 0);
          CHECK(b.Mprime == oracle->Mprime);
          CHECK(budget_violations(b).empty());
        }

  for (double delta : {0.0, 0.3, 0.6}) CHECK(smoothness_budget(1, 0.0, 1.0, delta).Nprime == 20);

  SmoothnessBudget bad = b1;
  bad.Mprime = 20;
  const auto v = budget_violations(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "N' - M' >= floor_even(d) + 2");
  bad = b1;
  bad.N = 9;
  CHECK(budget_violations(bad) == std::vector<std::string>{"derivative counts must be even and nonnegative"});
  bad.N = 8;
  CHECK(budget_violations(bad) ==
        std::vector<std::string>{"N > ((3 - delta) d + (5 - delta)(1 - delta)) / (1 - delta)^2"});

  CHECK_THROWS_AS(smoothness_budget(1, 20.0, 1.0, 0.0), InfeasibleBudget);
  try {
    smoothness_budget(1, 20.0, 1.0, 0.0);
  } catch (const InfeasibleBudget& e) {
    CHECK_FALSE(e.binding().empty());
  }
  CHECK_THROWS_AS(smoothness_budget(1, -100.0, 1.0, 0.0), InfeasibleBudget);
  CHECK_THROWS_AS(smoothness_budget(1, 0.0, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(smoothness_budget(4, 0.0, 1.0, 0.0), InvalidInput);
  CHECK(floor_even(3.0) == 2);
  CHECK(floor_even(2.0) == 2);
  CHECK(floor_even(1.0) == 0);
}
