#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "psido/dyadic.hpp"
#include "psido/errors.hpp"
#include "psido/operators.hpp"
#include "psido/symbols.hpp"
#include "test_support.hpp"

using namespace psido;
using psido::testing::max_abs;
using psido::testing::max_abs_diff;

namespace {

const Complex I(0.0, 1.0);

double bracket2(double xi) { return 1.0 + xi * xi; }

Symbol inverse_bracket_squared() {
  return Symbol::multiplier(
      [](std::span<const double> xi) {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return Complex(1.0 / (1.0 + r2));
      },
      {-2.0, 1.0, 0.0, 4, 4}, "bracket^-2");
}

std::vector<Symbol> builtins() {
  return {Symbol::constant(1.0),
          bessel_symbol(-1.0),
          bessel_symbol(1.0),
          wave_symbol(0.0),
          fourier_series_multiplication(holder_coefficients(2, 8), 1.0, 2),
          separable_symbol(holder_coefficients(2, 6), 0.5, -1.0, 2),
          variable_bessel_symbol(-1.0, 0.5, 1.0)};
}

double smooth_bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

}  // namespace

TEST_CASE("identity, derivative and multiplication operators") {
  std::mt19937_64 rng(1);
  const Grid g(1, 256, 5.0);
  for (int i = 0; i < 5; ++i) {
    const SampledFunction f = psido::testing::random_bandlimited(g, rng);
    CHECK(max_abs_diff(apply_psido(Symbol::constant(1.0), f), f) <= 1e-10);
  }

  const Grid gp(1, 64, std::numbers::pi);
  const auto s = SampledFunction::sample(gp, [](std::span<const double> x) { return std::sin(x[0]); });
  const auto c = SampledFunction::sample(gp, [](std::span<const double> x) { return std::cos(x[0]); });
  const Symbol d = Symbol::multiplier([](std::span<const double> xi) { return I * xi[0]; }, {1.0, 1.0, 0.0, 4, 4}, "i xi");
  CHECK(max_abs_diff(apply_psido(d, s), c) <= 1e-10);

  const Grid g2(2, 32, 2.0);
  auto a = [](std::span<const double> x) { return Complex(std::cos(x[0]), x[1]); };
  const Symbol mult = Symbol::multiplication(a, {0.0, 1.0, 0.0, 4, 4}, "a");
  const SampledFunction f = psido::testing::random_noise(g2, rng);
  SampledFunction expected(g2);
  std::vector<double> x(2);
  for (std::size_t i = 0; i < g2.size(); ++i) {
    g2.point(i, x);
    expected[i] = a(x) * f[i];
  }
  CHECK(max_abs_diff(apply_psido(mult, f), expected) <= 1e-10);
}

TEST_CASE("bracket^-2 on a gaussian matches direct double quadrature") {
  // Oracle: f_hat(xi) = integral exp(-i y xi) f(y) dy and
  // T f(x) = (2 pi)^-1 integral exp(i x xi) <xi>^-2 f_hat(xi) dxi, both by
  // the trapezoid rule on [-12, 12] with step 0.01, independent of the grid.
  const double L = 12.0, step = 0.01;
  const int m = static_cast<int>(2.0 * L / step) + 1;
  std::vector<double> nodes(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) nodes[static_cast<std::size_t>(i)] = -L + i * step;
  auto weight = [&](int i) { return (i == 0 || i == m - 1) ? 0.5 * step : step; };
  std::vector<Complex> fhat(nodes.size());
  for (int j = 0; j < m; ++j) {
    Complex acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double y = nodes[static_cast<std::size_t>(i)];
      acc += weight(i) * std::polar(std::exp(-0.5 * y * y), -y * nodes[static_cast<std::size_t>(j)]);
    }
    fhat[static_cast<std::size_t>(j)] = acc;
  }

  const Grid g(1, 512, 24.0);
  const SampledFunction Tf = apply_psido(inverse_bracket_squared(), psido::testing::gaussian(g));
  std::mt19937_64 rng(16);
  std::uniform_int_distribution<std::size_t> pick(256 - 64, 256 + 64);
  double err = 0.0;
  for (int trial = 0; trial < 16; ++trial) {
    const std::size_t k = pick(rng);
    const double x = g.coordinate(k);
    Complex acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double xi = nodes[static_cast<std::size_t>(j)];
      acc += weight(j) * std::polar(1.0 / bracket2(xi), x * xi) * fhat[static_cast<std::size_t>(j)];
    }
    err = std::max(err, std::abs(acc / (2.0 * std::numbers::pi) - Tf[k]));
  }
  CHECK(err <= 1e-6);
}

TEST_CASE("apply reports non-finite symbol values") {
  const Grid g(1, 16, 1.0);
  const Symbol bad = Symbol::multiplier([](std::span<const double> xi) { return Complex(1.0 / xi[0]); }, {}, "1/xi");
  CHECK_THROWS_AS(apply_psido(bad, psido::testing::gaussian(g)), EvaluationError);
  const Grid big(2, 256, 1.0);
  CHECK_THROWS_AS(apply_psido(bessel_symbol(-1.0), SampledFunction(big), ApplyPath::direct), InvalidInput);
}

TEST_CASE("linearity and agreement of the fast and direct paths") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int d = 1; d <= 2; ++d) {
    const Grid g(d, d == 1 ? 128 : 16, 3.0);
    for (const Symbol& s : builtins()) {
      CAPTURE(s.name());
      const SampledFunction u = psido::testing::random_noise(g, rng);
      const SampledFunction v = psido::testing::random_noise(g, rng);
      const Complex a(normal(rng), normal(rng)), b(normal(rng), normal(rng));
      SampledFunction combo(g), expected(g);
      const SampledFunction Tu = apply_psido(s, u), Tv = apply_psido(s, v);
      for (std::size_t i = 0; i < g.size(); ++i) {
        combo[i] = a * u[i] + b * v[i];
        expected[i] = a * Tu[i] + b * Tv[i];
      }
      CHECK(max_abs_diff(apply_psido(s, combo), expected) <= 1e-12 * std::max(1.0, max_abs(expected)));
      CHECK(max_abs_diff(apply_psido(s, u, ApplyPath::direct), Tu) <= 1e-10 * std::max(1.0, max_abs(Tu)));
    }
  }
}

TEST_CASE("discrete adjoint satisfies the duality identity") {
  std::mt19937_64 rng(50);
  for (int d = 1; d <= 2; ++d) {
    const Grid g(d, d == 1 ? 64 : 16, 2.5);
    for (const Symbol& s : builtins()) {
      CAPTURE(s.name());
      for (int trial = 0; trial < 5; ++trial) {
        const SampledFunction u = psido::testing::random_noise(g, rng);
        const SampledFunction phi = psido::testing::random_noise(g, rng);
        const Complex lhs = discrete_pairing(apply_psido(s, u), phi);
        const Complex rhs = discrete_pairing(u, discrete_adjoint_apply(s, phi));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * psido::testing::l2(u) * psido::testing::l2(phi));
        // The direct path's adjoint must match as well.
        const Complex rhs_direct = discrete_pairing(u, discrete_adjoint_apply(s, phi, ApplyPath::direct));
        CHECK(std::abs(lhs - rhs_direct) <= 1e-12 * psido::testing::l2(u) * psido::testing::l2(phi));
      }
    }
  }

  const Grid g(1, 64, 2.0);
  auto a = [](std::span<const double> x) { return Complex(std::sin(x[0]), 1.0 + x[0]); };
  const SampledFunction phi = psido::testing::random_noise(g, rng);
  SampledFunction expected(g);
  std::vector<double> x(1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    expected[i] = std::conj(a(x)) * phi[i];
  }
  CHECK(max_abs_diff(discrete_adjoint_apply(Symbol::multiplication(a, {}, "a"), phi), expected) <= 1e-12);

  const Symbol s = inverse_bracket_squared();
  SampledFunction real(g);
  for (std::size_t i = 0; i < g.size(); ++i) real[i] = phi[i].real();
  CHECK(max_abs_diff(discrete_adjoint_apply(s, real), apply_psido(s, real)) <= 1e-10);
}

TEST_CASE("dyadic decomposition reconstructs the symbol and respects ring supports") {
  const Grid g(1, 512, 8.0);  // Nyquist 32 pi
  const int J = 5;
  const std::vector<double> x0{0.3};
  for (const Symbol& s : builtins()) {
    CAPTURE(s.name());
    const DyadicDecomposition dd(s, g, J);
    const SampledFunction rec = dd.reconstruction(x0);
    const SampledFunction full = dd.full_symbol(x0);
    const SampledFunction trunc = dd.truncated_symbol(x0);
    double err = 0.0, err_trunc = 0.0, outside = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err_trunc = std::max(err_trunc, std::abs(rec[i] - trunc[i]));
      if (std::abs(g.frequency(i)) <= std::ldexp(1.0, J)) err = std::max(err, std::abs(rec[i] - full[i]));
    }
    CHECK(err <= 1e-12);
    CHECK(err_trunc <= 1e-12);
    for (int j = 0; j <= J; ++j) {
      const SampledFunction piece = dd.piece(j, x0);
      const double lo = j == 0 ? 0.0 : std::ldexp(1.0, j - 1), hi = std::ldexp(1.0, j + 1);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = std::abs(g.frequency(i));
        if (r < lo || r > hi) outside = std::max(outside, std::abs(piece[i]));
      }
    }
    CHECK(outside == 0.0);
  }

  // Telescoping: the weights sum to eta(2^-J .) exactly on |xi| <= 2^J.
  for (double r = 0.0; r <= 64.0; r += 0.01) {
    double sum = 0.0;
    for (int j = 0; j <= J; ++j) sum += DyadicDecomposition::weight(j, r);
    CHECK(std::abs(sum - dyadic_cutoff(std::ldexp(r, -J))) <= 1e-12);
  }
  CHECK(dyadic_cutoff(1.0) == 1.0);
  CHECK(dyadic_cutoff(2.0) == 0.0);
  CHECK(ring_cutoff(0.5) == 0.0);
  CHECK(ring_cutoff(1.0) == 1.0);

  CHECK_THROWS_AS(DyadicDecomposition(bessel_symbol(-1.0), g, 0), InvalidInput);
  CHECK_THROWS_AS(DyadicDecomposition(bessel_symbol(-1.0), g, 10), InvalidInput);
  CHECK_THROWS_AS(DyadicDecomposition(variable_bessel_symbol(-1.0, 0.5, 1.0), g, 3).full_symbol(), InvalidInput);
}

TEST_CASE("kernel pieces") {
  const Grid g(1, 256, 8.0);
  const DyadicDecomposition one(Symbol::constant(1.0), g, 4);
  const Kernel k0 = kernel_piece(one, 0);
  CHECK(std::abs(quadrature(k0.values) - 1.0) <= 1e-10);
  CHECK(k0.piece == 0);

  const DyadicDecomposition dd(bessel_symbol(-1.0), g, 4);
  for (int j = 0; j <= 4; ++j) {
    const Kernel kj = kernel_piece(dd, j);
    double im = 0.0;
    for (const Complex& v : kj.values.values()) im = std::max(im, std::abs(v.imag()));
    CHECK(im <= 1e-12);
  }

  // Sum of pieces against the inverse transform of the truncated symbol.
  const std::vector<double> x0{0.7};
  for (const Symbol& s : builtins()) {
    CAPTURE(s.name());
    const DyadicDecomposition d(s, g, 4);
    SampledFunction sum(g);
    for (int j = 0; j <= 4; ++j) {
      const Kernel kj = kernel_piece(d, j, x0);
      for (std::size_t i = 0; i < g.size(); ++i) sum[i] += kj.values[i];
    }
    const SampledFunction expected = fourier_transform(d.truncated_symbol(x0), Direction::inverse);
    const double scale = std::max(1.0, max_abs(expected));
    CHECK(max_abs_diff(sum, expected) <= 1e-12 * scale);
    const Kernel ks = kernel_sum(d, x0);
    CHECK(max_abs_diff(ks.values, expected) <= 1e-12 * scale);
    CHECK(ks.truncation == 4);
  }

  CHECK(max_abs(kernel_sum(DyadicDecomposition(Symbol::constant(0.0), g, 4)).values) == 0.0);
  CHECK_THROWS_AS(kernel_piece(DyadicDecomposition(variable_bessel_symbol(-1.0, 0.5, 1.0), g, 3), 0), InvalidInput);
  CHECK_THROWS_AS(kernel_piece(dd, 5), InvalidInput);
}

TEST_CASE("bracket^-2 kernel matches exp(-|z|)/2") {
  const Grid g(1, 4096, 32.0);
  const Kernel k = kernel_sum(DyadicDecomposition(inverse_bracket_squared(), g, 8));
  double rel = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double z = std::abs(g.coordinate(i));
    if (z < 0.1 || z > 5.0) continue;
    const double exact = 0.5 * std::exp(-z);
    rel = std::max(rel, std::abs(k.values[i] - exact) / exact);
  }
  CHECK(rel <= 1e-4);
}

TEST_CASE("off-support representation") {
  const Grid g(1, 512, 16.0);
  const auto f = SampledFunction::sample(g, [](std::span<const double> x) { return smooth_bump(x[0]); });
  double f1 = 0.0;
  for (const Complex& v : f.values()) f1 += std::abs(v) * g.spacing();

  const Symbol s = inverse_bracket_squared();
  const DyadicDecomposition dd(s, g, default_truncation(g));
  const Kernel k = kernel_sum(dd);
  const SampledFunction Tf = apply_psido(s, f);
  std::size_t ix = 0;
  REQUIRE(g.locate(3.0, ix));
  CHECK(std::abs(offsupport_apply(k, f, std::vector<double>{3.0}) - Tf[ix]) <= 1e-4);

  // Everywhere both are defined.
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); i += 7) {
    const std::vector<double> x{g.coordinate(i)};
    if (distance_to_support(f, x) < 2.0 * g.spacing()) continue;
    worst = std::max(worst, std::abs(offsupport_apply(k, f, x) - Tf[i]));
  }
  CHECK(worst <= 1e-4);

  const Kernel id = kernel_sum(DyadicDecomposition(Symbol::constant(1.0), g, default_truncation(g)));
  for (double x : {2.0, 3.5, -4.0, 10.0})
    CHECK(std::abs(offsupport_apply(id, f, std::vector<double>{x})) <= 1e-3 * f1);

  CHECK_THROWS_AS(offsupport_apply(k, f, std::vector<double>{0.0}), PreconditionError);
  CHECK_THROWS_AS(offsupport_apply(k, f, std::vector<double>{1.0}), PreconditionError);
  CHECK_THROWS_AS(offsupport_apply(k, f, std::vector<double>{3.01}), InvalidInput);
  CHECK(distance_to_support(SampledFunction(g), std::vector<double>{0.0}) == INFINITY);
}

TEST_CASE("dyadic envelope of bracket^m kernels") {
  const Grid g(1, 2048, 16.0);
  for (double m : {-1.0, 0.0, 0.5}) {
    CAPTURE(m);
    const DyadicDecomposition dd(bessel_symbol(m), g, 6);
    double first = 0.0;
    for (int j = 1; j <= 6; ++j) {
      const double r = max_abs(kernel_piece(dd, j).values) / std::pow(2.0, j * (1.0 + m));
      if (j == 1) first = r;
      CHECK(r <= 3.0 * first);
    }
  }
}
