#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "psido/array_io.hpp"
#include "psido/errors.hpp"
#include "psido/grid.hpp"
#include "test_support.hpp"

using namespace psido;
using psido::testing::max_abs_diff;

TEST_CASE("grid geometry and validation") {
  const Grid g(1, 8, 1.0);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.coordinate(0) == -1.0);
  CHECK(g.coordinate(4) == 0.0);
  CHECK(g.frequency_spacing() == doctest::Approx(std::numbers::pi));
  CHECK(g.nyquist() == doctest::Approx(4.0 * std::numbers::pi));
  CHECK(g.frequency(1) == doctest::Approx(std::numbers::pi));
  CHECK(g.frequency(4) == doctest::Approx(-4.0 * std::numbers::pi));
  CHECK(g.frequency(7) == doctest::Approx(-std::numbers::pi));

  CHECK_THROWS_AS(Grid(1, 7, 1.0), InvalidInput);
  CHECK_THROWS_AS(Grid(1, 6, 1.0), InvalidInput);
  CHECK_THROWS_AS(Grid(4, 8, 1.0), InvalidInput);
  CHECK_THROWS_AS(Grid(1, 8, 0.0), InvalidInput);
  CHECK_THROWS_AS(Grid(3, 1024, 1.0), InvalidInput);  // 2^30 points
  CHECK_NOTHROW(Grid(2, 16384, 1.0));                 // exactly 2^28

  const Grid g3(3, 8, 2.0);
  std::vector<std::size_t> idx(3);
  g3.unravel(g3.ravel(std::vector<std::size_t>{1, 2, 3}), idx);
  CHECK(idx == std::vector<std::size_t>{1, 2, 3});
  CHECK(g3.ravel(std::vector<std::size_t>{1, 0, 0}) == 64);  // x_1 slowest

  std::size_t k = 0;
  CHECK(g.locate(0.25, k));
  CHECK(k == 5);
  CHECK_FALSE(g.locate(0.3, k));
  CHECK_FALSE(g.locate(1.0, k));
}

TEST_CASE("sampled function rejects bad data") {
  const Grid g(1, 8, 1.0);
  CHECK_THROWS_AS(SampledFunction(g, std::vector<Complex>(7)), InvalidInput);
  std::vector<Complex> v(8);
  v[3] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(SampledFunction(g, v), InvalidInput);
  v[3] = Complex(0.0, INFINITY);
  CHECK_THROWS_AS(SampledFunction(g, v), InvalidInput);
}

TEST_CASE("fourier roundtrip is the identity") {
  std::mt19937_64 rng(7);
  for (int d = 1; d <= 3; ++d) {
    const Grid g(d, d == 3 ? 16 : 64, 3.0);
    for (int trial = 0; trial < 5; ++trial) {
      const SampledFunction f = trial % 2 ? psido::testing::random_noise(g, rng) : psido::testing::random_bandlimited(g, rng);
      const SampledFunction back = fourier_transform(fourier_transform(f, Direction::forward), Direction::inverse);
      CHECK(max_abs_diff(back, f) <= 1e-12 * std::max(1.0, psido::testing::max_abs(f)));
    }
  }
}

TEST_CASE("forward transform matches the direct Riemann sum") {
  // Oracle: F(xi_j) = h sum_k exp(-i x_k xi_j) f_k evaluated term by term.
  std::mt19937_64 rng(11);
  const Grid g(1, 64, 2.5);
  const SampledFunction f = psido::testing::random_noise(g, rng);
  const SampledFunction F = fourier_transform(f, Direction::forward);
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) acc += std::polar(1.0, -g.coordinate(k) * g.frequency(j)) * f[k];
    err = std::max(err, std::abs(g.spacing() * acc - F[j]));
  }
  CHECK(err <= 1e-12);

  const Grid g2(2, 16, 1.5);
  const SampledFunction f2 = psido::testing::random_noise(g2, rng);
  const SampledFunction F2 = fourier_transform(f2, Direction::forward);
  std::vector<double> x(2), xi(2);
  double err2 = 0.0;
  for (std::size_t j = 0; j < g2.size(); ++j) {
    g2.frequency_point(j, xi);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < g2.size(); ++k) {
      g2.point(k, x);
      acc += std::polar(1.0, -(x[0] * xi[0] + x[1] * xi[1])) * f2[k];
    }
    err2 = std::max(err2, std::abs(g2.cell_volume() * acc - F2[j]));
  }
  CHECK(err2 <= 1e-12);
}

TEST_CASE("gaussian transform matches the analytic pair") {
  // exp(-x^2/2) <-> sqrt(2 pi) exp(-xi^2/2).
  const Grid g(1, 1024, 16.0);
  const SampledFunction F = fourier_transform(psido::testing::gaussian(g), Direction::forward);
  double rel6 = 0.0, abs8 = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double xi = g.frequency(j);
    const double exact = std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * xi * xi);
    if (std::abs(xi) <= 6.0) rel6 = std::max(rel6, std::abs(F[j] - exact) / exact);
    if (std::abs(xi) <= 8.0) abs8 = std::max(abs8, std::abs(F[j] - exact));
  }
  CHECK(rel6 <= 1e-8);
  // Near |xi| = 8 the exact value is 3e-14, below double-precision FFT
  // roundoff; the absolute error is the meaningful measure there.
  CHECK(abs8 <= 1e-14);
}

TEST_CASE("plancherel under the transform convention") {
  std::mt19937_64 rng(3);
  for (int d = 1; d <= 3; ++d) {
    const Grid g(d, d == 3 ? 16 : 64, 4.0);
    for (int trial = 0; trial < 4; ++trial) {
      const SampledFunction f = psido::testing::random_bandlimited(g, rng);
      const SampledFunction F = fourier_transform(f, Direction::forward);
      SampledFunction f2(g), F2(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        f2[i] = std::norm(f[i]);
        F2[i] = std::norm(F[i]);
      }
      const double lhs = quadrature(f2).real();
      const double rhs = std::pow(2.0 * std::numbers::pi, -d) * frequency_quadrature(F2).real();
      CHECK(std::abs(lhs - rhs) <= 1e-10 * lhs);
    }
  }
}

TEST_CASE("quadrature") {
  const Grid g(1, 8, 1.0);
  CHECK(quadrature(SampledFunction::sample(g, [](auto) { return 1.0; })).real() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(quadrature(SampledFunction(g)) == Complex(0.0));

  const Grid big(1, 1024, 16.0);
  const auto f = SampledFunction::sample(big, [](std::span<const double> x) { return std::exp(-x[0] * x[0]); });
  CHECK(std::abs(quadrature(f).real() - std::sqrt(std::numbers::pi)) <= 1e-10 * std::sqrt(std::numbers::pi));

  std::mt19937_64 rng(5);
  const Grid g2(2, 16, 1.0);
  const SampledFunction a = psido::testing::random_noise(g2, rng);
  const SampledFunction b = psido::testing::random_noise(g2, rng);
  SampledFunction conj_a(g2), combo(g2);
  const Complex c1(0.3, -1.2), c2(-2.0, 0.5);
  for (std::size_t i = 0; i < g2.size(); ++i) {
    conj_a[i] = std::conj(a[i]);
    combo[i] = c1 * a[i] + c2 * b[i];
  }
  CHECK(quadrature(conj_a) == std::conj(quadrature(a)));
  CHECK(std::abs(quadrature(combo) - (c1 * quadrature(a) + c2 * quadrature(b))) <= 1e-12);
}

TEST_CASE("vector p-norm and japanese bracket") {
  CHECK(vector_pnorm(std::vector<double>{3.0, 4.0}, 2.0) == doctest::Approx(5.0));
  CHECK(vector_pnorm(std::vector<double>{1.0, -1.0}, INFINITY) == 1.0);
  CHECK(vector_pnorm(std::vector<double>{1.0, 1.0, 1.0}, 1.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(vector_pnorm(std::vector<double>{1.0}, 0.5), InvalidInput);

  CHECK(japanese_bracket(std::vector<double>{0.0}) == 1.0);
  CHECK(japanese_bracket(std::vector<double>{3.0, 4.0}) == doctest::Approx(std::sqrt(26.0)));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a{normal(rng), normal(rng)}, b{normal(rng), normal(rng)};
    if (vector_pnorm(a, 2.0) > vector_pnorm(b, 2.0)) std::swap(a, b);
    CHECK(japanese_bracket(a) <= japanese_bracket(b));
  }
}

TEST_CASE("PSLB binary roundtrip and errors") {
  std::mt19937_64 rng(2);
  const Grid g(2, 8, 1.25);
  const SampledFunction f = psido::testing::random_noise(g, rng);
  std::stringstream buffer;
  write_pslb(buffer, f);
  CHECK(buffer.str().size() == 4 + 3 * 4 + 8 + 64 * 16);
  CHECK(buffer.str().substr(0, 4) == "PSLB");
  const SampledFunction back = read_pslb(buffer);
  CHECK(back.grid() == g);
  CHECK(max_abs_diff(back, f) == 0.0);

  std::stringstream bad("PSLX0000");
  CHECK_THROWS_AS(read_pslb(bad), InvalidInput);
  std::stringstream truncated(buffer.str().substr(0, 40));
  CHECK_THROWS_AS(read_pslb(truncated), InvalidInput);

  const auto dir = std::filesystem::temp_directory_path() / "psido_test_grid";
  std::filesystem::create_directories(dir);
  write_pslb(dir / "f.bin", f);
  CHECK(max_abs_diff(read_pslb(dir / "f.bin"), f) == 0.0);
  CHECK_THROWS_AS(read_pslb(dir / "missing.bin"), IoError);
  CHECK_THROWS_AS(write_pslb(dir / "no_such_dir" / "f.bin", f), IoError);

  std::stringstream csv;
  write_csv(csv, SampledFunction::sample(Grid(1, 8, 1.0), [](std::span<const double> x) { return x[0]; }));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "i1,re,im");
  std::string first;
  std::getline(csv, first);
  CHECK(first == "0,-1,0");
}
