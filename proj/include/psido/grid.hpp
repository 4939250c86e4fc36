#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace psido {

using Complex = std::complex<double>;

/// Uniform periodic grid on the box [-R, R)^d with n points per axis.
///
/// Spatial samples sit at x_k = -R + k h, h = 2R/n. The DFT-dual frequency
/// grid has spacing pi/R and is stored in FFT order: index j < n/2 maps to
/// j*pi/R, index j >= n/2 maps to (j - n)*pi/R, so the Nyquist index n/2
/// carries the frequency -pi n / (2R).
///
/// Flat indices are row-major with x_1 slowest.
class Grid {
 public:
  static constexpr std::size_t kMaxPoints = std::size_t{1} << 28;

  Grid(int dim, std::size_t points_per_axis, double half_extent);

  int dim() const noexcept { return dim_; }
  std::size_t points_per_axis() const noexcept { return n_; }
  double half_extent() const noexcept { return half_extent_; }
  std::size_t size() const noexcept { return size_; }

  double spacing() const noexcept { return 2.0 * half_extent_ / static_cast<double>(n_); }
  double frequency_spacing() const noexcept;
  double nyquist() const noexcept;
  /// h^d
  double cell_volume() const noexcept;

  double coordinate(std::size_t k) const noexcept { return -half_extent_ + static_cast<double>(k) * spacing(); }
  double frequency(std::size_t j) const noexcept;
  /// Signed integer frequency index for axis index j (FFT order).
  long signed_index(std::size_t j) const noexcept;

  void unravel(std::size_t flat, std::span<std::size_t> index) const noexcept;
  std::size_t ravel(std::span<const std::size_t> index) const noexcept;
  void point(std::size_t flat, std::span<double> x) const noexcept;
  void frequency_point(std::size_t flat, std::span<double> xi) const noexcept;

  /// Axis index of coordinate value v if it lies on the grid (within a
  /// 1e-9 h tolerance); returns false otherwise.
  bool locate(double v, std::size_t& k) const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_extent_ == b.half_extent_;
  }

 private:
  int dim_;
  std::size_t n_;
  double half_extent_;
  std::size_t size_;
};

/// Complex samples of a function on a Grid. Values are finite on
/// construction; mutable access is the caller's responsibility.
class SampledFunction {
 public:
  explicit SampledFunction(Grid grid);
  SampledFunction(Grid grid, std::vector<Complex> values);

  template <class Fn>
  static SampledFunction sample(const Grid& grid, Fn&& fn) {
    std::vector<Complex> values(grid.size());
    std::vector<double> x(static_cast<std::size_t>(grid.dim()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid.point(i, x);
      values[i] = Complex(fn(std::span<const double>(x)));
    }
    return SampledFunction(grid, std::move(values));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  Complex operator[](std::size_t i) const noexcept { return values_[i]; }
  Complex& operator[](std::size_t i) noexcept { return values_[i]; }

  /// Throws InvalidInput if any sample is NaN or infinite.
  void require_finite() const;

 private:
  Grid grid_;
  std::vector<Complex> values_;
};

enum class Direction { forward, inverse };

/// forward: u_hat(xi) = integral exp(-i x.xi) u(x) dx on the frequency grid.
/// inverse: (2 pi)^{-d} integral exp(i x.xi) v(xi) dxi on the spatial grid.
/// The pair is an exact roundtrip up to floating point.
SampledFunction fourier_transform(const SampledFunction& f, Direction direction);

/// h^d * sum of samples (left-endpoint rule on the periodic box).
Complex quadrature(const SampledFunction& f);

/// (pi/R)^d * sum of samples: the Riemann sum for data on the frequency grid.
Complex frequency_quadrature(const SampledFunction& F);

/// |x|_p for p in [1, inf]; p = infinity gives max |x_i|.
double vector_pnorm(std::span<const double> x, double p);

/// (1 + |xi|^2)^{1/2}
double japanese_bracket(std::span<const double> xi);

}  // namespace psido
