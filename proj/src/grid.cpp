#include "psido/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "psido/errors.hpp"

namespace psido {

Grid::Grid(int dim, std::size_t points_per_axis, double half_extent)
    : dim_(dim), n_(points_per_axis), half_extent_(half_extent), size_(1) {
  if (dim < 1 || dim > 3) throw InvalidInput("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
  if (n_ < 8 || n_ % 2 != 0)
    throw InvalidInput("points per axis must be even and >= 8, got " + std::to_string(n_));
  if (!(half_extent > 0.0) || !std::isfinite(half_extent)) throw InvalidInput("half extent must be positive and finite");
  for (int a = 0; a < dim_; ++a) {
    if (size_ > kMaxPoints / n_) throw InvalidInput("grid has more than 2^28 points");
    size_ *= n_;
  }
}

double Grid::frequency_spacing() const noexcept { return std::numbers::pi / half_extent_; }

double Grid::nyquist() const noexcept {
  return std::numbers::pi * static_cast<double>(n_) / (2.0 * half_extent_);
}

double Grid::cell_volume() const noexcept { return std::pow(spacing(), dim_); }

long Grid::signed_index(std::size_t j) const noexcept {
  const long jl = static_cast<long>(j);
  const long nl = static_cast<long>(n_);
  return jl < nl / 2 ? jl : jl - nl;
}

double Grid::frequency(std::size_t j) const noexcept {
  return static_cast<double>(signed_index(j)) * frequency_spacing();
}

void Grid::unravel(std::size_t flat, std::span<std::size_t> index) const noexcept {
  for (int a = dim_ - 1; a >= 0; --a) {
    index[static_cast<std::size_t>(a)] = flat % n_;
    flat /= n_;
  }
}

std::size_t Grid::ravel(std::span<const std::size_t> index) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + index[static_cast<std::size_t>(a)];
  return flat;
}

void Grid::point(std::size_t flat, std::span<double> x) const noexcept {
  for (int a = dim_ - 1; a >= 0; --a) {
    x[static_cast<std::size_t>(a)] = coordinate(flat % n_);
    flat /= n_;
  }
}

void Grid::frequency_point(std::size_t flat, std::span<double> xi) const noexcept {
  for (int a = dim_ - 1; a >= 0; --a) {
    xi[static_cast<std::size_t>(a)] = frequency(flat % n_);
    flat /= n_;
  }
}

bool Grid::locate(double v, std::size_t& k) const noexcept {
  const double h = spacing();
  const double s = (v + half_extent_) / h;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(n_)) return false;
  k = static_cast<std::size_t>(r);
  return true;
}

SampledFunction::SampledFunction(Grid grid) : grid_(grid), values_(grid.size()) {}

SampledFunction::SampledFunction(Grid grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidInput("sample count " + std::to_string(values_.size()) + " does not match grid size " +
                       std::to_string(grid_.size()));
  require_finite();
}

void SampledFunction::require_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
      throw InvalidInput("non-finite sample at flat index " + std::to_string(i));
  }
}

Complex quadrature(const SampledFunction& f) {
  double re = 0.0;
  double im = 0.0;
  for (const Complex& v : f.values()) {
    re += v.real();
    im += v.imag();
  }
  const double w = f.grid().cell_volume();
  return {w * re, w * im};
}

Complex frequency_quadrature(const SampledFunction& F) {
  double re = 0.0;
  double im = 0.0;
  for (const Complex& v : F.values()) {
    re += v.real();
    im += v.imag();
  }
  const double w = std::pow(F.grid().frequency_spacing(), F.grid().dim());
  return {w * re, w * im};
}

double vector_pnorm(std::span<const double> x, double p) {
  if (!(p >= 1.0)) throw InvalidInput("p-norm requires p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

double japanese_bracket(std::span<const double> xi) {
  double s = 1.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

}  // namespace psido
