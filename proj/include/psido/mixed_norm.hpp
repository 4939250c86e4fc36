#pragma once

#include <optional>
#include <span>
#include <vector>

#include "psido/grid.hpp"

namespace psido {

/// Exponent vector p in (1, inf)^d for the iterated norm
/// ||f||_p = || ... || f ||_{L^{p_1}(dx_1)} ... ||_{L^{p_d}(dx_d)}.
///
/// The optional split l marks the leading block x_bar = (x_1, ..., x_l) and
/// its exponents p_bar = (p_1, ..., p_l); x' = (x_{l+1}, ..., x_d) is the
/// trailing block. l = 0 means p_bar is empty.
class MixedExponent {
 public:
  explicit MixedExponent(std::vector<double> p, std::optional<int> split = std::nullopt);
  static MixedExponent uniform(int dim, double p);

  int dim() const noexcept { return static_cast<int>(p_.size()); }
  const std::vector<double>& components() const noexcept { return p_; }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  const std::optional<int>& split() const noexcept { return split_; }
  /// Split index, or throws InvalidInput if none is set.
  int split_or_throw() const;
  /// p_bar = (p_1, ..., p_l); requires a split.
  std::span<const double> leading() const;

  MixedExponent with_split(int l) const;

  friend bool operator==(const MixedExponent& a, const MixedExponent& b) {
    return a.p_ == b.p_ && a.split_ == b.split_;
  }

 private:
  friend MixedExponent holder_dual(const MixedExponent& p);

  std::vector<double> p_;
  std::optional<int> split_;
  // Exponents this one was conjugated from, so that conjugating twice
  // returns the original values bit for bit.
  std::vector<double> conjugate_;
};

/// Iterated Riemann-sum norm, x_1 innermost.
double mixed_norm(const SampledFunction& f, const MixedExponent& p);

/// ||f(., x')||_{p_bar} for the grid point x' (length d - l). For l = 0 this
/// is |f(x')|. x' must lie on the grid.
double partial_norm(const SampledFunction& f, const MixedExponent& pbar, std::span<const double> xprime);

/// ||f(., x')||_{p_bar} for every x' on the outer grid, row-major over
/// (x_{l+1}, ..., x_d). `leading` holds p_bar (its length is l).
std::vector<double> partial_norms(const SampledFunction& f, std::span<const double> leading);

/// ||f||_{p_bar, 1} = integral of ||f(., x')||_{p_bar} dx'.
double pbar_one_norm(const SampledFunction& f, const MixedExponent& pbar);

/// Componentwise conjugate exponent p/(p-1); keeps the split. An involution:
/// holder_dual(holder_dual(p)) == p exactly.
MixedExponent holder_dual(const MixedExponent& p);

/// The norming element g of f: <f, g> = h^d sum f conj(g) = ||f||_p and
/// ||g||_{p'} = 1 (g = 0 when f = 0).
SampledFunction dual_element(const SampledFunction& f, const MixedExponent& p);

namespace detail {
/// Iterated norm over the leading exps.size() axes with exponents >= 1,
/// returning the n^{d-k} remaining values (row-major).
std::vector<double> reduce_leading(const Grid& grid, std::vector<double> magnitudes, std::span<const double> exps);
}  // namespace detail

}  // namespace psido
