#include "psido/mixed_norm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psido/errors.hpp"

namespace psido {
namespace {

void check_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw InvalidInput("mixed-norm exponents must lie in (1, inf), got " + std::to_string(p));
}

std::size_t power(std::size_t n, int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= n;
  return r;
}

std::vector<double> magnitudes(const SampledFunction& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
  return out;
}

// One level: L^p over the slowest remaining axis of a row-major block.
std::vector<double> reduce_slowest(const std::vector<double>& a, std::size_t n, double h, double p) {
  const std::size_t stride = a.size() / n;
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, v);
  std::vector<double> out(stride, 0.0);
  if (scale == 0.0) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = a.data() + i * stride;
    if (p == 1.0) {
      for (std::size_t r = 0; r < stride; ++r) out[r] += row[r] / scale;
    } else {
      for (std::size_t r = 0; r < stride; ++r) out[r] += std::pow(row[r] / scale, p);
    }
  }
  for (double& v : out) v = scale * std::pow(h * v, 1.0 / p);
  return out;
}

}  // namespace

MixedExponent::MixedExponent(std::vector<double> p, std::optional<int> split) : p_(std::move(p)), split_(split) {
  if (p_.empty() || p_.size() > 3) throw InvalidInput("mixed exponent must have 1 to 3 components");
  for (double v : p_) check_exponent(v);
  if (split_ && (*split_ < 0 || *split_ > dim() - 1))
    throw InvalidInput("split index l must lie in {0, ..., d-1}, got " + std::to_string(*split_));
}

MixedExponent MixedExponent::uniform(int dim, double p) {
  if (dim < 1) throw InvalidInput("dimension must be positive");
  return MixedExponent(std::vector<double>(static_cast<std::size_t>(dim), p));
}

int MixedExponent::split_or_throw() const {
  if (!split_) throw InvalidInput("mixed exponent has no split index");
  return *split_;
}

std::span<const double> MixedExponent::leading() const {
  return std::span<const double>(p_.data(), static_cast<std::size_t>(split_or_throw()));
}

MixedExponent MixedExponent::with_split(int l) const {
  MixedExponent out(p_, l);
  out.conjugate_ = conjugate_;
  return out;
}

namespace detail {

std::vector<double> reduce_leading(const Grid& grid, std::vector<double> values, std::span<const double> exps) {
  if (exps.size() > static_cast<std::size_t>(grid.dim())) throw InvalidInput("more exponents than axes");
  for (double p : exps)
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("iterated norm exponents must be finite and >= 1");
  for (double p : exps) values = reduce_slowest(values, grid.points_per_axis(), grid.spacing(), p);
  return values;
}

}  // namespace detail

double mixed_norm(const SampledFunction& f, const MixedExponent& p) {
  if (p.dim() != f.grid().dim()) throw InvalidInput("exponent dimension does not match grid");
  return detail::reduce_leading(f.grid(), magnitudes(f), p.components()).front();
}

std::vector<double> partial_norms(const SampledFunction& f, std::span<const double> leading) {
  const Grid& g = f.grid();
  if (leading.size() >= static_cast<std::size_t>(g.dim())) throw InvalidInput("split index must be below d");
  for (double p : leading) check_exponent(p);
  return detail::reduce_leading(g, magnitudes(f), leading);
}

double partial_norm(const SampledFunction& f, const MixedExponent& pbar, std::span<const double> xprime) {
  const Grid& g = f.grid();
  if (pbar.dim() != g.dim()) throw InvalidInput("exponent dimension does not match grid");
  const int l = pbar.split_or_throw();
  if (xprime.size() != static_cast<std::size_t>(g.dim() - l))
    throw InvalidInput("x' must have d - l = " + std::to_string(g.dim() - l) + " coordinates");

  std::size_t outer = 0;
  for (double v : xprime) {
    std::size_t k = 0;
    if (!g.locate(v, k)) throw InvalidInput("x' coordinate " + std::to_string(v) + " is not a grid point");
    outer = outer * g.points_per_axis() + k;
  }
  if (l == 0) return std::abs(f[outer]);

  const std::size_t stride = power(g.points_per_axis(), g.dim() - l);
  const std::size_t inner = power(g.points_per_axis(), l);
  std::vector<double> slice(inner);
  for (std::size_t i = 0; i < inner; ++i) slice[i] = std::abs(f[i * stride + outer]);
  const Grid inner_grid(l, g.points_per_axis(), g.half_extent());
  return detail::reduce_leading(inner_grid, std::move(slice), pbar.leading()).front();
}

double pbar_one_norm(const SampledFunction& f, const MixedExponent& pbar) {
  if (pbar.dim() != f.grid().dim()) throw InvalidInput("exponent dimension does not match grid");
  const auto norms = partial_norms(f, pbar.leading());
  double s = 0.0;
  for (double v : norms) s += v;
  return s * std::pow(f.grid().spacing(), f.grid().dim() - pbar.split_or_throw());
}

MixedExponent holder_dual(const MixedExponent& p) {
  std::vector<double> q = p.conjugate_;
  if (q.empty()) {
    q.resize(p.p_.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = p[i] / (p[i] - 1.0);
  }
  MixedExponent out(std::move(q), p.split());
  out.conjugate_ = p.p_;
  return out;
}

SampledFunction dual_element(const SampledFunction& f, const MixedExponent& p) {
  const Grid& g = f.grid();
  if (p.dim() != g.dim()) throw InvalidInput("exponent dimension does not match grid");
  const std::size_t n = g.points_per_axis();
  const int d = g.dim();

  std::vector<double> level = magnitudes(f);
  double scale = 0.0;
  for (double v : level) scale = std::max(scale, v);
  SampledFunction out(g);
  if (scale == 0.0) return out;
  for (double& v : level) v /= scale;

  // levels[k] holds N_k over the trailing d-k axes.
  std::vector<std::vector<double>> levels{level};
  for (int k = 0; k < d; ++k)
    levels.push_back(reduce_slowest(levels.back(), n, g.spacing(), p[static_cast<std::size_t>(k)]));

  for (std::size_t i = 0; i < f.size(); ++i) {
    if (levels[0][i] == 0.0) continue;
    double w = 1.0;
    std::size_t idx = i;
    for (int k = 1; k <= d; ++k) {
      const std::size_t prev = idx;
      idx %= levels[static_cast<std::size_t>(k)].size();
      const double num = levels[static_cast<std::size_t>(k - 1)][prev];
      const double den = levels[static_cast<std::size_t>(k)][idx];
      w *= std::pow(num / den, p[static_cast<std::size_t>(k - 1)] - 1.0);
    }
    out[i] = (f[i] / std::abs(f[i])) * w;
  }
  return out;
}

}  // namespace psido
