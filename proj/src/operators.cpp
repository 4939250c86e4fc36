#include "psido/operators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "psido/errors.hpp"
#include "psido/parallel.hpp"

namespace psido {
namespace {

void check_finite(const Symbol& s, Complex v, std::span<const double> x, std::span<const double> xi) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) eval_symbol(s, x, xi);  // throws with the witness
}

SampledFunction sample_spatial(const Symbol& s, const Grid& g) {
  std::vector<Complex> a(g.size());
  const std::vector<double> xi(static_cast<std::size_t>(g.dim()), 0.0);
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    g.point(k, x);
    a[k] = s.spatial_factor(x);
    check_finite(s, a[k], x, xi);
  }
  return SampledFunction(g, std::move(a));
}

SampledFunction sample_frequency(const Symbol& s, const Grid& g) {
  std::vector<Complex> b(g.size());
  const std::vector<double> x(static_cast<std::size_t>(g.dim()), 0.0);
  std::vector<double> xi(static_cast<std::size_t>(g.dim()));
  for (std::size_t j = 0; j < g.size(); ++j) {
    g.frequency_point(j, xi);
    b[j] = s.frequency_factor(xi);
    check_finite(s, b[j], x, xi);
  }
  return SampledFunction(g, std::move(b));
}

void check_direct_cap(const Grid& g) {
  if (g.points_per_axis() > direct_path_cap(g.dim()))
    throw InvalidInput("direct O(n^{2d}) path is capped at n = " + std::to_string(direct_path_cap(g.dim())) +
                       " for d = " + std::to_string(g.dim()) + ", got n = " + std::to_string(g.points_per_axis()));
}

// E[k * n + j] = exp(i x_k xi_j) for one axis; shared by all axes.
std::vector<Complex> phase_table(const Grid& g) {
  const std::size_t n = g.points_per_axis();
  std::vector<Complex> e(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      // x_k xi_j = pi s_j (k h / R - 1) with s_j the signed index; reduce the
      // integer part exactly before taking the exponential.
      const long s = g.signed_index(j);
      const long phase_num = (static_cast<long>(k) * s) % static_cast<long>(n);  // k s mod n
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase_num) / static_cast<double>(n) - std::numbers::pi * static_cast<double>(s);
      e[k * n + j] = std::polar(1.0, angle);
    }
  }
  return e;
}

Complex phase(const std::vector<Complex>& table, std::size_t n, std::span<const std::size_t> ik,
              std::span<const std::size_t> ij) {
  Complex p = 1.0;
  for (std::size_t a = 0; a < ik.size(); ++a) p *= table[ik[a] * n + ij[a]];
  return p;
}

// (2R)^{-d} sum_j exp(i x_k xi_j) sigma(x_k, xi_j) F_j
SampledFunction direct_apply(const Symbol& s, const SampledFunction& f) {
  const Grid& g = f.grid();
  check_direct_cap(g);
  const SampledFunction F = fourier_transform(f, Direction::forward);
  const std::size_t n = g.points_per_axis();
  const std::size_t d = static_cast<std::size_t>(g.dim());
  const auto table = phase_table(g);
  const double norm = std::pow(2.0 * g.half_extent(), -g.dim());

  std::vector<Complex> out(g.size());
  parallel_for(
      g.size(),
      [&](std::size_t k) {
        std::vector<std::size_t> ik(d), ij(d);
        std::vector<double> x(d), xi(d);
        g.unravel(k, ik);
        g.point(k, x);
        Complex acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
          if (F[j] == Complex(0.0)) continue;
          g.unravel(j, ij);
          g.frequency_point(j, xi);
          acc += phase(table, n, ik, ij) * eval_symbol(s, x, xi) * F[j];
        }
        out[k] = norm * acc;
      },
      16);
  return SampledFunction(g, std::move(out));
}

// G_j = h^d sum_k exp(-i x_k xi_j) conj(sigma(x_k, xi_j)) g_k, then inverse.
SampledFunction direct_adjoint(const Symbol& s, const SampledFunction& u) {
  const Grid& g = u.grid();
  check_direct_cap(g);
  const std::size_t n = g.points_per_axis();
  const std::size_t d = static_cast<std::size_t>(g.dim());
  const auto table = phase_table(g);
  const double w = g.cell_volume();

  std::vector<Complex> G(g.size());
  parallel_for(
      g.size(),
      [&](std::size_t j) {
        std::vector<std::size_t> ik(d), ij(d);
        std::vector<double> x(d), xi(d);
        g.unravel(j, ij);
        g.frequency_point(j, xi);
        Complex acc = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (u[k] == Complex(0.0)) continue;
          g.unravel(k, ik);
          g.point(k, x);
          acc += std::conj(phase(table, n, ik, ij) * eval_symbol(s, x, xi)) * u[k];
        }
        G[j] = w * acc;
      },
      16);
  return fourier_transform(SampledFunction(g, std::move(G)), Direction::inverse);
}

SampledFunction multiply(const SampledFunction& a, const SampledFunction& f, bool conjugate) {
  SampledFunction out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (conjugate ? std::conj(a[i]) : a[i]) * f[i];
  return out;
}

SampledFunction apply_multiplier(const SampledFunction& b, const SampledFunction& f, bool conjugate) {
  return fourier_transform(multiply(b, fourier_transform(f, Direction::forward), conjugate), Direction::inverse);
}

}  // namespace

std::size_t direct_path_cap(int dim) {
  switch (dim) {
    case 1: return 4096;
    case 2: return 128;
    default: return 32;
  }
}

SampledFunction sample_multiplier(const Symbol& s, const Grid& grid) {
  if (s.depends_on_x()) throw InvalidInput("symbol " + s.name() + " depends on x; not a multiplier");
  return sample_frequency(s, grid);
}

SampledFunction apply_psido(const Symbol& s, const SampledFunction& f, ApplyPath path) {
  f.require_finite();
  if (path == ApplyPath::direct) return direct_apply(s, f);
  const Grid& g = f.grid();
  if (const auto& c = s.constant_value()) {
    SampledFunction out(g);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = *c * f[i];
    return out;
  }
  switch (s.kind()) {
    case SymbolKind::multiplication: return multiply(sample_spatial(s, g), f, false);
    case SymbolKind::multiplier: return apply_multiplier(sample_frequency(s, g), f, false);
    case SymbolKind::separable:
      return multiply(sample_spatial(s, g), apply_multiplier(sample_frequency(s, g), f, false), false);
    case SymbolKind::general: break;
  }
  return direct_apply(s, f);
}

SampledFunction discrete_adjoint_apply(const Symbol& s, const SampledFunction& g, ApplyPath path) {
  g.require_finite();
  if (path == ApplyPath::direct) return direct_adjoint(s, g);
  const Grid& grid = g.grid();
  if (const auto& c = s.constant_value()) {
    SampledFunction out(grid);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::conj(*c) * g[i];
    return out;
  }
  switch (s.kind()) {
    case SymbolKind::multiplication: return multiply(sample_spatial(s, grid), g, true);
    case SymbolKind::multiplier: return apply_multiplier(sample_frequency(s, grid), g, true);
    case SymbolKind::separable:
      return apply_multiplier(sample_frequency(s, grid), multiply(sample_spatial(s, grid), g, true), true);
    case SymbolKind::general: break;
  }
  return direct_adjoint(s, g);
}

Complex discrete_pairing(const SampledFunction& u, const SampledFunction& v) {
  if (!(u.grid() == v.grid())) throw InvalidInput("pairing requires functions on the same grid");
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Complex t = u[i] * std::conj(v[i]);
    re += t.real();
    im += t.imag();
  }
  const double w = u.grid().cell_volume();
  return {w * re, w * im};
}

}  // namespace psido
