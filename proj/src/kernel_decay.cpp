#include "psido/kernel_decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "psido/errors.hpp"
#include "psido/parallel.hpp"

namespace psido {
namespace {

// Slope of the least-squares line through (x_i, y_i).
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

}  // namespace

double minimal_decay_gain(int dim, const SymbolClassParams& c, int alpha_order, int beta_order) {
  if (!(c.rho > 0.0)) throw InvalidInput("the kernel estimate requires rho > 0");
  const double a = dim + c.m + c.delta * alpha_order + beta_order;
  return (1.0 - c.rho) * std::max(0.0, std::floor(a / c.rho) + 1.0);
}

double KernelDecayParams::predicted_exponent(int dim, const SymbolClassParams& c) const {
  return -dim - c.m - c.delta * alpha.order() - beta.order() - L;
}

void KernelDecayParams::validate(int dim, const SymbolClassParams& c) const {
  if (alpha.size() != static_cast<std::size_t>(dim) || beta.size() != static_cast<std::size_t>(dim))
    throw InvalidInput("decay multi-indices must have length d");
  if (!(L >= 0.0) || !std::isfinite(L)) throw InvalidInput("decay gain L must be finite and >= 0");
  const double need = minimal_decay_gain(dim, c, alpha.order(), beta.order());
  if (L < need) throw InvalidInput("L = " + std::to_string(L) + " is below the admissible minimum " + std::to_string(need));
  if (!(-predicted_exponent(dim, c) > 0.0)) throw InvalidInput("d + m + delta|alpha| + |beta| + L must be positive");
}

DecayFit decay_fit(const Kernel& k, double z_lo, double z_hi, const KernelDecayParams& params, std::size_t shells) {
  const Grid& g = k.grid();
  params.validate(g.dim(), k.params);
  if (shells < 2) throw InvalidInput("decay fit needs at least two shells");
  if (!(z_lo >= 2.0 * g.spacing() * (1.0 - 1e-12)) || !(z_lo < z_hi) || !(z_hi <= 0.5 * g.half_extent()))
    throw InvalidInput("window must satisfy 2h <= z_lo < z_hi <= R/2");

  const SampledFunction values = params.beta.order() > 0 ? spectral_derivative(k.values, params.beta) : k.values;

  DecayFit fit;
  fit.predicted_exponent = params.predicted_exponent(g.dim(), k.params);
  std::vector<double> best(shells, 0.0), witness(shells, 0.0);
  std::vector<double> z(static_cast<std::size_t>(g.dim()));
  const double log_span = std::log(z_hi / z_lo);
  bool any_point = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, z);
    const double r = norm2(z);
    if (r < z_lo || r > z_hi) continue;
    any_point = true;
    const double a = std::abs(values[i]);
    fit.envelope = std::max(fit.envelope, a * std::pow(r, -fit.predicted_exponent));
    const auto s = std::min(shells - 1, static_cast<std::size_t>(static_cast<double>(shells) * std::log(r / z_lo) / log_span));
    if (a > best[s]) {
      best[s] = a;
      witness[s] = r;
    }
  }
  if (!any_point) throw InvalidInput("window contains no grid points");

  std::vector<double> lx, ly;
  for (std::size_t s = 0; s < shells; ++s) {
    if (best[s] > 0.0) {
      fit.shell_radius.push_back(witness[s]);
      fit.shell_max.push_back(best[s]);
      lx.push_back(std::log(witness[s]));
      ly.push_back(std::log(best[s]));
    }
  }
  fit.degenerate = lx.size() < 2;
  fit.slope = fit.degenerate ? std::numeric_limits<double>::quiet_NaN() : ls_slope(lx, ly);
  fit.pass = std::isfinite(fit.envelope);
  return fit;
}

EnvelopeReport dyadic_envelope_check(const DyadicDecomposition& dd, int M, const MultiIndex& alpha,
                                     const MultiIndex& beta, double factor, std::optional<std::span<const double>> x) {
  const Grid& g = dd.grid();
  const Symbol& s = dd.symbol();
  const SymbolClassParams& c = s.params();
  const auto d = static_cast<std::size_t>(g.dim());
  if (M < 0 || M > c.Nprime) throw InvalidInput("M must lie in [0, N'] = [0, " + std::to_string(c.Nprime) + "]");
  if (alpha.size() != d || beta.size() != d) throw InvalidInput("multi-indices must have length d");
  if (beta.order() > 2) throw InvalidInput("spectral z-derivatives are limited to |beta| <= 2");
  if (alpha.order() > c.N) throw InvalidInput("|alpha| exceeds the claimed N");
  if (!(factor >= 1.0)) throw InvalidInput("envelope factor must be >= 1");

  EnvelopeReport report;
  report.factor = factor;
  report.predicted_growth = g.dim() + c.m + c.delta * alpha.order() + beta.order() - c.rho * M;

  const int J = dd.truncation();
  if (alpha.order() > 0 && !s.depends_on_x()) {
    for (int j = 1; j <= J; ++j) report.rows.push_back({j, 0.0, std::exp2(j * report.predicted_growth), 0.0});
    report.degenerate = true;
    report.pass = true;
    report.max_over_min = 1.0;
    report.growth_slope = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  // d_x^alpha sigma(x, .) on the frequency grid.
  SampledFunction base(g);
  if (alpha.order() == 0) {
    base = dd.full_symbol(x);
  } else {
    if (!x) throw InvalidInput("x-derivatives need an evaluation point");
    const double step = default_fd_step(alpha.order());
    const MultiIndex zero = MultiIndex::zero(g.dim());
    std::vector<double> xi(d);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.frequency_point(i, xi);
      base[i] = finite_diff_derivative(s, alpha, zero, *x, xi, step);
    }
  }
  // (i xi)^beta, dropping the unpaired Nyquist mode for odd orders.
  if (beta.order() > 0) {
    const std::size_t n = g.points_per_axis();
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.unravel(i, idx);
      Complex f = 1.0;
      for (std::size_t a = 0; a < d; ++a) {
        if (beta[a] == 0) continue;
        f *= (idx[a] == n / 2 && beta[a] % 2 == 1) ? Complex(0.0) : std::pow(Complex(0.0, g.frequency(idx[a])), beta[a]);
      }
      base[i] *= f;
    }
  }

  std::vector<double> radius_pow(g.size());
  {
    std::vector<double> z(d);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.point(i, z);
      radius_pow[i] = M == 0 ? 1.0 : std::pow(norm2(z), M);
    }
  }

  report.rows.resize(static_cast<std::size_t>(J));
  parallel_for(
      static_cast<std::size_t>(J),
      [&](std::size_t r) {
        const int j = static_cast<int>(r) + 1;
        SampledFunction piece(g);
        const auto w = dd.weights(j);
        for (std::size_t i = 0; i < g.size(); ++i) piece[i] = base[i] * w[i];
        const SampledFunction kj = fourier_transform(piece, Direction::inverse);
        double sup = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) sup = std::max(sup, radius_pow[i] * std::abs(kj[i]));
        const double scale = std::exp2(j * report.predicted_growth);
        report.rows[r] = {j, sup, scale, sup / scale};
      },
      1);

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::vector<double> js, logs;
  for (const auto& row : report.rows) {
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    if (row.sup > 0.0) {
      js.push_back(row.j);
      logs.push_back(std::log2(row.sup));
    }
  }
  report.degenerate = hi == 0.0;
  report.max_over_min = report.degenerate ? 1.0 : hi / lo;
  report.growth_slope = js.size() >= 2 ? ls_slope(js, logs) : std::numeric_limits<double>::quiet_NaN();
  report.pass = report.degenerate || (std::isfinite(report.max_over_min) && report.max_over_min <= factor);
  return report;
}

}  // namespace psido
