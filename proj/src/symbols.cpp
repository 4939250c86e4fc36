#include "psido/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "psido/errors.hpp"
#include "psido/parallel.hpp"

namespace psido {
namespace {

constexpr int kMaxFdOrder = 8;

std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os << std::setprecision(17) << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Fornberg's recursion for finite-difference weights of the given
// derivative order at 0 on the integer offsets -half..half.
std::vector<double> central_weights(int order, int half) {
  const int npts = 2 * half + 1;
  std::vector<double> x(static_cast<std::size_t>(npts));
  for (int i = 0; i < npts; ++i) x[static_cast<std::size_t>(i)] = i - half;

  std::vector<std::vector<double>> c(static_cast<std::size_t>(npts), std::vector<double>(static_cast<std::size_t>(order) + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < npts; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[iu];
    for (int j = 0; j < i; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const double c3 = x[iu] - x[ju];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s) {
          const auto su = static_cast<std::size_t>(s);
          c[iu][su] = c1 * (s * c[iu - 1][su - 1] - c5 * c[iu - 1][su]) / c2;
        }
        c[iu][0] = -c1 * c5 * c[iu - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s) {
        const auto su = static_cast<std::size_t>(s);
        c[ju][su] = (c4 * c[ju][su] - s * c[ju][su - 1]) / c3;
      }
      c[ju][0] = c4 * c[ju][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(npts));
  for (int i = 0; i < npts; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(order)];
  return w;
}

// Fourth-order central stencil for derivative order k.
struct Stencil {
  int half;
  std::vector<double> weights;
};

const Stencil& stencil_for(int order) {
  static const std::vector<Stencil> table = [] {
    std::vector<Stencil> t;
    for (int k = 0; k <= kMaxFdOrder; ++k) {
      const int half = (k + 1) / 2 + 1;
      t.push_back({half, central_weights(k, half)});
    }
    return t;
  }();
  return table[static_cast<std::size_t>(order)];
}

struct AxisOrder {
  std::size_t coordinate;  // 0..d-1 for x, d..2d-1 for xi
  int order;
};

Complex differentiate(const Symbol& s, const std::vector<AxisOrder>& plan, std::size_t level,
                      std::vector<double>& point, std::size_t dim, double step) {
  if (level == plan.size()) {
    return eval_symbol(s, std::span<const double>(point.data(), dim), std::span<const double>(point.data() + dim, dim));
  }
  const auto& [coord, order] = plan[level];
  const Stencil& st = stencil_for(order);
  const double centre = point[coord];
  Complex acc = 0.0;
  for (int o = -st.half; o <= st.half; ++o) {
    const double w = st.weights[static_cast<std::size_t>(o + st.half)];
    if (w == 0.0) continue;
    point[coord] = centre + o * step;
    acc += w * differentiate(s, plan, level + 1, point, dim, step);
  }
  point[coord] = centre;
  return acc / std::pow(step, order);
}

}  // namespace

void SymbolClassParams::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("rho must lie in [0, 1]");
  if (!(delta >= 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in [0, 1)");
  if (!std::isfinite(m)) throw InvalidInput("order m must be finite");
  if (N < 0 || Nprime < 0) throw InvalidInput("derivative budgets N, N' must be nonnegative");
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_)
    if (e < 0) throw InvalidInput("multi-index entries must be nonnegative");
}

int MultiIndex::order() const noexcept { return std::accumulate(entries_.begin(), entries_.end(), 0); }

std::vector<MultiIndex> enumerate_multi_indices(int dim, int max_order) {
  std::vector<MultiIndex> out;
  std::vector<int> e(static_cast<std::size_t>(dim), 0);
  for (int total = 0; total <= max_order; ++total) {
    // compositions of `total` into dim nonnegative parts, lexicographic
    std::function<void(std::size_t, int)> rec = [&](std::size_t axis, int remaining) {
      if (axis + 1 == e.size()) {
        e[axis] = remaining;
        out.emplace_back(e);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        e[axis] = v;
        rec(axis + 1, remaining - v);
      }
    };
    rec(0, total);
  }
  return out;
}

const char* to_string(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::multiplier: return "multiplier";
    case SymbolKind::multiplication: return "multiplication";
    case SymbolKind::separable: return "separable";
    case SymbolKind::general: return "general";
  }
  return "unknown";
}

Symbol Symbol::multiplier(FrequencyFactor b, SymbolClassParams params, std::string name) {
  params.validate();
  Symbol s;
  s.kind_ = SymbolKind::multiplier;
  s.params_ = params;
  s.name_ = std::move(name);
  s.frequency_ = std::move(b);
  return s;
}

Symbol Symbol::multiplication(SpatialFactor a, SymbolClassParams params, std::string name) {
  params.validate();
  Symbol s;
  s.kind_ = SymbolKind::multiplication;
  s.params_ = params;
  s.name_ = std::move(name);
  s.spatial_ = std::move(a);
  return s;
}

Symbol Symbol::separable(SpatialFactor a, FrequencyFactor b, SymbolClassParams params, std::string name) {
  params.validate();
  Symbol s;
  s.kind_ = SymbolKind::separable;
  s.params_ = params;
  s.name_ = std::move(name);
  s.spatial_ = std::move(a);
  s.frequency_ = std::move(b);
  return s;
}

Symbol Symbol::general(Evaluator e, SymbolClassParams params, std::string name) {
  params.validate();
  Symbol s;
  s.kind_ = SymbolKind::general;
  s.params_ = params;
  s.name_ = std::move(name);
  s.general_ = std::move(e);
  return s;
}

Symbol Symbol::constant(Complex c, SymbolClassParams params) {
  std::ostringstream name;
  name << "const(" << c.real();
  if (c.imag() != 0.0) name << (c.imag() > 0 ? "+" : "") << c.imag() << "i";
  name << ')';
  Symbol s = multiplier([c](std::span<const double>) { return c; }, params, name.str());
  s.constant_ = c;
  return s;
}

Complex Symbol::operator()(std::span<const double> x, std::span<const double> xi) const {
  switch (kind_) {
    case SymbolKind::multiplier: return frequency_(xi);
    case SymbolKind::multiplication: return spatial_(x);
    case SymbolKind::separable: return spatial_(x) * frequency_(xi);
    case SymbolKind::general: return general_(x, xi);
  }
  return {};
}

Complex Symbol::spatial_factor(std::span<const double> x) const {
  if (kind_ == SymbolKind::general) throw InvalidInput("general symbols have no spatial factor");
  return spatial_ ? spatial_(x) : Complex(1.0);
}

Complex Symbol::frequency_factor(std::span<const double> xi) const {
  if (kind_ == SymbolKind::general) throw InvalidInput("general symbols have no frequency factor");
  return frequency_ ? frequency_(xi) : Complex(1.0);
}

Symbol Symbol::with_params(SymbolClassParams params) const {
  params.validate();
  Symbol s = *this;
  s.params_ = params;
  return s;
}

Complex eval_symbol(const Symbol& s, std::span<const double> x, std::span<const double> xi) {
  const Complex v = s(x, xi);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw EvaluationError("symbol " + s.name() + " is not finite at x=" + format_point(x) + ", xi=" + format_point(xi),
                          std::vector<double>(x.begin(), x.end()), std::vector<double>(xi.begin(), xi.end()));
  }
  return v;
}

Symbol bessel_symbol(double m) {
  return Symbol::multiplier([m](std::span<const double> xi) { return Complex(std::pow(japanese_bracket(xi), m)); },
                            {m, 1.0, 0.0, 4, 4}, "bessel(m=" + format_number(m) + ")");
}

Symbol wave_symbol(double m) {
  return Symbol::multiplier(
      [m](std::span<const double> xi) {
        const double b = japanese_bracket(xi);
        return std::polar(std::pow(b, m), b);
      },
      {m, 0.0, 0.0, 4, 4}, "wave(m=" + format_number(m) + ")");
}

namespace {

Symbol::SpatialFactor fourier_series(std::vector<Complex> coefficients, double omega) {
  if (coefficients.empty()) throw InvalidInput("Fourier series needs at least one coefficient");
  if (!std::isfinite(omega)) throw InvalidInput("Fourier series frequency must be finite");
  return [c = std::move(coefficients), omega](std::span<const double> x) {
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] * std::polar(1.0, static_cast<double>(k) * omega * s);
    return acc;
  };
}

}  // namespace

Symbol fourier_series_multiplication(std::vector<Complex> coefficients, double omega, int claimed_N) {
  const std::size_t terms = coefficients.size();
  return Symbol::multiplication(fourier_series(std::move(coefficients), omega), {0.0, 1.0, 0.0, claimed_N, 4},
                                "fourier-series(terms=" + std::to_string(terms) + ",omega=" + format_number(omega) + ")");
}

std::vector<Complex> holder_coefficients(int smoothness, std::size_t terms) {
  if (smoothness < 0) throw InvalidInput("smoothness must be nonnegative");
  std::vector<Complex> c(terms);
  for (std::size_t k = 0; k < terms; ++k) c[k] = std::pow(1.0 + static_cast<double>(k), -(smoothness + 1.5));
  return c;
}

Symbol separable_symbol(std::vector<Complex> coefficients, double omega, double m, int claimed_N) {
  const std::size_t terms = coefficients.size();
  return Symbol::separable(
      fourier_series(std::move(coefficients), omega),
      [m](std::span<const double> xi) { return Complex(std::pow(japanese_bracket(xi), m)); }, {m, 1.0, 0.0, claimed_N, 4},
      "separable(terms=" + std::to_string(terms) + ",omega=" + format_number(omega) + ",m=" + format_number(m) + ")");
}

Symbol variable_bessel_symbol(double m, double amplitude, double omega) {
  if (!(std::abs(amplitude) < 1.0)) throw InvalidInput("variable bessel amplitude must satisfy |amplitude| < 1");
  return Symbol::general(
      [m, amplitude, omega](std::span<const double> x, std::span<const double> xi) {
        const double s = std::accumulate(x.begin(), x.end(), 0.0);
        const double kappa = 1.0 + amplitude * std::sin(omega * s);
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return Complex(std::pow(1.0 + kappa * kappa * r2, 0.5 * m));
      },
      {m, 1.0, 0.0, 4, 4},
      "variable-bessel(m=" + format_number(m) + ",amplitude=" + format_number(amplitude) + ",omega=" + format_number(omega) + ")");
}

double default_fd_step(int order) {
  if (order <= 0) return 0.0;
  return 2.0 * std::pow(1e-16, 1.0 / (order + 4));
}

Complex finite_diff_derivative(const Symbol& s, const MultiIndex& alpha, const MultiIndex& beta,
                               std::span<const double> x, std::span<const double> xi, double step) {
  const std::size_t dim = x.size();
  if (xi.size() != dim || alpha.size() != dim || beta.size() != dim)
    throw InvalidInput("derivative dimensions do not match");
  const int total = alpha.order() + beta.order();
  if (total > kMaxFdOrder) throw InvalidInput("finite differences are limited to |alpha| + |beta| <= 8");
  if (!(step > 0.0)) throw InvalidInput("finite-difference step must be positive");
  if (total >= 4 && step < 1e-4) throw InvalidInput("finite-difference step below 1e-4 for order >= 4 (cancellation)");

  if ((alpha.order() > 0 && !s.depends_on_x()) || (beta.order() > 0 && !s.depends_on_xi())) return 0.0;
  if (total > 0 && s.constant_value()) return 0.0;

  std::vector<AxisOrder> plan;
  for (std::size_t a = 0; a < dim; ++a)
    if (alpha[a] > 0) plan.push_back({a, alpha[a]});
  for (std::size_t a = 0; a < dim; ++a)
    if (beta[a] > 0) plan.push_back({dim + a, beta[a]});

  std::vector<double> point(2 * dim);
  std::copy(x.begin(), x.end(), point.begin());
  std::copy(xi.begin(), xi.end(), point.begin() + static_cast<std::ptrdiff_t>(dim));
  return differentiate(s, plan, 0, point, dim, step);
}

SymbolSampleSet SymbolSampleSet::radial(int dim, double xi_max, std::size_t radii,
                                        std::vector<std::vector<double>> x_points) {
  if (dim < 1) throw InvalidInput("sample dimension must be positive");
  if (!(xi_max > 0.0)) throw InvalidInput("xi_max must be positive");
  if (radii < 2) throw InvalidInput("need at least two radii");
  if (x_points.empty()) x_points.push_back(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  for (const auto& p : x_points)
    if (p.size() != static_cast<std::size_t>(dim)) throw InvalidInput("x sample dimension mismatch");

  const auto d = static_cast<std::size_t>(dim);
  std::vector<std::vector<double>> directions;
  for (std::size_t a = 0; a < d; ++a) {
    std::vector<double> e(d, 0.0);
    e[a] = 1.0;
    directions.push_back(e);
  }
  {
    std::vector<double> e(d, 0.0);
    e[0] = -1.0;
    directions.push_back(e);
  }
  if (d > 1) directions.emplace_back(d, 1.0 / std::sqrt(static_cast<double>(d)));

  SymbolSampleSet set;
  set.x_points = std::move(x_points);
  set.xi_points.emplace_back(d, 0.0);
  const double r0 = std::min(1.0 / 16.0, xi_max);
  for (std::size_t i = 0; i < radii; ++i) {
    const double r = r0 * std::pow(xi_max / r0, static_cast<double>(i) / static_cast<double>(radii - 1));
    for (const auto& dir : directions) {
      std::vector<double> p(d);
      for (std::size_t a = 0; a < d; ++a) p[a] = r * dir[a];
      set.xi_points.push_back(std::move(p));
    }
  }
  return set;
}

SymbolSampleSet SymbolSampleSet::from_grid(const Grid& grid, std::size_t radii, std::size_t x_count) {
  if (x_count == 0) throw InvalidInput("need at least one x sample");
  std::vector<std::vector<double>> xs;
  const double R = grid.half_extent();
  for (std::size_t k = 0; k < x_count; ++k) {
    const double v = -R + (static_cast<double>(k) + 0.5) * 2.0 * R / static_cast<double>(x_count);
    xs.emplace_back(static_cast<std::size_t>(grid.dim()), v);
  }
  return radial(grid.dim(), grid.nyquist(), radii, std::move(xs));
}

const DerivativeBound* DerivativeBoundReport::find(const MultiIndex& alpha, const MultiIndex& beta) const {
  for (const auto& b : bounds)
    if (b.alpha == alpha && b.beta == beta) return &b;
  return nullptr;
}

void DerivativeBoundReport::write_csv(std::ostream& out) const {
  auto join = [](const auto& v) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
  };
  out << "alpha,beta,fitted_C,witness_x,witness_xi,pass\n";
  out << std::setprecision(17);
  for (const auto& b : bounds) {
    out << join(b.alpha.entries()) << ',' << join(b.beta.entries()) << ',' << b.fitted_constant << ','
        << join(b.witness_x) << ',' << join(b.witness_xi) << ',' << (b.pass ? "true" : "false") << '\n';
  }
}

DerivativeBoundReport verify_symbol_class(const Symbol& s, const SymbolSampleSet& samples, double cap,
                                          int max_total_order) {
  if (!(cap > 0.0)) throw InvalidInput("cap must be positive");
  if (samples.x_points.empty() || samples.xi_points.empty()) throw InvalidInput("sample set is empty");
  if (max_total_order < 0 || max_total_order > kMaxFdOrder) throw InvalidInput("max total order must lie in [0, 8]");
  const SymbolClassParams& p = s.params();
  p.validate();
  const int dim = static_cast<int>(samples.x_points.front().size());
  for (const auto& xi : samples.xi_points)
    if (xi.size() != static_cast<std::size_t>(dim)) throw InvalidInput("xi sample dimension mismatch");

  struct Pair {
    MultiIndex alpha, beta;
  };
  std::vector<Pair> pairs;
  for (const auto& a : enumerate_multi_indices(dim, std::min(p.N, max_total_order)))
    for (const auto& b : enumerate_multi_indices(dim, std::min(p.Nprime, max_total_order)))
      if (a.order() + b.order() <= max_total_order) pairs.push_back({a, b});

  const auto& xs = samples.x_points;
  const auto& xis = samples.xi_points;
  std::vector<double> bracket(xis.size());
  for (std::size_t i = 0; i < xis.size(); ++i) bracket[i] = japanese_bracket(xis[i]);

  DerivativeBoundReport report;
  report.claim = p;
  report.cap = cap;
  report.bounds.resize(pairs.size());

  parallel_for(
      pairs.size(),
      [&](std::size_t k) {
        const auto& [alpha, beta] = pairs[k];
        const int order = alpha.order() + beta.order();
        const double step = samples.step > 0.0 ? samples.step : default_fd_step(order);
        const double exponent = -p.m + p.rho * beta.order() - p.delta * alpha.order();
        auto derivative = [&](const std::vector<double>& x, const std::vector<double>& xi) {
          if (order == 0) return std::abs(eval_symbol(s, x, xi));
          return std::abs(finite_diff_derivative(s, alpha, beta, x, xi, step));
        };

        DerivativeBound& out = report.bounds[k];
        out.alpha = alpha;
        out.beta = beta;
        double best = -1.0;
        auto consider = [&](double value, std::size_t ix, std::size_t ixi) {
          if (!(value <= best)) {  // NaN propagates as a failing witness
            best = value;
            out.witness_x = xs[ix];
            out.witness_xi = xis[ixi];
          }
        };

        const bool zero_in_x = alpha.order() > 0 && !s.depends_on_x();
        const bool zero_in_xi = beta.order() > 0 && !s.depends_on_xi();
        const bool constant = order > 0 && s.constant_value().has_value();
        if (zero_in_x || zero_in_xi || constant) {
          consider(0.0, 0, 0);
        } else if (!s.depends_on_x()) {
          for (std::size_t j = 0; j < xis.size(); ++j)
            consider(derivative(xs[0], xis[j]) * std::pow(bracket[j], exponent), 0, j);
        } else if (!s.depends_on_xi()) {
          std::size_t jmax = 0;
          for (std::size_t j = 1; j < xis.size(); ++j)
            if (std::pow(bracket[j], exponent) > std::pow(bracket[jmax], exponent)) jmax = j;
          const double wmax = std::pow(bracket[jmax], exponent);
          for (std::size_t i = 0; i < xs.size(); ++i) consider(derivative(xs[i], xis[jmax]) * wmax, i, jmax);
        } else {
          for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < xis.size(); ++j)
              consider(derivative(xs[i], xis[j]) * std::pow(bracket[j], exponent), i, j);
        }
        out.fitted_constant = best;
        out.pass = std::isfinite(best) && best < cap;
      },
      1);

  report.pass = std::all_of(report.bounds.begin(), report.bounds.end(), [](const auto& b) { return b.pass; });
  return report;
}

SampledFunction spectral_derivative(const SampledFunction& f, const MultiIndex& beta) {
  const Grid& g = f.grid();
  if (beta.size() != static_cast<std::size_t>(g.dim())) throw InvalidInput("derivative dimension mismatch");
  if (beta.order() == 0) return f;
  SampledFunction F = fourier_transform(f, Direction::forward);
  const std::size_t n = g.points_per_axis();
  std::vector<std::size_t> idx(static_cast<std::size_t>(g.dim()));
  for (std::size_t j = 0; j < F.size(); ++j) {
    g.unravel(j, idx);
    Complex factor = 1.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (beta[a] == 0) continue;
      if (idx[a] == n / 2 && beta[a] % 2 == 1) {
        factor = 0.0;
        break;
      }
      factor *= std::pow(Complex(0.0, g.frequency(idx[a])), beta[a]);
    }
    F[j] *= factor;
  }
  return fourier_transform(F, Direction::inverse);
}

double schwartz_term(const SampledFunction& f, const MultiIndex& alpha, const MultiIndex& beta) {
  const Grid& g = f.grid();
  if (alpha.size() != static_cast<std::size_t>(g.dim())) throw InvalidInput("multi-index dimension mismatch");
  const SampledFunction df = spectral_derivative(f, beta);
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  double best = 0.0;
  for (std::size_t i = 0; i < df.size(); ++i) {
    g.point(i, x);
    double w = 1.0;
    for (std::size_t a = 0; a < x.size(); ++a) w *= std::pow(std::abs(x[a]), alpha[a]);
    best = std::max(best, w * std::abs(df[i]));
  }
  return best;
}

double schwartz_seminorm(const SampledFunction& f, int N, int Nprime) {
  if (N < 0 || Nprime < 0) throw InvalidInput("seminorm orders must be nonnegative");
  if (Nprime > 4) throw InvalidInput("spectral differentiation is limited to N' <= 4");
  const int dim = f.grid().dim();
  double best = 0.0;
  const auto alphas = enumerate_multi_indices(dim, N);
  for (const auto& beta : enumerate_multi_indices(dim, Nprime)) {
    const SampledFunction df = spectral_derivative(f, beta);
    for (const auto& alpha : alphas) best = std::max(best, schwartz_term(df, alpha, MultiIndex::zero(dim)));
  }
  return best;
}

}  // namespace psido
