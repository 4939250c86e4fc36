#include "psido/cancellation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "psido/dyadic.hpp"
#include "psido/errors.hpp"
#include "psido/operators.hpp"
#include "psido/parallel.hpp"

namespace psido {
namespace {

std::size_t power(std::size_t n, int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= n;
  return r;
}

// Minimum-image difference a - b of axis indices.
long periodic_steps(long a, long b, long n) {
  long o = ((a - b) % n + n) % n;
  if (o > n / 2) o -= n;
  return o;
}

std::vector<long> locate_all(const Grid& g, std::span<const double> v, const char* what) {
  std::vector<long> idx(v.size());
  for (std::size_t a = 0; a < v.size(); ++a) {
    std::size_t k = 0;
    if (!g.locate(v[a], k)) throw InvalidInput(std::string(what) + " coordinate " + std::to_string(v[a]) + " is not a grid point");
    idx[a] = static_cast<long>(k);
  }
  return idx;
}

// Periodic sup-norm distance, in grid steps, between the outer index of
// flat point `outer` (row-major over d - l axes) and `centre`.
long outer_distance_steps(std::size_t outer, const std::vector<long>& centre, long n) {
  long best = 0;
  for (std::size_t a = centre.size(); a-- > 0;) {
    const long k = static_cast<long>(outer % static_cast<std::size_t>(n));
    outer /= static_cast<std::size_t>(n);
    best = std::max(best, std::abs(periodic_steps(k, centre[a], n)));
  }
  return best;
}

}  // namespace

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::smooth_bump: return "smooth_bump";
    case ProfileKind::cosine_squared: return "cosine_squared";
  }
  return "unknown";
}

ProfileKind parse_profile(const std::string& name) {
  if (name == "gaussian") return ProfileKind::gaussian;
  if (name == "smooth_bump" || name == "bump") return ProfileKind::smooth_bump;
  if (name == "cosine_squared" || name == "cos2") return ProfileKind::cosine_squared;
  throw InvalidInput("unknown profile '" + name + "' (gaussian, smooth_bump, cosine_squared)");
}

double Profile::operator()(double u) const {
  const double v = u / width;
  switch (kind) {
    case ProfileKind::gaussian: return std::exp(-0.5 * v * v);
    case ProfileKind::smooth_bump: return std::abs(v) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - v * v)) : 0.0;
    case ProfileKind::cosine_squared: {
      if (std::abs(v) >= 1.0) return 0.0;
      const double c = std::cos(0.5 * std::numbers::pi * v);
      return c * c;
    }
  }
  return 0.0;
}

SampledFunction make_cancellation_test_function(const Grid& grid, int l, double t, std::span<const double> yprime,
                                                const Profile& inner, const Profile& outer) {
  const int d = grid.dim();
  const double h = grid.spacing();
  if (l < 0 || l >= d) throw InvalidInput("split index l must lie in {0, ..., d-1}");
  if (yprime.size() != static_cast<std::size_t>(d - l)) throw InvalidInput("y' must have d - l coordinates");
  if (!(t >= 4.0 * h * (1.0 - 1e-12))) throw InvalidInput("t = " + std::to_string(t) + " is below 4h = " + std::to_string(4.0 * h));
  if (!(t < grid.half_extent())) throw InvalidInput("t must be smaller than the half extent R");
  if (!(inner.width > 0.0)) throw InvalidInput("inner profile width must be positive");
  if (!outer.compactly_supported()) throw InvalidInput("outer profile must be compactly supported");

  const long n = static_cast<long>(grid.points_per_axis());
  const auto centre = locate_all(grid, yprime, "y'");
  const long shift = static_cast<long>(std::floor(t / (2.0 * h) + 1e-9));
  const Profile bump{outer.kind, t - static_cast<double>(shift) * h};

  const std::size_t outer_count = power(grid.points_per_axis(), d - l);
  std::vector<Complex> outer_values(outer_count);
  for (std::size_t q = 0; q < outer_count; ++q) {
    double ha = 1.0, hb = 1.0;
    std::size_t rest = q;
    for (std::size_t a = centre.size(); a-- > 0;) {
      const long k = static_cast<long>(rest % grid.points_per_axis());
      rest /= grid.points_per_axis();
      const long shift_a = a == 0 ? shift : 0;
      ha *= bump(static_cast<double>(periodic_steps(k, centre[a] - shift_a, n)) * h);
      hb *= bump(static_cast<double>(periodic_steps(k, centre[a] + shift_a, n)) * h);
    }
    outer_values[q] = ha - hb;
  }

  const std::size_t inner_count = power(grid.points_per_axis(), l);
  std::vector<Complex> values(grid.size());
  for (std::size_t ib = 0; ib < inner_count; ++ib) {
    double g = 1.0;
    std::size_t rest = ib;
    for (int a = 0; a < l; ++a) {
      g *= inner(grid.coordinate(rest % grid.points_per_axis()));
      rest /= grid.points_per_axis();
    }
    for (std::size_t q = 0; q < outer_count; ++q) values[ib * outer_count + q] = g * outer_values[q];
  }
  return SampledFunction(grid, std::move(values));
}

void CZCheckConfig::validate(const Grid& grid) const {
  const int d = grid.dim();
  if (l < 0 || l >= d) throw InvalidInput("split index l must lie in {0, ..., d-1}");
  if (!(t > 0.0)) throw InvalidInput("t must be positive");
  if (!(Nconst > 1.0)) throw InvalidInput("exclusion multiplier N must exceed 1");
  if (pbar.dim() != d) throw InvalidInput("p_bar dimension does not match grid");
  if (pbar.split_or_throw() != l) throw InvalidInput("p_bar split does not match l");
  if (x0prime.size() != static_cast<std::size_t>(d - l)) throw InvalidInput("x'_0 must have d - l coordinates");
  locate_all(grid, x0prime, "x'_0");
  if (!(Nconst * t < grid.half_extent()))
    throw InvalidInput("exclusion region |x' - x'_0| > N t is empty on this box (N t >= R)");
}

CancellationCheck check_cancellation_class(const SampledFunction& f, const CZCheckConfig& cfg) {
  const Grid& g = f.grid();
  cfg.validate(g);
  const int d = g.dim();
  const long n = static_cast<long>(g.points_per_axis());
  const auto centre = locate_all(g, cfg.x0prime, "x'_0");
  const double h = g.spacing();
  const long limit = static_cast<long>(std::floor(cfg.t / h + 1e-9));
  const std::size_t outer_count = power(g.points_per_axis(), d - cfg.l);
  const std::size_t inner_count = power(g.points_per_axis(), cfg.l);
  const double w = std::pow(h, d - cfg.l);

  CancellationCheck out;
  for (std::size_t ib = 0; ib < inner_count; ++ib) {
    double re = 0.0, im = 0.0, mass = 0.0;
    for (std::size_t q = 0; q < outer_count; ++q) {
      const Complex v = f[ib * outer_count + q];
      re += v.real();
      im += v.imag();
      mass += std::abs(v);
      if (std::abs(v) > kSupportThreshold && outer_distance_steps(q, centre, n) > limit)
        out.max_outside = std::max(out.max_outside, std::abs(v));
    }
    const double mean = w * std::hypot(re, im);
    out.max_relative_mean = std::max(out.max_relative_mean, mean / std::max(1.0, w * mass));
  }
  out.support_ok = out.max_outside == 0.0;
  out.zero_mean_ok = out.max_relative_mean <= kZeroMeanTolerance;
  return out;
}

OperatorFn symbol_operator(const Symbol& s) {
  return [s](const SampledFunction& f) { return apply_psido(s, f); };
}

CZResult cz_condition_check(const OperatorFn& op, const CZCheckConfig& cfg, const SampledFunction& f) {
  const Grid& g = f.grid();
  const CancellationCheck membership = check_cancellation_class(f, cfg);
  if (!membership.support_ok) {
    std::ostringstream os;
    os << "support check failed: f is not supported in the t-box around x'_0 (max |f| outside = " << membership.max_outside
       << ")";
    throw PreconditionError(os.str());
  }
  if (!membership.zero_mean_ok) {
    std::ostringstream os;
    os << "zero-mean check failed: integral of f over x' is nonzero (relative mean " << membership.max_relative_mean
       << " > " << kZeroMeanTolerance << ")";
    throw PreconditionError(os.str());
  }

  const SampledFunction Tf = op(f);
  if (!(Tf.grid() == g)) throw InvalidInput("operator changed the grid");
  const auto norms = partial_norms(Tf, cfg.pbar.leading());
  const long n = static_cast<long>(g.points_per_axis());
  const auto centre = locate_all(g, cfg.x0prime, "x'_0");
  const double h = g.spacing();
  const double radius_steps = cfg.Nconst * cfg.t / h;
  double lhs = 0.0;
  for (std::size_t q = 0; q < norms.size(); ++q)
    if (static_cast<double>(outer_distance_steps(q, centre, n)) > radius_steps * (1.0 + 1e-12)) lhs += norms[q];
  lhs *= std::pow(h, g.dim() - cfg.l);

  CZResult r;
  r.t = cfg.t;
  r.lhs = lhs;
  r.rhs = pbar_one_norm(f, cfg.pbar);
  if (!(r.rhs > 0.0)) throw PreconditionError("f vanishes identically; the ratio is undefined");
  r.ratio = lhs / r.rhs;
  return r;
}

CZSweep cz_sweep(const OperatorFn& op, const Grid& grid, CZCheckConfig cfg, std::span<const double> ts,
                 const Profile& inner, const Profile& outer) {
  if (ts.empty()) throw InvalidInput("t sweep is empty");
  CZSweep sweep;
  sweep.results.resize(ts.size());
  parallel_for(
      ts.size(),
      [&](std::size_t i) {
        CZCheckConfig c = cfg;
        c.t = ts[i];
        const SampledFunction f = make_cancellation_test_function(grid, c.l, c.t, c.x0prime, inner, outer);
        sweep.results[i] = cz_condition_check(op, c, f);
      },
      1);
  std::vector<double> ratios;
  for (const auto& r : sweep.results) ratios.push_back(r.ratio);
  sweep.all_finite = std::all_of(ratios.begin(), ratios.end(), [](double v) { return std::isfinite(v); });
  sweep.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  std::sort(ratios.begin(), ratios.end());
  const std::size_t m = ratios.size();
  sweep.median_ratio = m % 2 == 1 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
  return sweep;
}

}  // namespace psido
