#include "psido/operator_norm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "psido/errors.hpp"
#include "psido/operators.hpp"
#include "psido/parallel.hpp"

namespace psido {
namespace {

double l2_norm(const SampledFunction& f) {
  double s = 0.0;
  for (const Complex& v : f.values()) s += std::norm(v);
  return std::sqrt(f.grid().cell_volume() * s);
}

void scale(SampledFunction& f, double c) {
  for (Complex& v : f.values()) v *= c;
}

SampledFunction random_noise(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SampledFunction f(g);
  for (Complex& v : f.values()) v = Complex(normal(rng), normal(rng));
  return f;
}

NormEstimate power_iteration(const Symbol& s, const Grid& g, const NormEstimateOptions& opt) {
  NormEstimate est;
  est.method = NormMethod::power_iteration_p2;
  std::mt19937_64 rng(opt.seed);
  SampledFunction v = random_noise(g, rng);
  scale(v, 1.0 / l2_norm(v));
  double previous = -1.0;
  for (std::size_t k = 0; k < opt.iterations; ++k) {
    est.iterations = k + 1;
    const SampledFunction w = apply_psido(s, v);
    const double lambda = std::pow(l2_norm(w), 2);  // Rayleigh quotient of T*T, |v| = 1
    est.value = std::sqrt(lambda);
    if (lambda == 0.0 || std::abs(lambda - previous) <= opt.tolerance * lambda) {
      est.converged = true;
      break;
    }
    previous = lambda;
    v = discrete_adjoint_apply(s, w);
    const double nv = l2_norm(v);
    if (nv == 0.0) {
      est.converged = true;
      break;
    }
    scale(v, 1.0 / nv);
  }
  return est;
}

class RandomAscent {
 public:
  RandomAscent(const Symbol& s, const Grid& g, const MixedExponent& p, const NormEstimateOptions& opt)
      : s_(s), g_(g), p_(p), q_(holder_dual(p)), opt_(opt), rng_(opt.seed) {}

  NormEstimate run() {
    NormEstimate est;
    est.method = NormMethod::random_ascent;
    est.lower_bound = true;

    consider(SampledFunction::sample(g_, [](std::span<const double>) { return 1.0; }));
    for (std::size_t s = 0; s < opt_.starts; ++s) {
      SampledFunction f = packet();
      if (s % 2 == 1) {
        const SampledFunction noise = random_noise(g_, rng_);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= noise[i];
      }
      consider(std::move(f));
    }
    for (std::size_t k = 0; k < opt_.perturbations && best_f_; ++k) {
      SampledFunction candidate = *best_f_;
      const SampledFunction bump = packet();
      const double amplitude = 0.25 * mixed_norm(candidate, p_) / std::max(1e-300, mixed_norm(bump, p_));
      for (std::size_t i = 0; i < candidate.size(); ++i) candidate[i] += amplitude * bump[i];
      consider(std::move(candidate));
    }

    est.value = best_;
    est.converged = best_converged_;
    est.iterations = steps_;
    return est;
  }

 private:
  double ratio(const SampledFunction& f) const { return mixed_norm(apply_psido(s_, f), p_) / mixed_norm(f, p_); }

  // Gaussian wave packet with random centre, width in [h, R/2] and phase.
  SampledFunction packet() {
    std::uniform_real_distribution<double> width(g_.spacing(), 0.5 * g_.half_extent());
    std::uniform_real_distribution<double> centre(-g_.half_extent(), g_.half_extent());
    const double w = width(rng_);
    std::vector<double> c(static_cast<std::size_t>(g_.dim()));
    for (double& v : c) v = centre(rng_);
    const double period = 2.0 * g_.half_extent();
    return SampledFunction::sample(g_, [&](std::span<const double> x) {
      double r2 = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) {
        double dx = std::remainder(x[a] - c[a], period);
        r2 += dx * dx;
      }
      return std::exp(-0.5 * r2 / (w * w));
    });
  }

  // Dual-map ascent from f; the ratio never decreases (Hoelder).
  void consider(SampledFunction f) {
    const double nf = mixed_norm(f, p_);
    if (!(nf > 0.0)) return;
    scale(f, 1.0 / nf);
    double value = ratio(f);
    bool converged = false;
    for (std::size_t k = 0; k < opt_.iterations; ++k) {
      ++steps_;
      const SampledFunction Tf = apply_psido(s_, f);
      if (mixed_norm(Tf, p_) == 0.0) {
        converged = true;
        break;
      }
      const SampledFunction w = discrete_adjoint_apply(s_, dual_element(Tf, p_));
      SampledFunction next = dual_element(w, q_);
      const double nn = mixed_norm(next, p_);
      if (!(nn > 0.0)) {
        converged = true;
        break;
      }
      scale(next, 1.0 / nn);
      const double v = ratio(next);
      if (!(v > value * (1.0 + opt_.tolerance))) {
        converged = true;
        break;
      }
      f = std::move(next);
      value = v;
    }
    if (value > best_) {
      best_ = value;
      best_f_ = std::move(f);
      best_converged_ = converged;
    }
  }

  const Symbol& s_;
  const Grid& g_;
  MixedExponent p_;
  MixedExponent q_;
  NormEstimateOptions opt_;
  std::mt19937_64 rng_;
  double best_ = 0.0;
  std::optional<SampledFunction> best_f_;
  bool best_converged_ = true;
  std::size_t steps_ = 0;
};

}  // namespace

const char* to_string(NormMethod method) {
  return method == NormMethod::power_iteration_p2 ? "power_iteration_p2" : "random_ascent";
}

NormEstimate operator_norm_estimate(const Symbol& s, const Grid& grid, const MixedExponent& p,
                                    const NormEstimateOptions& options) {
  if (p.dim() != grid.dim()) throw InvalidInput("exponent dimension does not match grid");
  if (options.iterations == 0) throw InvalidInput("iteration budget must be positive");
  if (options.method == NormMethod::power_iteration_p2) {
    for (double v : p.components())
      if (v != 2.0) throw InvalidInput("power_iteration_p2 requires p = (2, ..., 2)");
    return power_iteration(s, grid, options);
  }
  return RandomAscent(s, grid, p, options).run();
}

ProbeReport necessary_condition_probe(const Symbol& s, int dim, double p, double half_extent,
                                      std::span<const std::size_t> resolutions, NormEstimateOptions options,
                                      double growth_factor) {
  if (s.depends_on_x()) throw InvalidInput("the probe requires a multiplier symbol");
  if (p == 2.0) throw InvalidInput("the probe requires p != 2");
  if (resolutions.size() < 2) throw InvalidInput("the probe needs at least two resolutions");
  if (!(growth_factor > 0.0)) throw InvalidInput("growth factor must be positive");
  const MixedExponent exps = MixedExponent::uniform(dim, p);
  options.method = NormMethod::random_ascent;

  ProbeReport report;
  report.p = p;
  report.half_extent = half_extent;
  report.growth_factor = growth_factor;
  report.points.resize(resolutions.size());
  std::vector<Grid> grids;
  for (std::size_t n : resolutions) grids.emplace_back(dim, n, half_extent);
  parallel_for(
      resolutions.size(),
      [&](std::size_t i) { report.points[i] = {resolutions[i], operator_norm_estimate(s, grids[i], exps, options)}; }, 1);

  double lo = report.points.front().estimate.value, hi = lo;
  report.all_converged = true;
  for (const auto& pt : report.points) {
    lo = std::min(lo, pt.estimate.value);
    hi = std::max(hi, pt.estimate.value);
    report.all_converged = report.all_converged && pt.estimate.converged;
  }
  report.growth = report.points.back().estimate.value / report.points.front().estimate.value;
  report.variation = hi / lo - 1.0;
  report.grows = report.growth >= growth_factor;
  return report;
}

double theorem_norm_bound(const NormBoundInputs& in) {
  if (!(in.c1 > 0.0) || !(in.cq > 0.0) || !(in.cprime > 0.0)) throw InvalidInput("c1, cq and c' must be positive");
  double product = 1.0;
  for (double p : in.p.components()) product *= std::max(p, std::pow(p - 1.0, -1.0 / p));
  return in.cprime * product * (in.c1 + in.cq);
}

}  // namespace psido
