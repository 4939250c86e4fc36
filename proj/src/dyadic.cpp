#include "psido/dyadic.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "psido/errors.hpp"
#include "psido/operators.hpp"
#include "psido/parallel.hpp"

namespace psido {

double smootherstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * t * t * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))));
}

double dyadic_cutoff(double radius) { return 1.0 - smootherstep(radius - 1.0); }

double ring_cutoff(double radius) { return dyadic_cutoff(radius) - dyadic_cutoff(2.0 * radius); }

int default_truncation(const Grid& grid) {
  return std::max(1, static_cast<int>(std::floor(std::log2(grid.nyquist()))) - 1);
}

DyadicDecomposition::DyadicDecomposition(Symbol symbol, Grid grid, int J)
    : symbol_(std::move(symbol)), grid_(grid), J_(J) {
  if (J < 1) throw InvalidInput("dyadic truncation J must be >= 1");
  if (!(std::ldexp(1.0, J - 1) < grid_.nyquist()))
    throw InvalidInput("J = " + std::to_string(J) + " too large: ring 2^{J-1} = " + std::to_string(std::ldexp(1.0, J - 1)) +
                       " is beyond the grid Nyquist " + std::to_string(grid_.nyquist()));

  radius_.resize(grid_.size());
  std::vector<double> xi(static_cast<std::size_t>(grid_.dim()));
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    grid_.frequency_point(i, xi);
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    radius_[i] = std::sqrt(r2);
  }
  weights_.resize(static_cast<std::size_t>(J) + 1);
  for (int j = 0; j <= J; ++j) {
    auto& w = weights_[static_cast<std::size_t>(j)];
    w.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) w[i] = weight(j, radius_[i]);
  }
}

double DyadicDecomposition::weight(int j, double radius) {
  if (j == 0) return dyadic_cutoff(radius);
  return ring_cutoff(std::ldexp(radius, -j));
}

std::span<const double> DyadicDecomposition::weights(int j) const {
  if (j < 0 || j > J_) throw InvalidInput("piece index " + std::to_string(j) + " outside 0..J");
  return weights_[static_cast<std::size_t>(j)];
}

SampledFunction DyadicDecomposition::full_symbol(std::optional<std::span<const double>> x) const {
  const std::size_t d = static_cast<std::size_t>(grid_.dim());
  std::vector<double> xv(d, 0.0);
  if (x) {
    if (x->size() != d) throw InvalidInput("x has the wrong dimension");
    xv.assign(x->begin(), x->end());
  } else if (symbol_.depends_on_x()) {
    throw InvalidInput("symbol " + symbol_.name() + " depends on x; an evaluation point is required");
  }
  std::vector<Complex> v(grid_.size());
  std::vector<double> xi(d);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    grid_.frequency_point(i, xi);
    v[i] = eval_symbol(symbol_, xv, xi);
  }
  return SampledFunction(grid_, std::move(v));
}

SampledFunction DyadicDecomposition::weighted(std::span<const double> w, std::optional<std::span<const double>> x) const {
  SampledFunction s = full_symbol(x);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= w[i];
  return s;
}

SampledFunction DyadicDecomposition::piece(int j, std::optional<std::span<const double>> x) const {
  return weighted(weights(j), x);
}

SampledFunction DyadicDecomposition::reconstruction(std::optional<std::span<const double>> x) const {
  const SampledFunction s = full_symbol(x);
  SampledFunction out(grid_);
  for (int j = 0; j <= J_; ++j) {
    const auto w = weights(j);
    for (std::size_t i = 0; i < s.size(); ++i) out[i] += s[i] * w[i];
  }
  return out;
}

SampledFunction DyadicDecomposition::truncated_symbol(std::optional<std::span<const double>> x) const {
  std::vector<double> w(grid_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = dyadic_cutoff(std::ldexp(radius_[i], -J_));
  return weighted(w, x);
}

DyadicDecomposition dyadic_decompose(const Symbol& s, const Grid& grid, int J) { return {s, grid, J}; }

namespace {

std::optional<std::vector<double>> kernel_point(const DyadicDecomposition& dd, std::optional<std::span<const double>> x) {
  if (!dd.symbol().depends_on_x()) return std::nullopt;
  if (!x) throw InvalidInput("symbol " + dd.symbol().name() + " depends on x; kernel requires an evaluation point");
  return std::vector<double>(x->begin(), x->end());
}

}  // namespace

Kernel kernel_piece(const DyadicDecomposition& dd, int j, std::optional<std::span<const double>> x) {
  auto point = kernel_point(dd, x);
  SampledFunction k = fourier_transform(dd.piece(j, x), Direction::inverse);
  return Kernel{std::move(k), std::move(point), dd.symbol().params(), dd.truncation(), j};
}

Kernel kernel_sum(const DyadicDecomposition& dd, std::optional<std::span<const double>> x) {
  auto point = kernel_point(dd, x);
  const int J = dd.truncation();
  std::vector<std::optional<SampledFunction>> pieces(static_cast<std::size_t>(J) + 1);
  parallel_for(
      pieces.size(), [&](std::size_t j) { pieces[j] = kernel_piece(dd, static_cast<int>(j), x).values; }, 1);
  SampledFunction sum(dd.grid());
  for (const auto& p : pieces)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*p)[i];
  return Kernel{std::move(sum), std::move(point), dd.symbol().params(), J, -1};
}

void write_radial_csv(std::ostream& out, const Kernel& k) {
  const Grid& g = k.grid();
  std::vector<double> z(static_cast<std::size_t>(g.dim()));
  out << "abs_z,abs_k\n" << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, z);
    double r2 = 0.0;
    for (double v : z) r2 += v * v;
    out << std::sqrt(r2) << ',' << std::abs(k.values[i]) << '\n';
  }
}

namespace {

// Axis indices of a grid point; throws if x is off the grid.
std::vector<std::size_t> locate_point(const Grid& g, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(g.dim())) throw InvalidInput("point has the wrong dimension");
  std::vector<std::size_t> idx(x.size());
  for (std::size_t a = 0; a < x.size(); ++a)
    if (!g.locate(x[a], idx[a])) throw InvalidInput("point coordinate " + std::to_string(x[a]) + " is not on the grid");
  return idx;
}

// Minimum-image offset between axis indices, in grid steps.
long periodic_offset(std::size_t a, std::size_t b, std::size_t n) {
  long o = static_cast<long>(a) - static_cast<long>(b);
  const long nl = static_cast<long>(n);
  o = ((o % nl) + nl) % nl;
  if (o > nl / 2) o -= nl;
  return o;
}

}  // namespace

double distance_to_support(const SampledFunction& f, std::span<const double> x) {
  const Grid& g = f.grid();
  const auto ix = locate_point(g, x);
  const std::size_t n = g.points_per_axis();
  std::vector<std::size_t> iy(ix.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(std::abs(f[i]) > kSupportThreshold)) continue;
    g.unravel(i, iy);
    double r2 = 0.0;
    for (std::size_t a = 0; a < ix.size(); ++a) {
      const double o = static_cast<double>(periodic_offset(ix[a], iy[a], n));
      r2 += o * o;
    }
    best = std::min(best, std::sqrt(r2) * g.spacing());
  }
  return best;
}

Complex offsupport_apply(const Kernel& k, const SampledFunction& f, std::span<const double> x) {
  const Grid& g = f.grid();
  if (!(k.grid() == g)) throw InvalidInput("kernel and function grids differ");
  if (k.x) {
    if (k.x->size() != x.size()) throw InvalidInput("kernel evaluation point has the wrong dimension");
    for (std::size_t a = 0; a < x.size(); ++a)
      if (std::abs((*k.x)[a] - x[a]) > 1e-9 * g.spacing())
        throw InvalidInput("kernel was computed for a different x");
  }
  const double dist = distance_to_support(f, x);
  if (!(dist >= kOffSupportMargin * g.spacing() * (1.0 - 1e-12)))
    throw PreconditionError("x lies within 2h of supp f (distance " + std::to_string(dist) + ")");

  const auto ix = locate_point(g, x);
  const std::size_t n = g.points_per_axis();
  std::vector<std::size_t> iy(ix.size()), iz(ix.size());
  Complex acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(std::abs(f[i]) > kSupportThreshold)) continue;
    g.unravel(i, iy);
    // z = x - y sits at index (ix - iy + n/2) mod n on the z grid.
    for (std::size_t a = 0; a < ix.size(); ++a) iz[a] = (ix[a] + n + n / 2 - iy[a]) % n;
    acc += k.values[g.ravel(iz)] * f[i];
  }
  return acc * g.cell_volume();
}

}  // namespace psido
