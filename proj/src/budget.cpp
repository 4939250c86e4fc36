#include "psido/budget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psido/errors.hpp"

namespace psido {
namespace {

int even_greater_than(double x) { return std::max(0, 2 * static_cast<int>(std::floor(x / 2.0)) + 2); }
int even_at_least(double x) { return std::max(0, 2 * static_cast<int>(std::ceil(x / 2.0))); }

void validate(int d, double m, double rho, double delta) {
  if (d < 1 || d > 3) throw InvalidInput("dimension must be 1, 2 or 3");
  if (!std::isfinite(m)) throw InvalidInput("order m must be finite");
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidInput("rho must lie in (0, 1]");
  if (!(delta >= 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in [0, 1)");
}

struct Thresholds {
  double n_strict;       // N >
  double nprime_strict;  // N' > 6d + 12
  double order_strict;   // (d + m + 1) / rho
  double nm_strict;      // N - M >
  double nm_weak;        // N - M >=
  int gap;               // N' - M' >= floor_even(d) + 2
};

Thresholds thresholds(int d, double m, double rho, double delta) {
  const double one = 1.0 - delta;
  const double fe = floor_even(d);
  return {((3.0 - delta) * d + (5.0 - delta) * one) / (one * one),
          6.0 * d + 12.0,
          (d + m + 1.0) / rho,
          (d + (fe + 2.0) * delta) / one,
          (-m + one * d + (fe + 2.0) * delta) / one,
          static_cast<int>(fe) + 2};
}

}  // namespace

int floor_even(double x) { return 2 * static_cast<int>(std::floor(x / 2.0)); }

SmoothnessBudget smoothness_budget(int d, double m, double rho, double delta) {
  validate(d, m, rho, delta);
  const Thresholds t = thresholds(d, m, rho, delta);
  SmoothnessBudget b{d, m, rho, delta, 0, 0, 0, 0};
  b.N = even_greater_than(t.n_strict);
  b.Nprime = std::max({even_greater_than(t.nprime_strict), even_at_least(d + 1.0), even_greater_than(t.order_strict)});
  b.M = 0;

  std::vector<std::string> binding;
  if (!(b.N - b.M > t.nm_strict)) binding.push_back("N - M > (d + (floor_even(d) + 2) delta) / (1 - delta)");
  if (!(b.N - b.M >= t.nm_weak)) binding.push_back("N - M >= (-m + (1 - delta) d + (floor_even(d) + 2) delta) / (1 - delta)");
  if (!binding.empty()) {
    std::ostringstream os;
    os << "M = 0 is infeasible with the minimal N = " << b.N;
    throw InfeasibleBudget(os.str(), binding);
  }

  const int lower_d1 = even_at_least(d + 1.0);
  const int lower_order = even_greater_than(t.order_strict);
  const int lower_d = even_at_least(d);
  const int lower = std::max({lower_d1, lower_order, lower_d});
  const int upper = b.Nprime - t.gap;
  if (lower > upper) {
    binding = {"N' - M' >= floor_even(d) + 2"};
    if (lower == lower_d1) binding.push_back("M' >= d + 1");
    if (lower == lower_order) binding.push_back("M' > (d + m + 1) / rho");
    if (lower == lower_d) binding.push_back("M' >= d");
    std::ostringstream os;
    os << "no even M' satisfies " << lower << " <= M' <= " << upper;
    throw InfeasibleBudget(os.str(), binding);
  }
  b.Mprime = lower;
  return b;
}

std::vector<std::string> budget_violations(const SmoothnessBudget& b) {
  std::vector<std::string> out;
  const double d = b.d;
  const double one = 1.0 - b.delta;
  const double fe = 2.0 * std::floor(d / 2.0);
  auto require = [&](bool ok, const char* name) {
    if (!ok) out.emplace_back(name);
  };
  for (int v : {b.N, b.Nprime, b.M, b.Mprime}) {
    if (v < 0 || v % 2 != 0) {
      out.emplace_back("derivative counts must be even and nonnegative");
      break;
    }
  }
  require(b.N > ((3.0 - b.delta) * d + (5.0 - b.delta) * one) / (one * one), "N > ((3 - delta) d + (5 - delta)(1 - delta)) / (1 - delta)^2");
  require(b.Nprime > 6.0 * d + 12.0, "N' > 6d + 12");
  require(b.N - b.M > (d + (fe + 2.0) * b.delta) / one, "N - M > (d + (floor_even(d) + 2) delta) / (1 - delta)");
  require(b.N - b.M >= (-b.m + one * d + (fe + 2.0) * b.delta) / one,
          "N - M >= (-m + (1 - delta) d + (floor_even(d) + 2) delta) / (1 - delta)");
  require(b.Nprime - b.Mprime >= fe + 2.0, "N' - M' >= floor_even(d) + 2");
  require(b.Nprime >= d + 1.0, "N' >= d + 1");
  require(b.Nprime > (d + b.m + 1.0) / b.rho, "N' > (d + m + 1) / rho");
  require(b.Mprime >= d + 1.0, "M' >= d + 1");
  require(b.Mprime > (d + b.m + 1.0) / b.rho, "M' > (d + m + 1) / rho");
  require(b.Mprime >= d, "M' >= d");
  return out;
}

ConditionReport condition_report(double m, double rho, double delta, int d, const std::vector<double>& p) {
  if (d < 1 || d > 3) throw InvalidInput("dimension must be 1, 2 or 3");
  if (!std::isfinite(m)) throw InvalidInput("order m must be finite");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("rho must lie in [0, 1]");
  if (!(delta >= 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in [0, 1)");
  if (p.empty()) throw InvalidInput("at least one exponent is required");
  ConditionReport r;
  for (double q : p) {
    if (!(q >= 1.0)) throw InvalidInput("exponents must be >= 1");
    r.necessary_margins.push_back(-d * (1.0 - rho) * std::abs(0.5 - 1.0 / q) - m);
  }
  r.necessary_lp = std::all_of(r.necessary_margins.begin(), r.necessary_margins.end(), [](double v) { return v >= 0.0; });
  r.sufficient_margin = -(1.0 - rho) * (d + 1.0 + rho) - m;
  r.sufficient_thm32 = r.sufficient_margin >= 0.0 && rho > 0.0 && delta <= rho;
  return r;
}

}  // namespace psido
