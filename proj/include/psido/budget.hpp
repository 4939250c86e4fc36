#pragma once

#include <string>
#include <vector>

namespace psido {

/// Even derivative counts for a symbol in S^m_{rho,delta,N,N'} and its
/// adjoint symbol in S^m_{rho,delta,M,M'}.
struct SmoothnessBudget {
  int d = 1;
  double m = 0.0;
  double rho = 1.0;
  double delta = 0.0;
  int N = 0;
  int Nprime = 0;
  int M = 0;
  int Mprime = 0;
};

/// Largest even integer not greater than x.
int floor_even(double x);

/// Componentwise-minimal even solution with M = 0:
///   N  > ((3 - delta) d + (5 - delta)(1 - delta)) / (1 - delta)^2
///   N' > 6d + 12, N' >= d + 1, N' > (d + m + 1) / rho
///   N - M >  (d + (floor_even(d) + 2) delta) / (1 - delta)
///   N - M >= (-m + (1 - delta) d + (floor_even(d) + 2) delta) / (1 - delta)
///   M' >= d + 1, M' > (d + m + 1) / rho, M' >= d, N' - M' >= floor_even(d) + 2
/// Throws InfeasibleBudget naming the binding constraints when M = 0
/// violates an N - M inequality or the M' bounds cross.
/// Requires d in 1..3, rho in (0, 1], delta in [0, 1).
SmoothnessBudget smoothness_budget(int d, double m, double rho, double delta);

/// Every inequality above that b violates (including parity), by name.
/// Independent of smoothness_budget; empty means all hold.
std::vector<std::string> budget_violations(const SmoothnessBudget& b);

struct ConditionReport {
  /// Per exponent component: -d (1 - rho) |1/2 - 1/p_i| - m; >= 0 means the
  /// necessary condition holds for that component.
  std::vector<double> necessary_margins;
  bool necessary_lp = false;
  /// -(1 - rho)(d + 1 + rho) - m
  double sufficient_margin = 0.0;
  /// Sufficient margin >= 0 together with rho > 0 and delta <= rho.
  bool sufficient_thm32 = false;
};

/// m <= -d (1 - rho)|1/2 - 1/p| (necessary) and m <= -(1 - rho)(d + 1 + rho)
/// (sufficient), with signed margins.
ConditionReport condition_report(double m, double rho, double delta, int d, const std::vector<double>& p);

}  // namespace psido
