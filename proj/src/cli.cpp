#include "psido/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "psido/array_io.hpp"
#include "psido/budget.hpp"
#include "psido/cancellation.hpp"
#include "psido/dyadic.hpp"
#include "psido/errors.hpp"
#include "psido/kernel_decay.hpp"
#include "psido/mixed_norm.hpp"
#include "psido/operator_norm.hpp"
#include "psido/operators.hpp"

namespace psido::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v))
    throw InvalidInput("field '" + field + "': expected a finite number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& text, const std::string& field) {
  const double v = parse_real(text, field);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw InvalidInput("field '" + field + "': expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

MultiIndex parse_multi_index(const std::string& text, int dim, const std::string& field) {
  if (trim(text).empty()) return MultiIndex::zero(dim);
  std::vector<int> e;
  for (double v : parse_list(text)) {
    if (v != std::floor(v) || v < 0) throw InvalidInput("field '" + field + "': entries must be nonnegative integers");
    e.push_back(static_cast<int>(v));
  }
  if (e.size() != static_cast<std::size_t>(dim))
    throw InvalidInput("field '" + field + "': expected " + std::to_string(dim) + " entries");
  return MultiIndex(e);
}

std::string format_list(std::span<const double> v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

std::string format_index(const MultiIndex& a) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------------------
// Options

struct Common {
  int d = 1;
  std::size_t n = 64;
  double R = 4.0;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string json;
  std::string csv;

  Grid grid() const { return Grid(d, n, R); }
};

struct ApplyOpts {
  std::string symbol = "const:1";
  std::string input, output, path = "auto";
};
struct VerifyOpts {
  std::string symbol;
  std::size_t radii = 33, x_count = 3;
  double cap = 100.0;
  int max_order = 4;
  std::string derivs_csv;
};
struct DyadicOpts {
  std::string symbol, x, kernel_out, radial_csv;
  int J = 0;
};
struct DecayOpts {
  std::string symbol, x, alpha, beta;
  int J = 0, M = -1;
  double z_lo = 0.0, z_hi = 0.0, L = std::numeric_limits<double>::quiet_NaN(), factor = 3.0,
         slope_tol = std::numeric_limits<double>::quiet_NaN();
  std::size_t shells = 16;
};
struct CzOpts {
  std::string symbol, ts = "0.25,0.5,1,2", x0, pbar, inner = "gaussian", outer = "bump", input;
  int l = -1;
  double Nconst = 0.0, inner_width = 1.0, spread = 10.0;
};
struct NormOpts {
  std::string symbol, p = "2", method = "power";
  std::size_t iterations = 200, starts = 20, perturbations = 20;
  double tolerance = 1e-10, expect = std::numeric_limits<double>::quiet_NaN(), tol = 0.02;
};
struct BudgetOpts {
  double m = 0.0, rho = 1.0, delta = 0.0;
};
struct ConditionOpts {
  double m = 0.0, rho = 1.0, delta = 0.0;
  std::string p = "2";
};
struct ProbeOpts {
  std::string symbol = "wave:m=0", resolutions = "64,128,256,512", expect = "none";
  double p = 4.0, growth_factor = 1.2, stability = 0.05;
  std::size_t iterations = 30, starts = 8, perturbations = 10;
};

// ---------------------------------------------------------------------------
// Helpers

SampledFunction random_bandlimited(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SampledFunction F(g);
  std::vector<std::size_t> idx(static_cast<std::size_t>(g.dim()));
  const long limit = static_cast<long>(g.points_per_axis()) / 4;
  for (std::size_t j = 0; j < F.size(); ++j) {
    g.unravel(j, idx);
    bool inside = true;
    for (std::size_t a : idx) inside = inside && std::abs(g.signed_index(a)) < limit;
    if (inside) F[j] = Complex(normal(rng), normal(rng));
  }
  return fourier_transform(F, Direction::inverse);
}

std::optional<std::vector<double>> point_or_origin(const std::string& text, const Symbol& s, int dim) {
  if (!trim(text).empty()) {
    auto x = parse_list(text);
    if (x.size() != static_cast<std::size_t>(dim)) throw InvalidInput("--x must have d coordinates");
    return x;
  }
  if (s.depends_on_x()) return std::vector<double>(static_cast<std::size_t>(dim), 0.0);
  return std::nullopt;
}

std::optional<std::span<const double>> as_span(const std::optional<std::vector<double>>& v) {
  if (!v) return std::nullopt;
  return std::span<const double>(*v);
}

double max_abs(const SampledFunction& f) {
  double m = 0.0;
  for (const Complex& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

void add_check(Report& r, std::string name, bool pass, double measured, double predicted, std::string detail = {}) {
  r.checks.push_back({std::move(name), pass, measured, predicted, std::move(detail)});
}

// ---------------------------------------------------------------------------
// Experiments

Report run_apply(const Common& c, const ApplyOpts& o, std::ostream& out) {
  Report r;
  const Symbol s = parse_symbol(o.symbol);
  const SampledFunction f = o.input.empty() ? random_bandlimited(c.grid(), c.seed) : read_pslb(std::filesystem::path(o.input));
  ApplyPath path = ApplyPath::automatic;
  if (o.path == "direct") path = ApplyPath::direct;
  else if (o.path != "auto") throw InvalidInput("--path must be auto or direct");
  const SampledFunction g = apply_psido(s, f, path);
  if (!o.output.empty()) write_pslb(std::filesystem::path(o.output), g);

  double fin = 0.0, gout = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    fin += std::norm(f[i]);
    gout += std::norm(g[i]);
  }
  const double cell = f.grid().cell_volume();
  r.results["symbol"] = s.name();
  r.results["l2_input"] = std::sqrt(cell * fin);
  r.results["l2_output"] = std::sqrt(cell * gout);
  out << "applied " << s.name() << " on d=" << f.grid().dim() << " n=" << f.grid().points_per_axis()
      << " R=" << f.grid().half_extent() << ": ||f||_2=" << std::sqrt(cell * fin) << " ||Tf||_2=" << std::sqrt(cell * gout)
      << '\n';
  return r;
}

Report run_verify(const Common& c, const VerifyOpts& o, std::ostream& out) {
  Report r;
  const Symbol s = parse_symbol(o.symbol);
  const SymbolSampleSet samples = SymbolSampleSet::from_grid(c.grid(), o.radii, o.x_count);
  const DerivativeBoundReport rep = verify_symbol_class(s, samples, o.cap, o.max_order);
  r.table_name = "derivative_bounds";
  for (std::size_t i = 0; i < rep.bounds.size(); ++i) {
    const DerivativeBound& b = rep.bounds[i];
    const std::string name = "C[alpha=" + format_index(b.alpha) + ",beta=" + format_index(b.beta) + "]";
    add_check(r, name, b.pass, b.fitted_constant, o.cap,
              "witness x=" + format_list(b.witness_x) + " xi=" + format_list(b.witness_xi));
    r.table.push_back({static_cast<double>(i), b.fitted_constant, o.cap, b.fitted_constant / o.cap, b.pass});
  }
  if (!o.derivs_csv.empty()) {
    std::ofstream f(o.derivs_csv);
    if (!f) throw IoError("cannot open for writing", o.derivs_csv);
    rep.write_csv(f);
    if (!f) throw IoError("write failed", o.derivs_csv);
  }
  r.results["symbol"] = s.name();
  r.results["claim"] = {{"m", rep.claim.m}, {"rho", rep.claim.rho}, {"delta", rep.claim.delta}, {"N", rep.claim.N},
                        {"Nprime", rep.claim.Nprime}};
  out << s.name() << ": " << rep.bounds.size() << " derivative bounds, " << (rep.pass ? "all below" : "NOT all below")
      << " cap " << o.cap << '\n';
  return r;
}

Report run_dyadic(const Common& c, const DyadicOpts& o, std::ostream& out) {
  Report r;
  const Grid g = c.grid();
  const Symbol s = parse_symbol(o.symbol);
  const int J = o.J > 0 ? o.J : default_truncation(g);
  const DyadicDecomposition dd(s, g, J);
  const auto x = point_or_origin(o.x, s, c.d);
  const auto xs = as_span(x);

  const SampledFunction rec = dd.reconstruction(xs);
  const SampledFunction full = dd.full_symbol(xs);
  std::vector<double> xi(static_cast<std::size_t>(c.d));
  double err = 0.0, outside = 0.0;
  const double top = std::ldexp(1.0, J);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.frequency_point(i, xi);
    if (vector_pnorm(xi, 2.0) <= top) err = std::max(err, std::abs(rec[i] - full[i]));
  }
  r.table_name = "pieces";
  for (int j = 0; j <= J; ++j) {
    const SampledFunction piece = dd.piece(j, xs);
    const double lo = j == 0 ? 0.0 : std::ldexp(1.0, j - 1), hi = std::ldexp(1.0, j + 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.frequency_point(i, xi);
      const double rad = vector_pnorm(xi, 2.0);
      if (rad < lo || rad > hi) outside = std::max(outside, std::abs(piece[i]));
    }
    const double sup = max_abs(kernel_piece(dd, j, xs).values);
    const double scale = std::pow(2.0, j * (c.d + s.params().m));
    r.table.push_back({static_cast<double>(j), sup, scale, sup / scale, true});
  }
  add_check(r, "reconstruction on |xi| <= 2^J", err <= 1e-12, err, 1e-12);
  add_check(r, "ring supports exact", outside == 0.0, outside, 0.0);

  if (!o.kernel_out.empty() || !o.radial_csv.empty()) {
    const Kernel k = kernel_sum(dd, xs);
    if (!o.kernel_out.empty()) write_pslb(std::filesystem::path(o.kernel_out), k.values);
    if (!o.radial_csv.empty()) {
      std::ofstream f(o.radial_csv);
      if (!f) throw IoError("cannot open for writing", o.radial_csv);
      write_radial_csv(f, k);
      if (!f) throw IoError("write failed", o.radial_csv);
    }
  }
  r.results["symbol"] = s.name();
  r.results["J"] = J;
  out << s.name() << ": J=" << J << " reconstruction error " << err << ", max outside rings " << outside << '\n';
  return r;
}

Report run_decay(const Common& c, const DecayOpts& o, std::ostream& out) {
  Report r;
  const Grid g = c.grid();
  const Symbol s = parse_symbol(o.symbol);
  const int J = o.J > 0 ? o.J : default_truncation(g);
  const MultiIndex alpha = parse_multi_index(o.alpha, c.d, "alpha");
  const MultiIndex beta = parse_multi_index(o.beta, c.d, "beta");
  const auto x = point_or_origin(o.x, s, c.d);
  const double L = std::isnan(o.L) ? minimal_decay_gain(c.d, s.params(), alpha.order(), beta.order()) : o.L;
  const KernelDecayParams params{alpha, beta, L};
  const double lo = o.z_lo > 0.0 ? o.z_lo : 4.0 * g.spacing();
  const double hi = o.z_hi > 0.0 ? o.z_hi : 0.25 * g.half_extent();

  // x-derivatives of the kernel are kernels of the x-differentiated symbol.
  Symbol target = s;
  if (alpha.order() > 0) {
    const MultiIndex zero = MultiIndex::zero(c.d);
    const double step = default_fd_step(alpha.order());
    target = Symbol::general(
        [s, alpha, zero, step](std::span<const double> xx, std::span<const double> xi) {
          return finite_diff_derivative(s, alpha, zero, xx, xi, step);
        },
        s.params(), s.name() + " d_x" + format_index(alpha));
  }
  const DyadicDecomposition dd(target, g, J);
  const auto xdep = target.depends_on_x() ? as_span(x) : std::nullopt;
  const Kernel k = kernel_sum(dd, xdep);
  const DecayFit fit = decay_fit(k, lo, hi, params, o.shells);

  r.table_name = "shells";
  for (std::size_t i = 0; i < fit.shell_radius.size(); ++i) {
    const double bound = fit.envelope * std::pow(fit.shell_radius[i], fit.predicted_exponent);
    const double ratio = bound > 0.0 ? fit.shell_max[i] / bound : 0.0;
    r.table.push_back({fit.shell_radius[i], fit.shell_max[i], bound, ratio, ratio <= 1.0 + 1e-12});
  }
  add_check(r, "envelope finite", fit.pass, fit.envelope, fit.predicted_exponent, fit.degenerate ? "degenerate" : "");
  if (!std::isnan(o.slope_tol) && !fit.degenerate)
    add_check(r, "slope within tolerance", std::abs(fit.slope - fit.predicted_exponent) <= o.slope_tol, fit.slope,
              fit.predicted_exponent);
  r.results["symbol"] = s.name();
  r.results["J"] = J;
  r.results["L"] = L;
  r.results["window"] = {lo, hi};
  r.results["slope"] = fit.slope;
  r.results["predicted_exponent"] = fit.predicted_exponent;
  r.results["envelope"] = fit.envelope;
  r.results["degenerate"] = fit.degenerate;
  out << s.name() << ": slope " << fit.slope << " (predicted " << fit.predicted_exponent << "), envelope "
      << fit.envelope << " on [" << lo << ", " << hi << "]\n";

  if (o.M >= 0) {
    const EnvelopeReport env = dyadic_envelope_check(DyadicDecomposition(s, g, J), o.M, alpha, beta, o.factor, as_span(x));
    nlohmann::json rows = nlohmann::json::array();
    for (const EnvelopeRow& row : env.rows)
      rows.push_back({{"j", row.j}, {"sup", row.sup}, {"scale", row.scale}, {"ratio", row.ratio}});
    r.results["envelope_rows"] = rows;
    r.results["growth_slope"] = env.growth_slope;
    r.results["predicted_growth"] = env.predicted_growth;
    add_check(r, "dyadic envelope max/min r_j", env.pass, env.max_over_min, o.factor, env.degenerate ? "degenerate" : "");
    out << "dyadic envelope M=" << o.M << ": max/min r_j = " << env.max_over_min << " (factor " << o.factor
        << "), growth slope " << env.growth_slope << " (predicted " << env.predicted_growth << ")\n";
  }
  return r;
}

Report run_cz(const Common& c, const CzOpts& o, std::ostream& out) {
  Report r;
  const Symbol s = parse_symbol(o.symbol);
  std::optional<SampledFunction> input;
  if (!o.input.empty()) input = read_pslb(std::filesystem::path(o.input));
  const Grid g = input ? input->grid() : c.grid();
  const int d = g.dim();
  const int l = o.l >= 0 ? o.l : d - 1;
  if (l < 0 || l > d - 1) throw InvalidInput("--l must lie in {0, ..., d-1}");

  std::vector<double> p(static_cast<std::size_t>(d), 2.0);
  if (!trim(o.pbar).empty()) {
    const auto lead = parse_list(o.pbar);
    if (lead.size() != static_cast<std::size_t>(l)) throw InvalidInput("--pbar must have l entries");
    std::copy(lead.begin(), lead.end(), p.begin());
  }
  CZCheckConfig cfg;
  cfg.l = l;
  cfg.pbar = MixedExponent(p, l);
  cfg.Nconst = o.Nconst > 0.0 ? o.Nconst : d + 1.0;
  cfg.x0prime = trim(o.x0).empty() ? std::vector<double>(static_cast<std::size_t>(d - l), 0.0) : parse_list(o.x0);
  const std::vector<double> ts = parse_list(o.ts);
  if (ts.empty()) throw InvalidInput("--t needs at least one value");
  const OperatorFn op = symbol_operator(s);

  std::vector<CZResult> results;
  if (input) {
    cfg.t = ts.front();
    results.push_back(cz_condition_check(op, cfg, *input));
  } else {
    const Profile inner{parse_profile(o.inner), o.inner_width};
    const Profile outer{parse_profile(o.outer), 1.0};
    results = cz_sweep(op, g, cfg, ts, inner, outer).results;
  }

  std::vector<double> ratios;
  bool finite = true;
  for (const CZResult& res : results) {
    ratios.push_back(res.ratio);
    finite = finite && std::isfinite(res.ratio);
  }
  const double med = median(ratios);
  const double mx = *std::max_element(ratios.begin(), ratios.end());
  r.table_name = "t_sweep";
  for (const CZResult& res : results)
    r.table.push_back({res.t, res.ratio, med, med > 0.0 ? res.ratio / med : 0.0, std::isfinite(res.ratio)});
  add_check(r, "all ratios finite", finite, mx, 0.0);
  if (results.size() >= 2)
    add_check(r, "max ratio within spread of median", mx <= o.spread * med, mx, o.spread * med);

  nlohmann::json rows = nlohmann::json::array();
  for (const CZResult& res : results) rows.push_back({{"t", res.t}, {"lhs", res.lhs}, {"rhs", res.rhs}, {"ratio", res.ratio}});
  r.results["symbol"] = s.name();
  r.results["sweep"] = rows;
  r.results["max_ratio"] = mx;
  r.results["median_ratio"] = med;
  out << s.name() << ": CZ ratios";
  for (const CZResult& res : results) out << " t=" << res.t << ":" << res.ratio;
  out << " (max " << mx << ", median " << med << ")\n";
  return r;
}

MixedExponent exponent_for(const std::string& text, int d) {
  const auto p = parse_list(text);
  if (p.size() == 1) return MixedExponent::uniform(d, p[0]);
  if (p.size() != static_cast<std::size_t>(d)) throw InvalidInput("--p must have 1 or d entries");
  return MixedExponent(p);
}

Report run_norm(const Common& c, const NormOpts& o, std::ostream& out) {
  Report r;
  const Symbol s = parse_symbol(o.symbol);
  NormEstimateOptions opts;
  if (o.method == "power") opts.method = NormMethod::power_iteration_p2;
  else if (o.method == "ascent") opts.method = NormMethod::random_ascent;
  else throw InvalidInput("--method must be power or ascent");
  opts.iterations = o.iterations;
  opts.tolerance = o.tolerance;
  opts.seed = c.seed;
  opts.starts = o.starts;
  opts.perturbations = o.perturbations;
  const MixedExponent p = exponent_for(o.p, c.d);
  const NormEstimate est = operator_norm_estimate(s, c.grid(), p, opts);

  add_check(r, "estimate finite", std::isfinite(est.value), est.value, 0.0, est.converged ? "converged" : "unconverged");
  if (!std::isnan(o.expect))
    add_check(r, "estimate matches expectation", std::abs(est.value - o.expect) <= o.tol * std::max(1.0, std::abs(o.expect)),
              est.value, o.expect);
  r.results["symbol"] = s.name();
  r.results["method"] = to_string(est.method);
  r.results["estimate"] = est.value;
  r.results["converged"] = est.converged;
  r.results["lower_bound"] = est.lower_bound;
  r.results["iterations"] = est.iterations;
  out << s.name() << ": " << to_string(est.method) << " estimate " << std::setprecision(10) << est.value
      << (est.lower_bound ? " (lower bound)" : "") << (est.converged ? "" : " [unconverged]") << '\n';
  return r;
}

Report run_budget(const Common& c, const BudgetOpts& o, std::ostream& out) {
  Report r;
  const SmoothnessBudget b = smoothness_budget(c.d, o.m, o.rho, o.delta);
  const auto v = budget_violations(b);
  std::string detail;
  for (const auto& s : v) detail += (detail.empty() ? "" : "; ") + s;
  add_check(r, "all inequalities hold", v.empty(), static_cast<double>(v.size()), 0.0, detail);
  r.results = {{"N", b.N}, {"Nprime", b.Nprime}, {"M", b.M}, {"Mprime", b.Mprime}};
  out << "N=" << b.N << " N′=" << b.Nprime << " M=" << b.M << " M′=" << b.Mprime << '\n';
  return r;
}

Report run_conditions(const Common& c, const ConditionOpts& o, std::ostream& out) {
  Report r;
  const ConditionReport cr = condition_report(o.m, o.rho, o.delta, c.d, parse_list(o.p));
  r.results = {{"necessary_margins", cr.necessary_margins},
               {"necessary_lp", cr.necessary_lp},
               {"sufficient_margin", cr.sufficient_margin},
               {"sufficient_thm32", cr.sufficient_thm32}};
  out << "necessary condition: " << (cr.necessary_lp ? "holds" : "fails") << ", margins";
  for (double m : cr.necessary_margins) out << ' ' << m;
  out << "\nsufficient condition: " << (cr.sufficient_thm32 ? "holds" : "fails") << ", margin " << cr.sufficient_margin
      << '\n';
  return r;
}

Report run_probe(const Common& c, const ProbeOpts& o, std::ostream& out) {
  Report r;
  const Symbol s = parse_symbol(o.symbol);
  std::vector<std::size_t> ns;
  for (double v : parse_list(o.resolutions)) {
    if (v != std::floor(v) || v < 8) throw InvalidInput("--resolutions must be integers >= 8");
    ns.push_back(static_cast<std::size_t>(v));
  }
  NormEstimateOptions opts;
  opts.method = NormMethod::random_ascent;
  opts.seed = c.seed;
  opts.iterations = o.iterations;
  opts.starts = o.starts;
  opts.perturbations = o.perturbations;
  const ProbeReport pr = necessary_condition_probe(s, c.d, o.p, c.R, ns, opts, o.growth_factor);

  const double first = pr.points.front().estimate.value;
  r.table_name = "resolutions";
  for (const ProbePoint& pt : pr.points)
    r.table.push_back({static_cast<double>(pt.n), pt.estimate.value, first, pt.estimate.value / first, pt.estimate.converged});
  if (o.expect == "grow") add_check(r, "estimates grow", pr.grows, pr.growth, o.growth_factor);
  else if (o.expect == "stable") add_check(r, "estimates stable", pr.variation <= o.stability, pr.variation, o.stability);
  else if (o.expect != "none") throw InvalidInput("--expect must be none, grow or stable");
  r.results["symbol"] = s.name();
  r.results["growth"] = pr.growth;
  r.results["variation"] = pr.variation;
  r.results["grows"] = pr.grows;
  r.results["all_converged"] = pr.all_converged;
  out << s.name() << ": L^" << o.p << " estimates";
  for (const ProbePoint& pt : pr.points) out << " n=" << pt.n << ":" << pt.estimate.value;
  out << " (growth " << pr.growth << ", variation " << pr.variation << ")\n";
  return r;
}

nlohmann::json echo_options(const CLI::App& app) {
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help" || opt->get_lnames().front() == "config") continue;
    j[opt->get_lnames().front()] = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
  }
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Symbol specs

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, "list"));
  return out;
}

Symbol parse_symbol(const std::string& spec) {
  const std::string text = trim(spec);
  if (text.empty()) throw InvalidInput("empty symbol spec");
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  std::map<std::string, std::string> kv;
  std::string bare;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (trim(item).empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        if (!bare.empty()) throw InvalidInput("symbol spec '" + spec + "': more than one bare value");
        bare = trim(item);
      } else {
        kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
      }
    }
  }

  std::map<std::string, bool> used;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    used[key] = true;
    return it->second;
  };
  auto real = [&](const std::string& key, std::optional<double> fallback) {
    if (auto v = take(key)) return parse_real(*v, kind + "." + key);
    if (!fallback) throw InvalidInput("symbol spec '" + spec + "': missing field '" + key + "'");
    return *fallback;
  };
  // Fourier coefficients and the claimed smoothness N (defaults to the
  // Hoelder smoothness when the coefficients are generated).
  auto series = [&]() -> std::pair<std::vector<Complex>, int> {
    std::vector<Complex> coeffs;
    std::optional<int> N;
    if (auto c = take("coeffs")) {
      for (double v : parse_list(*c)) coeffs.emplace_back(v);
      if (coeffs.empty()) throw InvalidInput("symbol spec '" + spec + "': empty coeffs");
    } else {
      const int smooth = parse_int(take("smoothness").value_or("2"), kind + ".smoothness");
      const int terms = parse_int(take("terms").value_or("8"), kind + ".terms");
      if (smooth < 0 || terms < 1) throw InvalidInput("symbol spec '" + spec + "': smoothness >= 0 and terms >= 1 required");
      coeffs = holder_coefficients(smooth, static_cast<std::size_t>(terms));
      N = smooth;
    }
    if (auto n = take("N")) N = parse_int(*n, kind + ".N");
    if (!N) throw InvalidInput("symbol spec '" + spec + "': field 'N' is required with explicit coeffs");
    return {std::move(coeffs), *N};
  };

  std::optional<Symbol> s;
  if (kind == "const" || kind == "zero") {
    if (kind == "zero") {
      s = Symbol::constant(0.0);
    } else if (!bare.empty()) {
      s = Symbol::constant(parse_real(bare, "const"));
      bare.clear();
    } else {
      s = Symbol::constant(Complex(real("re", 1.0), real("im", 0.0)));
    }
  } else if (kind == "bessel") {
    s = bessel_symbol(real("m", std::nullopt));
  } else if (kind == "wave") {
    s = wave_symbol(real("m", 0.0));
  } else if (kind == "multiplication" || kind == "fourier-series") {
    auto [c, N] = series();
    s = fourier_series_multiplication(std::move(c), real("omega", 1.0), N);
  } else if (kind == "separable") {
    auto [c, N] = series();
    const double omega = real("omega", 1.0), m = real("m", std::nullopt);
    s = separable_symbol(std::move(c), omega, m, N);
  } else if (kind == "variable-bessel") {
    s = variable_bessel_symbol(real("m", std::nullopt), real("amplitude", 0.5), real("omega", 1.0));
  } else {
    throw InvalidInput("unknown symbol kind '" + kind +
                       "' (expected const, zero, bessel, wave, multiplication, separable, variable-bessel)");
  }
  if (!bare.empty()) throw InvalidInput("symbol spec '" + spec + "': unexpected value '" + bare + "'");
  for (const auto& [key, value] : kv)
    if (!used[key]) throw InvalidInput("symbol spec '" + spec + "': unknown field '" + key + "'");
  return *s;
}

// ---------------------------------------------------------------------------
// Reports

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

nlohmann::json Report::to_json(const std::string& timestamp) const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "psido-lab";
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["timestamp"] = timestamp;
  nlohmann::json cs = nlohmann::json::array();
  std::size_t passed_count = 0;
  for (const Check& c : checks) {
    cs.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"predicted", c.predicted}, {"detail", c.detail}});
    passed_count += c.pass ? 1 : 0;
  }
  j["checks"] = cs;
  j["summary"] = {{"checks", checks.size()},
                  {"passed", passed_count},
                  {"failed", checks.size() - passed_count},
                  {"pass", passed()}};
  nlohmann::json tables = nlohmann::json::object();
  if (!table_name.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const TableRow& row : table)
      rows.push_back({{"j_or_t", row.j_or_t}, {"measured", row.measured}, {"predicted", row.predicted},
                      {"ratio", row.ratio}, {"pass", row.pass}});
    tables[table_name] = rows;
  }
  j["tables"] = tables;
  j["results"] = results;
  return j;
}

void Report::write_csv(std::ostream& out) const {
  out << "j_or_t,measured,predicted,ratio,pass\n" << std::setprecision(17);
  for (const TableRow& row : table)
    out << row.j_or_t << ',' << row.measured << ',' << row.predicted << ',' << row.ratio << ',' << (row.pass ? 1 : 0)
        << '\n';
}

void write_report(const Report& report, const std::optional<std::filesystem::path>& json_path,
                  const std::optional<std::filesystem::path>& csv_path) {
  if (json_path) {
    std::ofstream f(*json_path);
    if (!f) throw IoError("cannot open report for writing", *json_path);
    f << report.to_json(utc_timestamp()).dump(2) << '\n';
    if (!f) throw IoError("write failed", *json_path);
  }
  if (csv_path) {
    std::ofstream f(*csv_path);
    if (!f) throw IoError("cannot open table for writing", *csv_path);
    report.write_csv(f);
    if (!f) throw IoError("write failed", *csv_path);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Entry point

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for pseudodifferential operators with nonsmooth symbols", "psido-lab"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags override it");

  Common c;
  app.add_option("--d", c.d, "Dimension (1-3)");
  app.add_option("--n", c.n, "Points per axis (even, >= 8)");
  app.add_option("--R", c.R, "Half extent of the box [-R, R)^d");
  app.add_option("--seed", c.seed, "RNG seed for random inputs and searches");
  app.add_option("--out-dir", c.out_dir, "Directory for <command>.json and <command>.csv");
  app.add_option("--json", c.json, "JSON report path");
  app.add_option("--csv", c.csv, "CSV table path");

  ApplyOpts ao;
  auto* apply = app.add_subcommand("apply", "Apply T_sigma to a PSLB array or a seeded random band-limited function");
  apply->add_option("--symbol", ao.symbol, "Symbol spec");
  apply->add_option("--input", ao.input, "Input PSLB file");
  apply->add_option("--output", ao.output, "Output PSLB file");
  apply->add_option("--path", ao.path, "auto or direct");

  VerifyOpts vo;
  auto* verify = app.add_subcommand("verify-symbol", "Fit the class constants C_{alpha,beta}");
  verify->add_option("--symbol", vo.symbol, "Symbol spec")->required();
  verify->add_option("--radii", vo.radii, "Geometric radii in the sample set");
  verify->add_option("--x-count", vo.x_count, "x samples along the box diagonal");
  verify->add_option("--cap", vo.cap, "A constant passes when finite and below cap");
  verify->add_option("--max-order", vo.max_order, "Largest |alpha| + |beta| (<= 8)");
  verify->add_option("--derivs-csv", vo.derivs_csv, "Per-pair CSV with witnesses");

  DyadicOpts dyo;
  auto* dyadic = app.add_subcommand("dyadic", "Dyadic decomposition, reconstruction and kernel export");
  dyadic->add_option("--symbol", dyo.symbol, "Symbol spec")->required();
  dyadic->add_option("--J", dyo.J, "Truncation (0 selects the default)");
  dyadic->add_option("--x", dyo.x, "Evaluation point for x-dependent symbols");
  dyadic->add_option("--kernel-out", dyo.kernel_out, "PSLB file for the kernel sum");
  dyadic->add_option("--radial-csv", dyo.radial_csv, "CSV of (|z|, |k(z)|)");

  DecayOpts deo;
  auto* decay = app.add_subcommand("kernel-decay", "Kernel decay fit and dyadic envelope check");
  decay->add_option("--symbol", deo.symbol, "Symbol spec")->required();
  decay->add_option("--J", deo.J, "Truncation (0 selects the default)");
  decay->add_option("--x", deo.x, "Evaluation point for x-dependent symbols");
  decay->add_option("--alpha", deo.alpha, "x multi-index, comma separated");
  decay->add_option("--beta", deo.beta, "z multi-index, comma separated");
  decay->add_option("--L", deo.L, "Decay gain (default: smallest admissible)");
  decay->add_option("--z-lo", deo.z_lo, "Window start (default 4h)");
  decay->add_option("--z-hi", deo.z_hi, "Window end (default R/4)");
  decay->add_option("--shells", deo.shells, "Log-spaced radial shells");
  decay->add_option("--slope-tol", deo.slope_tol, "Assert |slope - predicted| <= tol");
  decay->add_option("--M", deo.M, "Also run the dyadic envelope check with this M");
  decay->add_option("--factor", deo.factor, "Envelope max/min factor");

  CzOpts czo;
  auto* cz = app.add_subcommand("cz-check", "Calderon-Zygmund type condition over a t sweep");
  cz->add_option("--symbol", czo.symbol, "Symbol spec")->required();
  cz->add_option("--l", czo.l, "Split index (default d-1)");
  cz->add_option("--t", czo.ts, "Comma-separated t values");
  cz->add_option("--Nconst", czo.Nconst, "Exclusion multiplier N > 1 (default d+1)");
  cz->add_option("--x0", czo.x0, "Centre x'_0 (default origin)");
  cz->add_option("--pbar", czo.pbar, "Leading exponents p_1..p_l (default 2)");
  cz->add_option("--inner", czo.inner, "Inner profile: gaussian, bump, cos2");
  cz->add_option("--inner-width", czo.inner_width, "Inner profile width");
  cz->add_option("--outer", czo.outer, "Outer profile (compactly supported)");
  cz->add_option("--input", czo.input, "Test function f as PSLB; checked against the first t");
  cz->add_option("--spread", czo.spread, "Assert max ratio <= spread * median");

  NormOpts no;
  auto* norm = app.add_subcommand("norm-estimate", "Operator norm estimate on L^p");
  norm->add_option("--symbol", no.symbol, "Symbol spec")->required();
  norm->add_option("--p", no.p, "Exponent(s), one or d comma-separated");
  norm->add_option("--method", no.method, "power or ascent");
  norm->add_option("--iterations", no.iterations, "Iteration budget");
  norm->add_option("--tolerance", no.tolerance, "Relative convergence tolerance");
  norm->add_option("--starts", no.starts, "Random starts (ascent)");
  norm->add_option("--perturbations", no.perturbations, "Random perturbations (ascent)");
  norm->add_option("--expect", no.expect, "Assert the estimate equals this value");
  norm->add_option("--tol", no.tol, "Relative tolerance for --expect");

  BudgetOpts bo;
  auto* budget = app.add_subcommand("budget", "Minimal even smoothness budget (N, N', M, M')");
  budget->add_option("--m", bo.m, "Order m");
  budget->add_option("--rho", bo.rho, "rho in (0, 1]");
  budget->add_option("--delta", bo.delta, "delta in [0, 1)");

  ConditionOpts co;
  auto* cond = app.add_subcommand("conditions", "Necessary and sufficient L^p conditions with margins");
  cond->add_option("--m", co.m, "Order m");
  cond->add_option("--rho", co.rho, "rho in [0, 1]");
  cond->add_option("--delta", co.delta, "delta in [0, 1)");
  cond->add_option("--p", co.p, "Exponent(s), comma separated");

  ProbeOpts po;
  auto* probe = app.add_subcommand("probe", "Norm estimates of a multiplier across resolutions");
  probe->add_option("--symbol", po.symbol, "Symbol spec (multiplier)");
  probe->add_option("--p", po.p, "Exponent p != 2");
  probe->add_option("--resolutions", po.resolutions, "Comma-separated n values");
  probe->add_option("--growth-factor", po.growth_factor, "Growth verdict threshold (last/first)");
  probe->add_option("--expect", po.expect, "none, grow or stable");
  probe->add_option("--stability", po.stability, "Allowed max/min - 1 for --expect stable");
  probe->add_option("--iterations", po.iterations, "Dual-map steps per start");
  probe->add_option("--starts", po.starts, "Random starts");
  probe->add_option("--perturbations", po.perturbations, "Random perturbations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    Report report;
    const CLI::App* sub = app.get_subcommands().front();
    if (sub == apply) report = run_apply(c, ao, out);
    else if (sub == verify) report = run_verify(c, vo, out);
    else if (sub == dyadic) report = run_dyadic(c, dyo, out);
    else if (sub == decay) report = run_decay(c, deo, out);
    else if (sub == cz) report = run_cz(c, czo, out);
    else if (sub == norm) report = run_norm(c, no, out);
    else if (sub == budget) report = run_budget(c, bo, out);
    else if (sub == cond) report = run_conditions(c, co, out);
    else report = run_probe(c, po, out);

    report.command = sub->get_name();
    report.seed = c.seed;
    report.config = echo_options(app);
    report.config.update(echo_options(*sub));

    std::optional<std::filesystem::path> json_path, csv_path;
    if (!c.json.empty()) json_path = c.json;
    if (!c.csv.empty()) csv_path = c.csv;
    if (!c.out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(c.out_dir, ec);
      if (ec) throw IoError("cannot create output directory", c.out_dir);
      if (!json_path) json_path = std::filesystem::path(c.out_dir) / (report.command + ".json");
      if (!csv_path && !report.table_name.empty()) csv_path = std::filesystem::path(c.out_dir) / (report.command + ".csv");
    }
    write_report(report, json_path, csv_path);

    for (const Check& ch : report.checks)
      out << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": measured " << ch.measured << ", predicted " << ch.predicted
          << (ch.detail.empty() ? "" : " [" + ch.detail + "]") << '\n';
    return report.passed() ? kOk : kCheckFailed;
  } catch (const InfeasibleBudget& e) {
    err << "infeasible budget: " << e.what() << '\n';
    for (const auto& b : e.binding()) err << "  binding: " << b << '\n';
    return kInvalidInput;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const EvaluationError& e) {
    err << "evaluation error: " << e.what() << '\n';
    return kEvaluationError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace psido::cli
