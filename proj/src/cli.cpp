#include "tcflow/cli.hpp"

#include "tcflow/eigenbasis.hpp"
#include "tcflow/inequalities.hpp"
#include "tcflow/io.hpp"
#include "tcflow/nonlinear_solver.hpp"
#include "tcflow/regression.hpp"
#include "tcflow/spectral_analysis.hpp"
#include "tcflow/threshold.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>

namespace tcflow::cli {

namespace {

using nlohmann::json;

/// Flat key-value document. Every key must be consumed by the subcommand, so typos are errors.
class Config {
 public:
  explicit Config(json doc) : doc_(std::move(doc)) {
    if (!doc_.is_object()) throw ConfigError("config: top level must be an object");
    for (const auto& [key, value] : doc_.items())
      if (value.is_object()) throw ConfigError(key + ": nested objects are not allowed");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  double num(const std::string& key, double fallback) {
    used_.insert(key);
    if (!doc_.contains(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number()) throw ConfigError(key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key + ": must be finite");
    return x;
  }

  long integer(const std::string& key, long fallback) {
    used_.insert(key);
    if (!doc_.contains(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
    return v.get<long>();
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    if (!doc_.contains(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!doc_.contains(key)) return fallback;
    if (!doc_.at(key).is_boolean()) throw ConfigError(key + ": expected true or false");
    return doc_.at(key).get<bool>();
  }

  std::string str(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    if (!doc_.contains(key)) return fallback;
    if (!doc_.at(key).is_string()) throw ConfigError(key + ": expected a string");
    return doc_.at(key).get<std::string>();
  }

  /// Accepts a single number or an array of numbers.
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) {
    used_.insert(key);
    if (!doc_.contains(key)) return fallback;
    const json& v = doc_.at(key);
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) throw ConfigError(key + ": expected a number or a non-empty array");
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key + ": array entries must be numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items())
      if (!used_.count(key)) throw ConfigError(key + ": unknown config key");
  }

  const json& raw() const { return doc_; }

 private:
  json doc_;
  std::set<std::string> used_;
};

struct Context {
  std::string command;
  Config cfg;
  std::string out_dir;
  std::optional<std::uint64_t> seed_flag;
  std::optional<long> samples_flag;
  json overrides = json::object();
};

FlowParams read_params(Config& c, bool allow_zero_B) {
  const double nu = c.num("nu", 1e-4);
  const double A = c.num("A", 0.0);
  const double B = c.num("B", 1.0);
  const double R = c.num("R", 2.0);
  if (B == 0.0) {
    if (!allow_zero_B) throw ConfigError("B: must be nonzero");
    return FlowParams::shear_free(nu, A, R);
  }
  return FlowParams(nu, A, B, R);
}

int read_int(Config& c, const std::string& key, long fallback, long lo, long hi) {
  const long v = c.integer(key, fallback);
  if (v < lo || v > hi)
    throw ConfigError(key + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double positive(Config& c, const std::string& key, double fallback) {
  const double v = c.num(key, fallback);
  if (!(v > 0.0)) throw ConfigError(key + ": must be > 0");
  return v;
}

std::uint64_t seed_of(Context& ctx) {
  const std::uint64_t from_cfg = ctx.cfg.u64("seed", 1);
  return ctx.seed_flag ? *ctx.seed_flag : from_cfg;
}

json params_json(const FlowParams& p) { return {{"nu", p.nu()}, {"A", p.A()}, {"B", p.B()}, {"R", p.R()}}; }

void emit(const Context& ctx, const CsvTable& csv, json results, const json& grid_info, bool pass) {
  json doc;
  doc["command"] = ctx.command;
  doc["version"] = kVersion;
  doc["config"] = ctx.cfg.raw();
  doc["overrides"] = ctx.overrides;
  doc["grid"] = grid_info;
  doc["results"] = std::move(results);
  doc["pass"] = pass;
  CsvTable out = csv;
  const std::string base = (std::filesystem::path(ctx.out_dir) / ctx.command).string();
  write_text_file(base + ".csv", out.str());
  write_text_file(base + ".json", doc.dump(2) + "\n");
}

CsvTable provenance(const Context& ctx, std::string header, const json& grid_info) {
  CsvTable csv(std::move(header));
  csv.add_comment(std::string(kVersion) + " " + ctx.command);
  csv.add_comment("config " + ctx.cfg.raw().dump());
  if (!ctx.overrides.empty()) csv.add_comment("overrides " + ctx.overrides.dump());
  csv.add_comment("grid " + grid_info.dump());
  return csv;
}

// ---------------------------------------------------------------------------

int cmd_resolvent(Context& ctx) {
  Config& c = ctx.cfg;
  const FlowParams p = read_params(c, true);
  const int k = read_int(c, "k", 1, -1000, 1000);
  const int N = read_int(c, "N", 96, 8, 512);
  const std::vector<double> lambdas_cfg = c.list("lambda", {});
  c.finish();

  const GridPtr grid = build_grid(N, p.R());
  const ModeOperator op = assemble_mode_operator(grid, p, k);
  const std::vector<double> lambdas = lambdas_cfg.empty() ? default_lambda_grid(op) : lambdas_cfg;
  std::vector<ResolventProbe> probes(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) { probes[i] = resolvent_probe(op, lambdas[i]); });

  const json grid_info = {{"N", N}, {"n_points", grid->n_points}, {"interior", grid->interior_size()}};
  CsvTable csv = provenance(ctx, scan_csv_header(), grid_info);
  csv.add_comment("variable lambda, value sigma_min");
  double best = std::numeric_limits<double>::infinity(), best_lambda = 0.0, max_res = 0.0;
  for (const auto& pr : probes) {
    csv.add_row(scan_csv_row({p, k, pr.lambda, pr.sigma_min, grid->n_points}));
    if (pr.sigma_min < best) {
      best = pr.sigma_min;
      best_lambda = pr.lambda;
    }
    max_res = std::max(max_res, pr.residual);
  }
  json results = {{"params", params_json(p)}, {"k", k}, {"count", probes.size()}, {"sigma_min", best},
                  {"lambda_at_min", best_lambda}, {"max_residual", max_res}};
  emit(ctx, csv, results, grid_info, true);
  return 0;
}

int cmd_pseudospectrum(Context& ctx) {
  Config& c = ctx.cfg;
  const std::vector<double> nus = c.list("nu", {1e-5, 1e-4, 1e-3});
  const std::vector<double> Bs = c.list("B", {1.0, 4.0, 16.0});
  const std::vector<double> Rs = c.list("R", {2.0, 4.0});
  const double A = c.num("A", 0.0);
  const int k = read_int(c, "k", 1, -1000, 1000);
  const int N = read_int(c, "N", 96, 8, 512);
  const int refine = read_int(c, "refine_iters", 60, 0, 200);
  c.finish();

  const json grid_info = {{"N", N}, {"n_points", N + 1}};
  CsvTable csv = provenance(ctx, scan_csv_header(), grid_info);
  csv.add_comment("variable lambda_star, value psi");
  json points = json::array();
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  bool witness = true;
  std::map<double, GridPtr> grids;
  for (const double nu : nus)
    for (const double B : Bs)
      for (const double R : Rs) {
        const FlowParams p = B == 0.0 ? FlowParams::shear_free(nu, A, R) : FlowParams(nu, A, B, R);
        if (!grids.count(R)) grids[R] = build_grid(N, R);
        const ModeOperator op = assemble_mode_operator(grids[R], p, k);
        const PseudospectralBound pb = pseudospectral_bound(op, default_lambda_grid(op), refine);
        for (const auto& s : pb.scan) witness = witness && s.sigma_min >= pb.psi;
        const double g = p.enhanced_rate(k);
        const double ratio = g > 0.0 ? pb.psi / g : std::numeric_limits<double>::quiet_NaN();
        if (g > 0.0) {
          rmin = std::min(rmin, ratio);
          rmax = std::max(rmax, ratio);
        }
        csv.add_row(scan_csv_row({p, k, pb.lambda_star, pb.psi, N + 1}));
        points.push_back({{"params", params_json(p)}, {"psi", pb.psi}, {"lambda_star", pb.lambda_star},
                          {"ratio", ratio}, {"in_regime", p.in_regime()}});
      }
  const bool have_ratio = rmax > 0.0;
  const bool floor_ok = !have_ratio || rmin >= regression::kPsiRatioFloor;
  const bool spread_ok = !have_ratio || rmax / rmin < regression::kPsiRatioSpread;
  json results = {{"k", k},
                  {"points", points},
                  {"ratio_min", have_ratio ? rmin : 0.0},
                  {"ratio_max", rmax},
                  {"checks",
                   {{"ratio_floor", floor_ok}, {"ratio_spread", spread_ok}, {"lower_bound_witness", witness}}}};
  const bool pass = floor_ok && spread_ok && witness;
  emit(ctx, csv, results, grid_info, pass);
  return pass ? 0 : 1;
}

int cmd_semigroup(Context& ctx) {
  Config& c = ctx.cfg;
  const FlowParams p = read_params(c, true);
  const int k = read_int(c, "k", 1, -1000, 1000);
  const int N = read_int(c, "N", 96, 8, 512);
  const int count = read_int(c, "t_count", 30, 2, 10000);
  std::vector<double> times = c.list("t", {});
  c.finish();
  for (const double t : times)
    if (!(t >= 0.0)) throw ConfigError("t: times must be >= 0");

  const GridPtr grid = build_grid(N, p.R());
  const ModeOperator op = assemble_mode_operator(grid, p, k);
  if (times.empty()) times = default_time_grid(op, count);
  const PseudospectralBound pb = pseudospectral_bound(op, default_lambda_grid(op));
  std::vector<double> norms(times.size());
  parallel_for(times.size(), [&](std::size_t i) { norms[i] = semigroup_norm(op, times[i]); });

  const json grid_info = {{"N", N}, {"n_points", grid->n_points}};
  CsvTable csv = provenance(ctx, scan_csv_header(), grid_info);
  csv.add_comment("variable t, value ||exp(-t L)||");
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    csv.add_row(scan_csv_row({p, k, times[i], norms[i], grid->n_points}));
    worst = std::max(worst, norms[i] / std::exp(-times[i] * pb.psi + kPi / 2.0));
  }
  const bool pass = worst <= 1.0 + 1e-6;
  json results = {{"params", params_json(p)}, {"k", k}, {"psi", pb.psi}, {"lambda_star", pb.lambda_star},
                  {"max_bound_ratio", worst}, {"checks", {{"gearhart_pruss", pass}}}};
  emit(ctx, csv, results, grid_info, pass);
  return pass ? 0 : 1;
}

int cmd_rates(Context& ctx) {
  Config& c = ctx.cfg;
  const std::string sweep = c.str("sweep", "nu");
  if (sweep != "nu" && sweep != "B") throw ConfigError("sweep: must be \"nu\" or \"B\"");
  const std::vector<double> values =
      c.list("values", sweep == "nu" ? std::vector<double>{1e-6, 1e-5, 1e-4, 1e-3}
                                     : std::vector<double>{1.0, 2.0, 4.0, 8.0, 16.0});
  const FlowParams base = read_params(c, false);
  const int k = read_int(c, "k", 1, -1000, 1000);
  const int N = read_int(c, "N", 96, 8, 512);
  const int count = read_int(c, "t_count", 30, 4, 10000);
  c.finish();

  const GridPtr grid = build_grid(N, base.R());
  std::vector<DecayFit> fits;
  for (const double v : values) {
    const FlowParams p = sweep == "nu" ? base.with_nu(v) : base.with_B(v);
    const ModeOperator op = assemble_mode_operator(grid, p, k);
    fits.push_back(decay_rate_fit(op, default_time_grid(op, count)));
  }
  const json grid_info = {{"N", N}, {"n_points", grid->n_points}};
  CsvTable csv = provenance(ctx, scan_csv_header(), grid_info);
  csv.add_comment("variable " + sweep + ", value fitted rate");
  json rows = json::array();
  bool all_accepted = true;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const DecayFit& f = fits[i];
    csv.add_row(scan_csv_row({f.params, k, values[i], f.rate, f.n_points, f.r_squared}));
    const double g = f.params.enhanced_rate(k);
    rows.push_back({{"params", params_json(f.params)}, {"rate", f.rate}, {"prefactor", f.prefactor},
                    {"window", {f.t_min, f.t_max}}, {"r_squared", f.r_squared}, {"accepted", f.accepted},
                    {"rate_over_scale", f.rate / g}});
    all_accepted = all_accepted && f.accepted;
  }
  json results = {{"sweep", sweep}, {"k", k}, {"fits", rows}};
  if (fits.size() >= 4) {
    try {
      const ExponentFit e = scaling_exponent(fits, sweep == "nu" ? SweepVariable::Nu : SweepVariable::B);
      results["exponent"] = {{"slope", e.slope}, {"std_error", e.std_error}, {"r_squared", e.r_squared},
                             {"degenerate", e.degenerate}, {"count", e.count}};
    } catch (const ConfigError& e) {
      results["exponent_error"] = e.what();
    }
  }
  results["checks"] = {{"fits_accepted", all_accepted}};
  emit(ctx, csv, results, grid_info, all_accepted);
  return all_accepted ? 0 : 1;
}

int cmd_basis(Context& ctx) {
  Config& c = ctx.cfg;
  const double R = c.num("R", 2.0);
  const int N = read_int(c, "N", 128, 8, 1024);
  const int l_max = read_int(c, "l_max", 16, 1, 1024);
  const int l_res = read_int(c, "residual_l_max", 20, 1, 1024);
  const int k = read_int(c, "k", 1, -1000, 1000);
  c.finish();

  const GridPtr grid = build_grid(N, R);
  const WeightedBasis basis = build_basis(grid, std::max(l_max, l_res));
  const Vec weight = grid->nodes.array().square().inverse();
  double gram_dev = 0.0;
  std::vector<double> row_err(l_max, 0.0);
  for (int l = 1; l <= l_max; ++l)
    for (int m = 1; m <= l_max; ++m) {
      const Complex g = weighted_inner(*grid, basis.psi(l), basis.psi(m), weight);
      const double e = std::abs(g - (l == m ? 1.0 : 0.0));
      row_err[l - 1] = std::max(row_err[l - 1], e);
      gram_dev = std::max(gram_dev, e);
    }
  const int m = grid->interior_size();
  const Vec inv_r2 = grid->interior_nodes().array().square().inverse();
  double max_res = 0.0;
  std::vector<double> residual(l_res, 0.0);
  for (int l = 1; l <= l_res; ++l) {
    const CVec psi = basis.psi(l);
    CVec res = (grid->d2.cast<Complex>() * psi).segment(1, m);
    res += ((basis.lambda(k, l) - (k * k - 0.25)) * inv_r2).cast<Complex>().cwiseProduct(psi.segment(1, m));
    residual[l - 1] = grid->l2_norm(res) / grid->l2_norm(psi);
    max_res = std::max(max_res, residual[l - 1]);
  }
  const json grid_info = {{"N", N}, {"n_points", grid->n_points}};
  CsvTable csv = provenance(ctx, "l,lambda_kl,gram_row_error,eigen_residual", grid_info);
  for (int l = 1; l <= std::max(l_max, l_res); ++l)
    csv.add_row(csv_join({std::to_string(l), format_double(basis.lambda(k, l)),
                          l <= l_max ? format_double(row_err[l - 1]) : "nan",
                          l <= l_res ? format_double(residual[l - 1]) : "nan"}));
  const bool gram_ok = gram_dev <= 1e-10;
  const bool res_ok = max_res <= 1e-8;
  json results = {{"R", R},
                  {"k", k},
                  {"alpha", basis.alpha},
                  {"beta", basis.beta},
                  {"gram_deviation", gram_dev},
                  {"max_eigen_residual", max_res},
                  {"checks", {{"gram", gram_ok}, {"eigen_relation", res_ok}}}};
  emit(ctx, csv, results, grid_info, gram_ok && res_ok);
  return gram_ok && res_ok ? 0 : 1;
}

CVec damping_profile(const RadialGrid& grid, const std::string& name) {
  const Vec r = grid.interior_nodes();
  CVec w(r.size());
  const double R = grid.R;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (name == "bump") {
      w(j) = std::pow((r(j) - 1.0) * (R - r(j)), 2);
    } else if (name == "psi1") {
      const double logr = std::log(R);
      w(j) = std::sqrt(2.0 / logr) * std::sqrt(r(j)) * std::sin(kPi * std::log(r(j)) / logr);
    } else {
      throw ConfigError("profile: unknown damping profile '" + name + "'");
    }
  }
  return w / grid.l2_norm(w);
}

int cmd_damping(Context& ctx) {
  Config& c = ctx.cfg;
  const FlowParams p = read_params(c, false);
  const int k = read_int(c, "k", 1, -1000, 1000);
  if (k == 0) throw ConfigError("k: must be nonzero");
  const int N = read_int(c, "N", 192, 8, 1024);
  const double T = positive(c, "T", 200.0 / std::abs(k * p.B()));
  const int n_t = read_int(c, "n_t", 400, 200, 10000000);
  const std::string profile = c.str("profile", "bump");
  const bool viscous = c.flag("viscous", true);
  const double T_visc = positive(c, "T_viscous", 10.0 / p.enhanced_rate(k));
  c.finish();

  const GridPtr grid = build_grid(N, p.R());
  const CVec w0 = damping_profile(*grid, profile);
  const DampingRecord rec = integrated_damping(grid, w0, k, p, T, n_t);
  const DampingRecord rec2 = integrated_damping(grid, w0, k, p, 2.0 * T, n_t);
  const double change = rec.ratio > 0.0 ? std::abs(rec2.ratio - rec.ratio) / rec.ratio : 0.0;

  const json grid_info = {{"N", N}, {"n_points", grid->n_points}};
  CsvTable csv = provenance(ctx, "t,grad_phi,angular_phi,running", grid_info);
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    csv.add_row(csv_join({format_double(rec.times[i]), format_double(rec.grad_phi[i]),
                          format_double(rec.angular_phi[i]), format_double(rec.running[i])}));
  const bool bound_ok = rec.ratio <= regression::kIntegratedDamping;
  const bool converged = change < 0.02;
  json results = {{"params", params_json(p)}, {"k", k},           {"profile", profile}, {"T", T},
                  {"n_t", rec.n_t},           {"ratio", rec.ratio}, {"ratio_2T", rec2.ratio},
                  {"relative_change_2T", change}, {"oscillations_2T", rec2.oscillations}};
  const bool resolved = rec2.resolved;
  bool pass = bound_ok && converged && resolved;
  json checks = {{"damping_bound", bound_ok}, {"T_convergence", converged}, {"resolved", resolved}};
  if (viscous) {
    const ViscousDampingRecord v = viscous_damping_check(grid, w0, k, p, T_visc);
    results["viscous"] = {{"T", v.T},     {"n_t", v.n_t}, {"weight_rate", v.weight_rate},
                          {"lhs", v.lhs}, {"rhs", v.rhs}, {"ratio", v.ratio}};
    const bool visc_ok = v.ratio <= regression::kViscousDamping;
    checks["viscous_bound"] = visc_ok;
    pass = pass && visc_ok;
  }
  results["checks"] = checks;
  emit(ctx, csv, results, grid_info, pass);
  return pass ? 0 : 1;
}

SimulationConfig read_simulation(Context& ctx) {
  Config& c = ctx.cfg;
  SimulationConfig s;
  s.params = read_params(c, false);
  s.K = read_int(c, "K", 16, 1, 512);
  s.N = read_int(c, "N", 96, 8, 512);
  if (c.has("dt")) s.dt = positive(c, "dt", 0.0);
  else c.num("dt", 0.0);
  s.cfl = positive(c, "cfl", 0.5);
  if (c.has("T")) s.T = positive(c, "T", 0.0);
  else c.num("T", 0.0);
  s.profile = c.str("profile", "random");
  s.amplitude = c.num("amplitude", 0.01 * std::sqrt(s.params.nu() * std::abs(s.params.B())) /
                                       (s.params.R() * s.params.R()));
  s.seed = seed_of(ctx);
  s.nonlinear = c.flag("nonlinear", true);
  s.samples = read_int(c, "samples", 400, 2, 1000000);
  s.c_prime = c.num("c_prime", 0.5);
  validate(s);
  return s;
}

int cmd_simulate(Context& ctx) {
  const SimulationConfig s = read_simulation(ctx);
  ctx.cfg.finish();
  const SimulationResult res = simulate(s);

  const json grid_info = {{"N", s.N}, {"n_points", s.N + 1}, {"K", s.K}};
  CsvTable csv = provenance(ctx, diagnostics_csv_header(s.K), grid_info);
  for (const auto& d : res.samples) csv.add_row(diagnostics_csv_row(d));
  const bool mean_ok = res.max_mean <= 2.0 * res.initial_mean + regression::kMeanGrowth * res.initial_functional;
  json results = {{"params", params_json(s.params)},
                  {"dt", res.dt},
                  {"steps", res.steps},
                  {"T", res.steps * res.dt},
                  {"mu", res.mu},
                  {"initial_nonzero", res.initial_nonzero},
                  {"initial_mean", res.initial_mean},
                  {"initial_functional", res.initial_functional},
                  {"max_growth", res.max_growth},
                  {"max_mean", res.max_mean},
                  {"final_ratio", res.final_ratio},
                  {"fitted_rate", res.fitted_rate},
                  {"fit_r_squared", res.fit_r_squared},
                  {"mode1_rate", res.mode1_rate},
                  {"enhanced_rate", s.params.enhanced_rate(1)},
                  {"regime_ratio", s.params.regime_ratio()},
                  {"failed", res.failed}};
  if (res.failed) results["failure"] = {{"time", res.failure_time}, {"reason", res.failure_reason}};
  results["checks"] = {{"integration", !res.failed}, {"mean_bound", mean_ok}};
  const bool pass = !res.failed && mean_ok;
  emit(ctx, csv, results, grid_info, pass);
  return pass ? 0 : 1;
}

json probe_json(const ProbeResult& p) {
  return {{"amplitude", p.amplitude},   {"verdict", to_string(p.verdict)}, {"final_ratio", p.final_ratio},
          {"max_growth", p.max_growth}, {"max_mean", p.max_mean},          {"initial_functional", p.initial_functional},
          {"reason", p.reason}};
}

int cmd_threshold(Context& ctx) {
  ThresholdConfig tc;
  tc.sim = read_simulation(ctx);
  Config& c = ctx.cfg;
  tc.decay_ratio = c.num("decay_ratio", 0.1);
  tc.growth_cap = c.num("growth_cap", 20.0);
  const std::vector<double> nus = c.list("nu_values", {tc.sim.params.nu()});
  const std::vector<double> ladder = c.list("ladder", {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0});
  const int iters = read_int(c, "iters", 6, 0, 12);
  const bool explicit_bracket = c.has("a_lo") || c.has("a_hi");
  const double a_lo = c.num("a_lo", 0.0), a_hi = c.num("a_hi", 0.0);
  c.finish();
  if (explicit_bracket && nus.size() != 1) throw ConfigError("a_lo: explicit bracket needs a single nu");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] > ladder[i - 1] && ladder[0] > 0.0)) throw ConfigError("ladder: must be positive and increasing");

  const json grid_info = {{"N", tc.sim.N}, {"n_points", tc.sim.N + 1}, {"K", tc.sim.K}};
  CsvTable csv = provenance(ctx, probe_csv_header(), grid_info);
  json per_nu = json::array();
  std::vector<ThresholdRecord> records;
  bool small_data_ok = true;
  for (const double nu : nus) {
    ThresholdConfig local = tc;
    local.sim.params = tc.sim.params.with_nu(nu);
    const FlowParams& p = local.sim.params;
    const double scale = std::sqrt(nu * std::abs(p.B())) / (p.R() * p.R());
    json entry = {{"nu", nu}, {"scale", scale}};
    std::vector<ProbeResult> all;
    std::optional<std::pair<double, double>> bracket;
    if (explicit_bracket) {
      bracket = {a_lo, a_hi};
    } else {
      std::vector<double> amps;
      for (const double f : ladder) amps.push_back(f * scale);
      const auto probes = ladder_scan(local, amps);
      all = probes;
      for (std::size_t i = 0; i < probes.size(); ++i) {
        if (ladder[i] <= 0.01 && probes[i].verdict != Verdict::Stable) small_data_ok = false;
        if (probes[i].verdict == Verdict::NotCertified) {
          if (i > 0 && probes[i - 1].verdict == Verdict::Stable) bracket = {amps[i - 1], amps[i]};
          break;
        }
      }
    }
    if (bracket) {
      const ThresholdRecord rec = threshold_bisect(local, bracket->first, bracket->second, iters);
      // the bracket ends were already probed on the ladder
      const std::size_t skip = explicit_bracket ? 0 : std::min<std::size_t>(2, rec.probes.size());
      all.insert(all.end(), rec.probes.begin() + skip, rec.probes.end());
      entry["amplitude_star"] = rec.amplitude_star;
      entry["bracket"] = {rec.a_lo, rec.a_hi};
      entry["iterations"] = rec.iterations;
      records.push_back(rec);
    } else {
      entry["amplitude_star"] = nullptr;
      entry["bracket"] = nullptr;
    }
    json probes = json::array();
    for (const auto& pr : all) {
      csv.add_row(probe_csv_row(pr));
      probes.push_back(probe_json(pr));
    }
    entry["probes"] = probes;
    per_nu.push_back(entry);
  }
  json results = {{"decay_ratio", tc.decay_ratio}, {"growth_cap", tc.growth_cap}, {"per_nu", per_nu}};
  if (records.size() >= 4) {
    const BetaFit b = beta_fit(records);
    results["beta"] = {{"slope", b.slope},   {"std_error", b.std_error}, {"ci", {b.ci_low, b.ci_high}},
                       {"degenerate", b.degenerate}, {"count", b.count}};
  }
  results["checks"] = {{"small_data_stable", small_data_ok}};
  emit(ctx, csv, results, grid_info, small_data_ok);
  return small_data_ok ? 0 : 1;
}

int cmd_inequalities(Context& ctx) {
  Config& c = ctx.cfg;
  const std::vector<double> Rs = c.list("R_values", {1.5, 2.0, 4.0});
  const int N = read_int(c, "N", 128, 8, 1024);
  const long samples_cfg = c.integer("samples", 1000);
  const bool elliptic = c.flag("elliptic", true);
  const std::uint64_t seed = seed_of(ctx);
  c.finish();
  const long samples = ctx.samples_flag ? *ctx.samples_flag : samples_cfg;
  if (samples < 1 || samples > 100000000) throw ConfigError("samples: must be >= 1");
  for (const double R : Rs)
    if (!(R > 1.0)) throw ConfigError("R_values: entries must be > 1");

  std::vector<LemmaReport> reports;
  for (const double R : Rs) {
    const GridPtr grid = build_grid(N, R);
    const int n = static_cast<int>(samples);
    for (auto&& batch : {check_sobolev_a1(n, *grid, seed), check_weighted_linf_a2(n, *grid, seed),
                         check_poincare_a5(n, *grid, seed)})
      reports.insert(reports.end(), batch.begin(), batch.end());
    if (elliptic) {
      for (auto&& batch : {check_elliptic_a4(n, grid, seed), check_elliptic_a6(n, grid, seed)})
        reports.insert(reports.end(), batch.begin(), batch.end());
    }
  }
  const json grid_info = {{"N", N}, {"n_points", N + 1}};
  CsvTable csv = provenance(ctx, "lemma,R,mode,samples,worst_ratio,bound,pass,worst_index", grid_info);
  json lemmas = json::array();
  bool pass = true;
  for (const auto& r : reports) {
    csv.add_row(csv_join({r.name, format_double(r.R), r.mode, std::to_string(r.samples), format_double(r.worst_ratio),
                          format_double(r.bound), r.pass ? "true" : "false", std::to_string(r.worst_index)}));
    lemmas.push_back({{"lemma", r.name},           {"R", r.R},         {"mode", r.mode},
                      {"samples", r.samples},      {"worst_ratio", r.worst_ratio}, {"bound", r.bound},
                      {"pass", r.pass},            {"worst_index", r.worst_index}});
    pass = pass && r.pass;
  }
  json results = {{"seed", seed}, {"samples", samples}, {"lemmas", lemmas}};
  emit(ctx, csv, results, grid_info, pass);
  return pass ? 0 : 1;
}

const std::map<std::string, std::pair<int (*)(Context&), const char*>>& commands() {
  static const std::map<std::string, std::pair<int (*)(Context&), const char*>> table = {
      {"resolvent", {cmd_resolvent, "smallest singular value of L_k - i lambda over a lambda grid"}},
      {"pseudospectrum", {cmd_pseudospectrum, "pseudospectral bound Psi over a (nu, B, R) sweep"}},
      {"semigroup", {cmd_semigroup, "semigroup norms and the Gearhart-Pruss bound"}},
      {"rates", {cmd_rates, "decay-rate fits and scaling exponent over a nu or B sweep"}},
      {"basis", {cmd_basis, "weighted eigenbasis orthonormality and eigen-relation residuals"}},
      {"damping", {cmd_damping, "integrated inviscid damping and its viscous counterpart"}},
      {"simulate", {cmd_simulate, "nonlinear perturbation simulation"}},
      {"threshold", {cmd_threshold, "stability probes, bisection and threshold exponent"}},
      {"inequalities", {cmd_inequalities, "randomized checks of the functional inequalities"}},
  };
  return table;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"tcflow: spectral toolkit for perturbations of Taylor-Couette flow"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  long samples = 0;
  unsigned threads = 0;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands()) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("--config", config_path, "flat JSON config document")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default .)");
    sub->add_option("--seed", seed, "RNG seed, overrides the config key");
    sub->add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
    if (name == "inequalities") sub->add_option("--samples", samples, "samples per lemma and R");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  std::string name;
  for (const auto& [n, sub] : subs)
    if (sub->parsed()) name = n;
  CLI::App* sub = subs.at(name);

  const auto start = std::chrono::steady_clock::now();
  try {
    json doc = json::object();
    if (!config_path.empty()) {
      try {
        doc = json::parse(read_text_file(config_path));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
    Context ctx{name, Config(std::move(doc)), out_dir, std::nullopt, std::nullopt};
    if (sub->count("--seed")) {
      ctx.seed_flag = seed;
      ctx.overrides["seed"] = seed;
    }
    if (name == "inequalities" && sub->count("--samples")) {
      ctx.samples_flag = samples;
      ctx.overrides["samples"] = samples;
    }
    set_thread_count(threads);
    const int code = commands().at(name).first(ctx);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string log = std::string(kVersion) + "\ncommand " + name + "\nwall_time_s " + format_double(wall) +
                            "\nthreads " + std::to_string(thread_count()) + "\nexit " + std::to_string(code) + "\n";
    write_text_file((std::filesystem::path(out_dir) / (name + ".log")).string(), log);
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.1f", wall);
    std::cout << name << ": " << (code == 0 ? "ok" : "check failed") << " (" << secs << " s)\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tcflow::cli
