#include "zomd/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "zomd/analysis.hpp"
#include "zomd/cli/config.hpp"
#include "zomd/errors.hpp"

namespace zomd::cli {

namespace {

namespace fs = std::filesystem;

// Sub-stream ids of the master seed used outside ensembles (ensemble trials use 0, 1, 2, ...).
constexpr std::uint64_t kVerifyPointStream = 0x7a6f6d6470726f62ULL;
constexpr std::uint64_t kVerifySampleStream = 0x7a6f6d6476657269ULL;

struct Context {
  ExperimentConfig config;  // with command-line overrides applied
  Built built;
  fs::path out_dir;
};

Context Load(const CommandOptions& options) {
  ExperimentConfig config = load_config(options.config);
  if (options.seed) config.run.master_seed = *options.seed;
  if (options.trials) {
    if (*options.trials < 1) throw ConfigError("--trials must be >= 1");
    config.run.trials = *options.trials;
  }
  Built built = build(config);
  fs::path out_dir = options.out ? *options.out : fs::path(config.output.directory.value_or("zomd_out"));
  return Context{std::move(config), std::move(built), std::move(out_dir)};
}

fs::path PrepareOutput(const fs::path& dir) {
  fs::create_directories(dir);
  return dir;
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write " + path.string());
  file << content;
  if (!file) throw Error("write failed for " + path.string());
}

std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

Json VectorJson(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Linear interpolation between order statistics.
double Quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Json TheoryJson(const TheoryParams& tp, const Problem& problem) {
  Json j = {{"class", std::string(to_string(tp.cls))},
            {"n", tp.n},
            {"mu", tp.mu},
            {"delta", tp.delta},
            {"B1", tp.B1},
            {"K", tp.K},
            {"K1", tp.K1},
            {"C", tp.C},
            {"D", tp.D},
            {"sigma_R", tp.sigma_R},
            {"kappa1", tp.kappa1},
            {"kappa2", tp.kappa2},
            {"L0", tp.L0},
            {"B", tp.B},
            {"V", tp.V},
            {"V_valid", problem.noise.v_valid()},
            {"radius", neighborhood_radius(tp)}};
  if (tp.L1) j["L1"] = *tp.L1;
  if (tp.G) j["G"] = *tp.G;
  return j;
}

Json BoundReportJson(const TheoryParams& tp, const Built& built, double epsilon, std::int64_t T) {
  const StepSchedule& schedule = built.experiment.schedule;
  Json j = {{"epsilon", epsilon}, {"neighborhood_radius", neighborhood_radius(tp)}};
  BoundReport report;
  try {
    report = make_bound_report(tp, schedule, epsilon, built.confidences, T, built.curve_points, built.scan_cap);
  } catch (const ScanLimitError& e) {
    j["t0"] = nullptr;
    j["bound_at_T"] = 1.0;
    j["concentration_curve"] = Json::array();
    j["t_confidence"] = Json::array();
    for (double p : built.confidences) j["t_confidence"].push_back({{"p", p}, {"t", nullptr}});
    j["note"] = e.what();
    return j;
  }
  j["t0"] = report.t0;
  j["bound_at_T"] = T < report.t0 ? 1.0 : concentration_bound(T, epsilon, schedule, tp);
  Json curve = Json::array();
  for (const CurvePoint& point : report.concentration_curve) {
    curve.push_back({{"t", point.t}, {"bound", point.bound}, {"raw", point.raw}});
  }
  j["concentration_curve"] = curve;
  Json confidence = Json::array();
  for (const auto& [p, t] : report.t_confidence) {
    confidence.push_back({{"p", p}, {"t", t ? Json(*t) : Json(nullptr)}});
  }
  j["t_confidence"] = confidence;
  return j;
}

bool WantsFormat(const ExperimentConfig& config, const std::string& format) {
  if (!config.output.formats) return true;
  const auto& formats = *config.output.formats;
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::string TrajectoryCsv(const Trajectory& trajectory, int n) {
  std::string csv = "t,alpha,f_x,f_z,gap_z,diag_sum,cum_alpha";
  const bool with_x = n <= 10;
  if (with_x) {
    for (int i = 1; i <= n; ++i) csv += fmt::format(",x_{}", i);
  }
  csv += '\n';
  for (const TrajectoryRecord& r : trajectory.records) {
    csv += fmt::format("{},{},{},{},{},{},{}", r.t, r.alpha, r.f_x, r.f_z, r.gap_z, r.diag_sum, r.cum_alpha);
    if (with_x) {
      for (int i = 0; i < n; ++i) csv += fmt::format(",{}", r.x[i]);
    }
    csv += '\n';
  }
  return csv;
}

int RunCommand(const CommandOptions& options, std::ostream& out, std::ostream&) {
  Context ctx = Load(options);
  const Built& b = ctx.built;
  const Experiment& exp = b.experiment;
  const Problem& problem = exp.problem;
  const int n = problem.dimension();
  const TheoryParams tp = make_theory_params(problem, b.theory);

  const auto trajectories = run_ensemble_trajectories(exp, b.trials, b.master_seed, RunOptions{}, b.workers);
  PrepareOutput(ctx.out_dir);

  if (WantsFormat(ctx.config, "csv")) {
    for (const Trajectory& trajectory : trajectories) {
      const std::string name =
          b.trials == 1 ? "trajectory.csv" : fmt::format("trajectory_{:04d}.csv", trajectory.summary.trial);
      WriteFile(ctx.out_dir / name, TrajectoryCsv(trajectory, n));
    }
  }

  std::vector<double> gaps;
  Json trials = Json::array();
  for (const Trajectory& trajectory : trajectories) {
    const TrajectorySummary& s = trajectory.summary;
    gaps.push_back(s.final_gap_z);
    trials.push_back({{"trial", s.trial},
                      {"iterations", s.iterations},
                      {"final_f_z", s.final_f_z},
                      {"final_gap_z", s.final_gap_z},
                      {"best_f_z", s.best_f_z},
                      {"cum_alpha", s.cum_alpha},
                      {"cum_alpha_sq", s.cum_alpha_sq},
                      {"diag_sum", s.diag_sum},
                      {"start_bregman", s.start_bregman},
                      {"final_z", VectorJson(s.final_z)}});
  }

  Json reports = Json::array();
  const double radius = neighborhood_radius(tp);
  for (double epsilon : b.epsilons) {
    Json report = BoundReportJson(tp, b, epsilon, exp.T);
    const auto inside = std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g < radius + epsilon; });
    const ProbabilityEstimate est = wilson_interval(inside, static_cast<std::int64_t>(gaps.size()));
    report["empirical"] = {{"inside", est.successes},
                           {"trials", est.trials},
                           {"failure_fraction", 1.0 - est.fraction},
                           {"inside_lower", est.lower},
                           {"inside_upper", est.upper}};
    reports.push_back(report);
  }

  Json summary = {{"command", "run"},
                  {"config", to_json(ctx.config)},
                  {"master_seed", b.master_seed},
                  {"trials", b.trials},
                  {"T", exp.T},
                  {"f_star", problem.objective.f_star()},
                  {"x_star", VectorJson(problem.objective.x_star())},
                  {"theory", TheoryJson(tp, problem)},
                  {"gap_z", {{"median", Quantile(gaps, 0.5)}, {"p90", Quantile(gaps, 0.9)}}},
                  {"bound_reports", reports},
                  {"trial_summaries", trials}};
  if (WantsFormat(ctx.config, "json")) WriteFile(ctx.out_dir / "summary.json", Dump(summary));

  if (!options.quiet) {
    out << fmt::format("run: {} trial(s), T = {}, median f(z_T) - f* = {:.6g}, radius = {:.6g}\n", b.trials, exp.T,
                       Quantile(gaps, 0.5), radius);
    out << "output: " << ctx.out_dir.string() << "\n";
  }
  return kExitOk;
}

int BoundsCommand(const CommandOptions& options, std::ostream& out, std::ostream&) {
  Context ctx = Load(options);
  const Built& b = ctx.built;
  const Problem& problem = b.experiment.problem;
  const TheoryParams tp = make_theory_params(problem, b.theory);

  Json j = TheoryJson(tp, problem);
  j["command"] = "bounds";
  j["T"] = b.experiment.T;
  if (tp.B > 0.0 && tp.D > 0.0) {
    const double lipschitz = tp.cls == SmoothnessClass::kC00 ? tp.L0 : *tp.L1;
    const double mu_star = optimal_mu(tp.cls, lipschitz, tp.kappa1, tp.B, tp.D, tp.n, b.theory.delta);
    j["mu_star"] = mu_star;
    j["radius_at_mu_star"] = radius_at_mu(tp.cls, mu_star, lipschitz, tp.kappa1, tp.B, tp.D, tp.n, b.theory.delta);
  }
  Json reports = Json::array();
  for (double epsilon : b.epsilons) reports.push_back(BoundReportJson(tp, b, epsilon, b.experiment.T));
  j["bound_reports"] = reports;

  PrepareOutput(ctx.out_dir);
  WriteFile(ctx.out_dir / "bounds.json", Dump(j));
  if (!options.quiet) out << Dump(j);
  return kExitOk;
}

int VerifyCommand(const CommandOptions& options, std::ostream& out, std::ostream&) {
  Context ctx = Load(options);
  const Built& b = ctx.built;
  const Problem& problem = b.experiment.problem;
  const int n = problem.dimension();
  const AnalysisConfig& an = ctx.config.analysis;
  const std::vector<double> grid = an.verify_mu.value_or(kVerifyMuGrid);
  const int points = an.verify_points.value_or(5);
  const std::int64_t samples = an.verify_samples.value_or(10000);

  const RandomStream root(b.master_seed);
  RandomStream point_rng = root.substream(kVerifyPointStream);
  std::vector<Vector> probes;
  for (int k = 0; k < points; ++k) probes.push_back(problem.geometry.set().sample(point_rng));

  std::string csv =
      "mu,point,empirical_bias,bias_se,bias_bound,bias_pass,empirical_second_moment,second_moment_se,"
      "second_moment_bound,second_moment_pass,second_moment_bound_alt,second_moment_pass_alt,pass\n";
  Json rows = Json::array();
  int failures = 0;
  if (!options.quiet) {
    out << fmt::format("{:>8} {:>5} {:>12} {:>12} {:>5} {:>12} {:>12} {:>5}\n", "mu", "point", "bias", "bias_bound",
                       "ok", "2nd_moment", "2nd_bound", "ok");
  }
  for (std::size_t m = 0; m < grid.size(); ++m) {
    for (int k = 0; k < points; ++k) {
      const RandomStream rng = root.substream(kVerifySampleStream).substream(m).substream(static_cast<std::uint64_t>(k));
      const EstimatorReport r = verify_estimator_bounds(problem.objective, problem.noise, problem.geometry, probes[k],
                                                        NgaConfig(grid[m], n), samples, rng, b.theory.cls);
      if (!r.pass()) ++failures;
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.mu, k, r.empirical_bias_dual_norm,
                         r.bias_stderr, r.bias_bound, r.bias_pass ? 1 : 0, r.empirical_second_moment,
                         r.second_moment_stderr, r.second_moment_bound, r.second_moment_pass ? 1 : 0,
                         r.second_moment_bound_alt, r.second_moment_pass_alt ? 1 : 0, r.pass() ? 1 : 0);
      Json row = {{"mu", r.mu},
                  {"point", k},
                  {"x", VectorJson(r.x)},
                  {"samples", r.samples},
                  {"class", std::string(to_string(r.cls))},
                  {"empirical_bias", r.empirical_bias_dual_norm},
                  {"bias_se", r.bias_stderr},
                  {"bias_bound", r.bias_bound},
                  {"bias_pass", r.bias_pass},
                  {"empirical_second_moment", r.empirical_second_moment},
                  {"second_moment_se", r.second_moment_stderr},
                  {"second_moment_bound", r.second_moment_bound},
                  {"second_moment_pass", r.second_moment_pass},
                  {"pass", r.pass()}};
      row["alt_variant"] = r.alt_variant == MomentVariant::kPrintedL1 ? "l1_printed" : "fourth_moment";
      row["second_moment_bound_alt"] = r.second_moment_bound_alt;
      row["second_moment_pass_alt"] = r.second_moment_pass_alt;
      rows.push_back(row);
      if (!options.quiet) {
        out << fmt::format("{:>8.4g} {:>5} {:>12.5g} {:>12.5g} {:>5} {:>12.5g} {:>12.5g} {:>5}\n", r.mu, k,
                           r.empirical_bias_dual_norm, r.bias_bound, r.bias_pass ? "pass" : "FAIL",
                           r.empirical_second_moment, r.second_moment_bound, r.second_moment_pass ? "pass" : "FAIL");
      }
    }
  }

  const auto total = static_cast<int>(grid.size()) * points;
  Json report = {{"command", "verify-estimator"},
                 {"master_seed", b.master_seed},
                 {"samples", samples},
                 {"V_valid", problem.noise.v_valid()},
                 {"rows", rows},
                 {"failures", failures},
                 {"pass", failures == 0}};
  PrepareOutput(ctx.out_dir);
  WriteFile(ctx.out_dir / "verify_estimator.csv", csv);
  WriteFile(ctx.out_dir / "verify_estimator.json", Dump(report));
  if (!options.quiet) out << fmt::format("{}/{} rows pass\n", total - failures, total);
  return failures == 0 ? kExitOk : kExitFailure;
}

int SweepCommand(const CommandOptions& options, const std::string& parameter, const std::vector<std::string>& values,
                 std::ostream& out, std::ostream&) {
  if (parameter != "mu") throw ConfigError("sweep: unsupported parameter '" + parameter + "' (only mu)");
  if (values.size() < 2) throw ConfigError("sweep: at least two values are required");
  Context ctx = Load(options);
  const Built& base = ctx.built;
  const double epsilon = base.epsilons.front();

  std::vector<double> mus;
  for (const std::string& text : values) {
    if (text == "mu_star") {
      const TheoryParams tp = make_theory_params(base.experiment.problem, base.theory);
      if (!(tp.B > 0.0)) throw ConfigError("sweep: mu_star is undefined without bias (B = 0)");
      const double lipschitz = tp.cls == SmoothnessClass::kC00 ? tp.L0 : *tp.L1;
      mus.push_back(optimal_mu(tp.cls, lipschitz, tp.kappa1, tp.B, tp.D, tp.n, base.theory.delta));
      continue;
    }
    std::size_t used = 0;
    double mu = 0.0;
    try {
      mu = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || !(mu > 0.0) || !std::isfinite(mu)) {
      throw ConfigError("sweep: value '" + text + "' is not a positive number or mu_star");
    }
    mus.push_back(mu);
  }

  std::string csv = "mu,radius_theory,gap_median,gap_p90,bound_at_T\n";
  for (double mu : mus) {
    const Built b = build(ctx.config, mu);
    const TheoryParams tp = make_theory_params(b.experiment.problem, b.theory);
    // Every row reuses the master seed, so rows differ only through mu.
    const auto summaries = run_ensemble(b.experiment, b.trials, b.master_seed, RunOptions{}, b.workers);
    std::vector<double> gaps;
    for (const auto& s : summaries) gaps.push_back(s.final_gap_z);
    double bound_at_T = 1.0;
    try {
      const std::int64_t t0 = burn_in_index(b.experiment.schedule, epsilon, tp.D, b.scan_cap);
      if (b.experiment.T >= t0) bound_at_T = concentration_bound(b.experiment.T, epsilon, b.experiment.schedule, tp);
    } catch (const ScanLimitError&) {
    }
    const std::string row = fmt::format("{},{},{},{},{}\n", mu, neighborhood_radius(tp), Quantile(gaps, 0.5),
                                        Quantile(gaps, 0.9), bound_at_T);
    csv += row;
    if (!options.quiet) out << row << std::flush;
  }
  PrepareOutput(ctx.out_dir);
  WriteFile(ctx.out_dir / "sweep.csv", csv);
  return kExitOk;
}

template <typename F>
int Guard(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] { return RunCommand(options, out, err); });
}

int cmd_bounds(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] { return BoundsCommand(options, out, err); });
}

int cmd_verify_estimator(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] { return VerifyCommand(options, out, err); });
}

int cmd_sweep(const CommandOptions& options, const std::string& parameter, const std::vector<std::string>& values,
              std::ostream& out, std::ostream& err) {
  return Guard(err, [&] { return SweepCommand(options, parameter, values, out, err); });
}

}  // namespace zomd::cli
