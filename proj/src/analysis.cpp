#include "zomd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zomd/errors.hpp"

namespace zomd {

TheoryParams make_theory_params(const Problem& problem, const TheoryOptions& options) {
  const ObjectiveSpec& obj = problem.objective;
  const NormPair& norms = problem.geometry.norms();
  const double mu = problem.nga.mu;
  const double margin = 6.0 * mu;

  TheoryParams tp;
  tp.cls = options.cls.value_or(obj.natural_class());
  tp.n = norms.dimension();
  tp.mu = mu;
  tp.kappa1 = norms.kappa1();
  tp.kappa2 = norms.kappa2();
  tp.D = problem.geometry.set().diameter();
  tp.sigma_R = problem.geometry.map().sigma();
  tp.L0 = obj.lipschitz(margin);
  tp.L1 = obj.gradient_lipschitz();
  tp.G = obj.gradient_bound(margin);
  tp.B = problem.noise.bias_bound();
  tp.V = problem.noise.v();

  if (tp.cls == SmoothnessClass::kC00) {
    tp.delta = compute_delta(tp.cls, mu, tp.L0, tp.n, options.delta);
  } else {
    if (!tp.L1) {
      throw ConfigError("objective '" + std::string(obj.kind_name()) + "' has no Lipschitz gradient; use class C00");
    }
    tp.delta = compute_delta(tp.cls, mu, *tp.L1, tp.n, options.delta);
  }
  tp.B1 = compute_bias_bound(tp.kappa1, tp.B, tp.n, mu);
  tp.K = second_moment_bound(tp.cls, obj, problem.noise, norms, mu, options.moment);
  tp.K1 = obj.gradient_bound(0.0);
  tp.C = compute_zeta_bound(tp.kappa1, tp.K, tp.B1, tp.K1, options.c);
  return tp;
}

double neighborhood_radius(const TheoryParams& tp) { return tp.delta + tp.B1 * tp.D; }

double radius_at_mu(SmoothnessClass cls, double mu, double lipschitz, double kappa1, double B, double D, int n,
                    DeltaVariant variant) {
  // No bias term at all for an unbiased oracle, even at mu = 0.
  const double bias = B == 0.0 ? 0.0 : compute_bias_bound(kappa1, B, n, mu) * D;
  return compute_delta(cls, mu, lipschitz, n, variant) + bias;
}

double optimal_mu(SmoothnessClass cls, double lipschitz, double kappa1, double B, double D, int n,
                  DeltaVariant variant) {
  if (!(B > 0.0)) throw PreconditionError("optimal_mu: B = 0 makes the radius monotone in mu (no interior minimum)");
  if (!(lipschitz > 0.0) || !(kappa1 > 0.0) || !(D > 0.0) || n < 1) {
    throw PreconditionError("optimal_mu: L, kappa1 and D must be > 0");
  }
  const double numerator = 2.0 * kappa1 * B * D;
  if (cls == SmoothnessClass::kC00) return std::sqrt(numerator / lipschitz);
  const double dim = variant == DeltaVariant::kSqrtN ? 1.0 : std::sqrt(static_cast<double>(n));
  return std::cbrt(numerator / (lipschitz * dim));
}

namespace {

// Upper bound on sum_{k=from+1}^{to} alpha(k) from the integral of a x^(-p).
double TailUpperBound(const StepSchedule& schedule, std::int64_t from, std::int64_t to) {
  if (to <= from) return 0.0;
  const double a = schedule.a();
  const double p = schedule.p();
  const double lo = static_cast<double>(from);
  const double hi = static_cast<double>(to);
  const double integral = p == 1.0 ? std::log(hi / lo) : (std::pow(hi, 1.0 - p) - std::pow(lo, 1.0 - p)) / (1.0 - p);
  return a * integral * (1.0 + 1e-9);
}

// Scans are limited by the cap and by the schedule horizon.
std::int64_t EffectiveCap(const StepSchedule& schedule, std::int64_t cap) {
  return schedule.t_max() ? std::min(cap, *schedule.t_max()) : cap;
}

bool IsCheckpoint(std::int64_t t) { return (t & (t - 1)) == 0; }

}  // namespace

std::int64_t burn_in_index(const StepSchedule& schedule, double epsilon, double D, std::int64_t cap) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be > 0");
  const double threshold = 3.0 * D / epsilon;
  const std::int64_t limit = EffectiveCap(schedule, cap);
  PartialSums sums(schedule);
  do {
    const bool unreachable = sums.t() >= limit || (IsCheckpoint(sums.t()) && sums.t() > 0 &&
                                                   sums.sum_alpha() + TailUpperBound(schedule, sums.t(), limit) <
                                                       threshold);
    if (unreachable) {
      throw ScanLimitError("burn-in index not reached within " + std::to_string(limit) + " iterations", sums.t(),
                           sums.sum_alpha(), sums.sum_alpha_sq());
    }
    sums.advance();
  } while (sums.sum_alpha() < threshold);
  return sums.t();
}

double concentration_value(double K, double C, double D, double epsilon, double sum_alpha, double sum_alpha_sq) {
  const double ratio = sum_alpha_sq / sum_alpha;
  return 3.0 * K / epsilon * ratio + 9.0 * C * D / (epsilon * epsilon) * ratio / sum_alpha;
}

std::vector<CurvePoint> concentration_curve(std::vector<std::int64_t> times, double epsilon,
                                            const StepSchedule& schedule, const TheoryParams& tp) {
  if (times.empty()) return {};
  std::sort(times.begin(), times.end());
  const std::int64_t t0 = burn_in_index(schedule, epsilon, tp.D);
  if (times.front() < t0) {
    throw BurnInError("concentration bound requested at t = " + std::to_string(times.front()) +
                          " before the burn-in index t0 = " + std::to_string(t0),
                      t0);
  }
  std::vector<CurvePoint> curve;
  curve.reserve(times.size());
  PartialSums sums(schedule);
  for (std::int64_t t : times) {
    sums.advance_to(t);
    const double raw = concentration_value(tp.K, tp.C, tp.D, epsilon, sums.sum_alpha(), sums.sum_alpha_sq());
    curve.push_back({t, std::clamp(raw, 0.0, 1.0), raw});
  }
  return curve;
}

double concentration_bound_raw(std::int64_t t, double epsilon, const StepSchedule& schedule, const TheoryParams& tp) {
  return concentration_curve({t}, epsilon, schedule, tp).front().raw;
}

double concentration_bound(std::int64_t t, double epsilon, const StepSchedule& schedule, const TheoryParams& tp) {
  return std::clamp(concentration_bound_raw(t, epsilon, schedule, tp), 0.0, 1.0);
}

std::int64_t min_iterations_for_confidence(double confidence, double epsilon, const StepSchedule& schedule,
                                           const TheoryParams& tp, std::int64_t cap) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw PreconditionError("confidence must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be > 0");
  const double p1 = 1.0 - confidence;
  const double burn_in = 3.0 * tp.D / epsilon;
  const double first = 6.0 * tp.K / (epsilon * p1);
  const double second = 18.0 * tp.C * tp.D / (epsilon * epsilon * p1);

  const std::int64_t limit = EffectiveCap(schedule, cap);
  PartialSums sums(schedule);
  while (true) {
    bool unreachable = sums.t() >= limit;
    if (!unreachable && IsCheckpoint(sums.t()) && sums.t() > 0) {
      // sum alpha^2 only grows, so the conditions cannot hold before the limit
      // if even the largest attainable sum alpha misses them now.
      const double s1_max = sums.sum_alpha() + TailUpperBound(schedule, sums.t(), limit);
      const double s2 = sums.sum_alpha_sq();
      unreachable = s1_max < burn_in || s1_max < first * s2 || s1_max * s1_max < second * s2;
    }
    if (unreachable) {
      throw ScanLimitError("confidence conditions not met within " + std::to_string(limit) + " iterations", sums.t(),
                           sums.sum_alpha(), sums.sum_alpha_sq());
    }
    sums.advance();
    const double s1 = sums.sum_alpha();
    const double s2 = sums.sum_alpha_sq();
    if (s1 >= burn_in && s1 >= first * s2 && s1 * s1 >= second * s2) return sums.t();
  }
}

ProbabilityEstimate wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials < 1) throw PreconditionError("wilson_interval requires at least one trial");
  ProbabilityEstimate est;
  est.successes = successes;
  est.trials = trials;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  est.fraction = p;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  est.lower = std::max(0.0, centre - half);
  est.upper = std::min(1.0, centre + half);
  return est;
}

ProbabilityEstimate empirical_convergence_probability(const Experiment& experiment, const TheoryParams& tp,
                                                      std::int64_t t, double epsilon, std::int64_t trials,
                                                      std::uint64_t master_seed, unsigned workers) {
  if (trials < 30) throw PreconditionError("empirical_convergence_probability requires at least 30 trials");
  if (t < 1) throw PreconditionError("t must be >= 1");
  Experiment at_t = experiment;
  at_t.T = t;
  const double threshold = neighborhood_radius(tp) + epsilon;
  const auto summaries = run_ensemble(at_t, trials, master_seed, {}, workers);
  const auto inside = std::count_if(summaries.begin(), summaries.end(),
                                    [&](const TrajectorySummary& s) { return s.final_gap_z < threshold; });
  return wilson_interval(inside, trials);
}

BoundReport make_bound_report(const TheoryParams& tp, const StepSchedule& schedule, double epsilon,
                              const std::vector<double>& confidences, std::int64_t t_end, int curve_points,
                              std::int64_t scan_cap) {
  BoundReport report;
  report.epsilon = epsilon;
  report.neighborhood_radius = neighborhood_radius(tp);
  report.t0 = burn_in_index(schedule, epsilon, tp.D, scan_cap);

  const std::int64_t last = std::max(t_end, report.t0);
  std::vector<std::int64_t> times;
  const int points = std::max(curve_points, 2);
  const double ratio = std::log(static_cast<double>(last) / static_cast<double>(report.t0));
  for (int i = 0; i < points; ++i) {
    const double frac = static_cast<double>(i) / (points - 1);
    times.push_back(std::clamp(static_cast<std::int64_t>(std::llround(report.t0 * std::exp(ratio * frac))),
                               report.t0, last));
  }
  times.erase(std::unique(times.begin(), times.end()), times.end());
  report.concentration_curve = concentration_curve(times, epsilon, schedule, tp);

  for (double p : confidences) {
    try {
      report.t_confidence.emplace_back(p, min_iterations_for_confidence(p, epsilon, schedule, tp, scan_cap));
    } catch (const ScanLimitError&) {
      report.t_confidence.emplace_back(p, std::nullopt);
    }
  }
  return report;
}

}  // namespace zomd
