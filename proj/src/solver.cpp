#include "zomd/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "zomd/errors.hpp"
#include "zomd/numerics.hpp"

namespace zomd {

StepSchedule StepSchedule::power(double a, double p, std::optional<std::int64_t> t_max) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("step size scale a must be > 0");
  if (!(p > 0.5 && p <= 1.0)) {
    throw ConfigError("step size exponent p must lie in (0.5, 1]: with p = " + std::to_string(p) +
                      " the step sizes violate Assumption 1 (sum alpha = inf, sum alpha^2 < inf)");
  }
  if (t_max && *t_max < 1) throw ConfigError("step schedule cap T_max must be >= 1");
  return StepSchedule(a, p, t_max);
}

double StepSchedule::alpha_at(std::int64_t t) const {
  if (t < 1) throw PreconditionError("alpha_at: iterations are numbered from t = 1");
  if (t_max_ && t > *t_max_) {
    throw PreconditionError("alpha_at: t = " + std::to_string(t) + " exceeds the schedule cap " +
                            std::to_string(*t_max_));
  }
  return p_ == 1.0 ? a_ / static_cast<double>(t) : a_ * std::pow(static_cast<double>(t), -p_);
}

AverageUpdate update_average(const Vector& z_prev, const Vector& x_t, double alpha_t, double cum_alpha_prev) {
  if (cum_alpha_prev < 0.0) throw PreconditionError("update_average: cumulative step size must be >= 0");
  const double total = cum_alpha_prev + alpha_t;
  if (cum_alpha_prev == 0.0) return {x_t, total};
  return {(cum_alpha_prev * z_prev + alpha_t * x_t) / total, total};
}

Trajectory run_zomd(const Problem& problem, const StepSchedule& schedule, const Vector& x_1, std::int64_t T,
                    const RandomStream& rng, const RunOptions& options) {
  if (T < 1) throw PreconditionError("run_zomd requires T >= 1");
  const Geometry& geometry = problem.geometry;
  const ObjectiveSpec& objective = problem.objective;
  if (x_1.size() != geometry.dimension() || problem.nga.n != geometry.dimension() ||
      objective.dimension() != geometry.dimension()) {
    throw DimensionError("run_zomd: objective, geometry, estimator and x_1 dimensions disagree");
  }
  if (!geometry.set().contains(x_1, 1e-12)) throw PreconditionError("run_zomd: x_1 is not in the feasible set");

  const double two_sigma = 2.0 * geometry.map().sigma();
  const double f_star = objective.f_star();

  Trajectory out;
  TrajectorySummary& summary = out.summary;
  summary.iterations = T;
  summary.start_bregman = bregman(geometry.map(), objective.x_star(), x_1);
  if (options.record) out.records.reserve(static_cast<std::size_t>(std::min<std::int64_t>(T, options.full_record_limit) + 256));

  std::vector<std::int64_t> probes = options.probe_times;
  std::sort(probes.begin(), probes.end());
  std::size_t next_probe = 0;

  Vector x = x_1;
  Vector z = x_1;
  CompensatedSum cum_alpha;
  CompensatedSum cum_alpha_sq;
  CompensatedSum diag_sum;
  double best_f_z = std::numeric_limits<double>::infinity();
  double next_mark = static_cast<double>(options.full_record_limit);

  for (std::int64_t t = 1; t <= T; ++t) {
    const double alpha = schedule.alpha_at(t);
    AverageUpdate avg = update_average(z, x, alpha, cum_alpha.value());
    z = std::move(avg.z);
    cum_alpha.add(alpha);
    cum_alpha_sq.add(alpha * alpha);

    const GradientSample sample = estimate_gradient(objective, problem.noise, x, problem.nga, rng.substream(t));
    const double g_dual = geometry.norms().dual_norm(sample.g_tilde);
    diag_sum.add(alpha * alpha * g_dual * g_dual / two_sigma);

    bool checkpoint = t <= options.full_record_limit || t == T;
    if (!checkpoint && static_cast<double>(t) >= next_mark) {
      checkpoint = true;
      next_mark = std::max(next_mark * options.thinning_ratio, next_mark + 1.0);
    }
    while (next_probe < probes.size() && probes[next_probe] < t) ++next_probe;
    const bool probe = next_probe < probes.size() && probes[next_probe] == t;

    if (checkpoint || probe) {
      const double f_z = objective.value(z);
      best_f_z = std::min(best_f_z, f_z);
      if (probe) summary.probe_gaps.emplace_back(t, f_z - f_star);
      if (checkpoint && options.record) {
        TrajectoryRecord rec;
        rec.t = t;
        rec.alpha = alpha;
        rec.x = x;
        rec.z = z;
        rec.f_x = objective.value(x);
        rec.f_z = f_z;
        rec.gap_z = f_z - f_star;
        rec.cum_alpha = cum_alpha.value();
        rec.cum_alpha_sq = cum_alpha_sq.value();
        rec.diag_sum = diag_sum.value();
        out.records.push_back(std::move(rec));
      }
    }
    if (t == T) {
      summary.final_x = x;
      summary.final_z = z;
    }
    x = geometry.prox(x, sample.g_tilde, alpha);
  }

  summary.final_f_z = objective.value(summary.final_z);
  summary.final_gap_z = summary.final_f_z - f_star;
  summary.best_f_z = best_f_z;
  summary.cum_alpha = cum_alpha.value();
  summary.cum_alpha_sq = cum_alpha_sq.value();
  summary.diag_sum = diag_sum.value();
  return out;
}

namespace {

template <class Result, class Fn>
std::vector<Result> ParallelTrials(std::int64_t trials, unsigned workers, Fn&& fn) {
  if (trials < 1) throw PreconditionError("an ensemble needs at least one trial");
  std::vector<Result> results(static_cast<std::size_t>(trials));
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, trials));

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::int64_t i = next++; i < trials; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

std::vector<TrajectorySummary> run_ensemble(const Experiment& experiment, std::int64_t trials,
                                            std::uint64_t master_seed, RunOptions options, unsigned workers) {
  options.record = false;
  const RandomStream master(master_seed);
  return ParallelTrials<TrajectorySummary>(trials, workers, [&](std::int64_t i) {
    TrajectorySummary s = run_zomd(experiment.problem, experiment.schedule, experiment.x_1, experiment.T,
                                   master.substream(static_cast<std::uint64_t>(i)), options)
                              .summary;
    s.trial = i;
    return s;
  });
}

std::vector<Trajectory> run_ensemble_trajectories(const Experiment& experiment, std::int64_t trials,
                                                  std::uint64_t master_seed, const RunOptions& options,
                                                  unsigned workers) {
  const RandomStream master(master_seed);
  return ParallelTrials<Trajectory>(trials, workers, [&](std::int64_t i) {
    Trajectory tr = run_zomd(experiment.problem, experiment.schedule, experiment.x_1, experiment.T,
                             master.substream(static_cast<std::uint64_t>(i)), options);
    tr.summary.trial = i;
    return tr;
  });
}

}  // namespace zomd
