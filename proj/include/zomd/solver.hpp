#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "zomd/estimator.hpp"
#include "zomd/geometry.hpp"
#include "zomd/oracle.hpp"
#include "zomd/random.hpp"

namespace zomd {

/// alpha(t) = a * t^(-p) with p in (0.5, 1], so that sum alpha diverges and
/// sum alpha^2 converges.
class StepSchedule {
 public:
  static StepSchedule power(double a, double p, std::optional<std::int64_t> t_max = std::nullopt);

  double a() const { return a_; }
  double p() const { return p_; }
  std::optional<std::int64_t> t_max() const { return t_max_; }

  double alpha_at(std::int64_t t) const;

 private:
  StepSchedule(double a, double p, std::optional<std::int64_t> t_max) : a_(a), p_(p), t_max_(t_max) {}

  double a_;
  double p_;
  std::optional<std::int64_t> t_max_;
};

inline double alpha_at(const StepSchedule& schedule, std::int64_t t) { return schedule.alpha_at(t); }

struct AverageUpdate {
  Vector z;
  double cum_alpha = 0.0;
};

/// z_t = (cum_alpha_prev z_prev + alpha_t x_t) / (cum_alpha_prev + alpha_t).
AverageUpdate update_average(const Vector& z_prev, const Vector& x_t, double alpha_t, double cum_alpha_prev);

/// Everything that defines the optimization problem seen by the algorithm.
struct Problem {
  ObjectiveSpec objective;
  NoiseModel noise;
  Geometry geometry;
  NgaConfig nga;

  int dimension() const { return geometry.dimension(); }
};

struct TrajectoryRecord {
  std::int64_t t = 0;
  double alpha = 0.0;
  Vector x;
  Vector z;
  double f_x = 0.0;  // exact objective, diagnostics only
  double f_z = 0.0;
  double gap_z = 0.0;
  double cum_alpha = 0.0;
  double cum_alpha_sq = 0.0;
  double diag_sum = 0.0;  // sum alpha(k)^2 ||g~(k)||_*^2 / (2 sigma_R)
};

struct TrajectorySummary {
  std::int64_t trial = 0;
  std::int64_t iterations = 0;
  Vector final_x;
  Vector final_z;
  double final_f_z = 0.0;
  double final_gap_z = 0.0;
  double best_f_z = 0.0;  // over recording checkpoints
  double cum_alpha = 0.0;
  double cum_alpha_sq = 0.0;
  double diag_sum = 0.0;
  double start_bregman = 0.0;  // D_R(x*, x_1)
  std::vector<std::pair<std::int64_t, double>> probe_gaps;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  TrajectorySummary summary;
};

struct RunOptions {
  bool record = true;
  // Every iteration up to this index is recorded; beyond it, checkpoints grow geometrically.
  std::int64_t full_record_limit = 10000;
  double thinning_ratio = 1.1;
  // Iterations at which f(z_t) - f* is captured into the summary.
  std::vector<std::int64_t> probe_times;
};

/// Runs T iterations of zeroth-order mirror descent from x_1.
/// Iteration t draws all of its randomness from `rng.substream(t)`.
Trajectory run_zomd(const Problem& problem, const StepSchedule& schedule, const Vector& x_1, std::int64_t T,
                    const RandomStream& rng, const RunOptions& options = {});

struct Experiment {
  Problem problem;
  StepSchedule schedule;
  Vector x_1;
  std::int64_t T = 1;
};

/// Trial i runs with sub-stream i of the master seed; results are ordered by trial.
std::vector<TrajectorySummary> run_ensemble(const Experiment& experiment, std::int64_t trials,
                                            std::uint64_t master_seed, RunOptions options = {},
                                            unsigned workers = 0);

/// As run_ensemble but keeps the full recorded trajectories.
std::vector<Trajectory> run_ensemble_trajectories(const Experiment& experiment, std::int64_t trials,
                                                  std::uint64_t master_seed, const RunOptions& options = {},
                                                  unsigned workers = 0);

}  // namespace zomd
