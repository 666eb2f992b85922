#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "zomd/bounds.hpp"
#include "zomd/numerics.hpp"
#include "zomd/solver.hpp"

namespace zomd {

struct TheoryOptions {
  std::optional<SmoothnessClass> cls;  // defaults to the objective's natural class
  DeltaVariant delta = DeltaVariant::kSqrtN;
  CVariant c = CVariant::kSquaredK1;
  MomentVariant moment = MomentVariant::kStandard;
};

/// Constants of the convergence analysis for one configured problem.
struct TheoryParams {
  SmoothnessClass cls = SmoothnessClass::kC00;
  double delta = 0.0;  // smoothing offset of the delta-subgradient
  double B1 = 0.0;     // bound on the conditional bias of g~
  double K = 0.0;      // bound on E[||g~||_*^2 | F_t]
  double K1 = 0.0;     // bound on ||grad f_mu|| over X
  double C = 0.0;      // bound on E[||zeta||_*^2 | F_t]
  double D = 0.0;
  double sigma_R = 1.0;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  int n = 1;
  double mu = 0.0;
  double L0 = 0.0;
  std::optional<double> L1;
  std::optional<double> G;
  double B = 0.0;
  double V = 0.0;
};

TheoryParams make_theory_params(const Problem& problem, const TheoryOptions& options = {});

/// delta + B1 * D.
double neighborhood_radius(const TheoryParams& tp);

/// Radius as a function of mu with every other constant fixed.
double radius_at_mu(SmoothnessClass cls, double mu, double lipschitz, double kappa1, double B, double D, int n,
                    DeltaVariant variant = DeltaVariant::kSqrtN);

/// Minimizer over mu > 0 of the radius: C00 sqrt(2 kappa1 B D / L0); C11 (2 kappa1 B D / L1)^(1/3)
/// (divided by sqrt(n) inside the cube root for the n-variant of delta).
double optimal_mu(SmoothnessClass cls, double lipschitz, double kappa1, double B, double D, int n,
                  DeltaVariant variant = DeltaVariant::kSqrtN);

/// Forward scan of sum alpha(k) and sum alpha(k)^2 with compensated accumulation.
class PartialSums {
 public:
  explicit PartialSums(const StepSchedule& schedule) : schedule_(&schedule) {}

  void advance() {
    const double a = schedule_->alpha_at(++t_);
    sum_alpha_.add(a);
    sum_alpha_sq_.add(a * a);
  }
  void advance_to(std::int64_t t) {
    while (t_ < t) advance();
  }

  std::int64_t t() const { return t_; }
  double sum_alpha() const { return sum_alpha_.value(); }
  double sum_alpha_sq() const { return sum_alpha_sq_.value(); }

 private:
  const StepSchedule* schedule_;
  std::int64_t t_ = 0;
  CompensatedSum sum_alpha_;
  CompensatedSum sum_alpha_sq_;
};

inline constexpr std::int64_t kDefaultScanCap = 1'000'000'000;

/// Smallest t0 with sum_{k<=t0} alpha(k) >= 3 D / epsilon. Throws ScanLimitError when
/// no such t0 exists up to min(cap, T_max); the scan stops early once that is certain.
std::int64_t burn_in_index(const StepSchedule& schedule, double epsilon, double D,
                           std::int64_t cap = kDefaultScanCap);

/// (3K/eps) S2/S1 + (9CD/eps^2) S2/S1^2 from the partial sums S1 = sum alpha, S2 = sum alpha^2.
double concentration_value(double K, double C, double D, double epsilon, double sum_alpha, double sum_alpha_sq);

/// Unclipped concentration bound at t; throws BurnInError (carrying t0) when t < t0.
double concentration_bound_raw(std::int64_t t, double epsilon, const StepSchedule& schedule, const TheoryParams& tp);

/// Concentration bound clipped to [0, 1].
double concentration_bound(std::int64_t t, double epsilon, const StepSchedule& schedule, const TheoryParams& tp);

struct CurvePoint {
  std::int64_t t = 0;
  double bound = 0.0;  // clipped to [0, 1]
  double raw = 0.0;
};

/// Concentration bound at each requested t (all must be >= t0), from one forward scan.
std::vector<CurvePoint> concentration_curve(std::vector<std::int64_t> times, double epsilon,
                                            const StepSchedule& schedule, const TheoryParams& tp);

/// Smallest t with sum alpha >= 3D/eps, sum alpha >= (6K/(eps p1)) sum alpha^2 and
/// (sum alpha)^2 >= (18CD/(eps^2 p1)) sum alpha^2, where p1 = 1 - confidence.
/// Throws ScanLimitError as burn_in_index does.
std::int64_t min_iterations_for_confidence(double confidence, double epsilon, const StepSchedule& schedule,
                                           const TheoryParams& tp, std::int64_t cap = kDefaultScanCap);

struct ProbabilityEstimate {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double fraction = 0.0;
  double lower = 0.0;  // 95% Wilson score interval
  double upper = 1.0;

  double half_width() const { return 0.5 * (upper - lower); }
};

ProbabilityEstimate wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

/// Runs `trials` seeded trials for t iterations and counts f(z_t) - f* < radius + epsilon.
ProbabilityEstimate empirical_convergence_probability(const Experiment& experiment, const TheoryParams& tp,
                                                      std::int64_t t, double epsilon, std::int64_t trials,
                                                      std::uint64_t master_seed, unsigned workers = 0);

struct BoundReport {
  double epsilon = 0.0;
  double neighborhood_radius = 0.0;
  std::int64_t t0 = 0;
  std::vector<CurvePoint> concentration_curve;
  std::vector<std::pair<double, std::optional<std::int64_t>>> t_confidence;  // (p, t) or no t within the cap
};

/// Curve sampled at `curve_points` geometrically spaced indices from t0 to max(t_end, t0).
BoundReport make_bound_report(const TheoryParams& tp, const StepSchedule& schedule, double epsilon,
                              const std::vector<double>& confidences, std::int64_t t_end, int curve_points = 20,
                              std::int64_t scan_cap = kDefaultScanCap);

}  // namespace zomd
