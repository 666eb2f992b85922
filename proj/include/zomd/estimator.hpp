#pragma once

#include <cstdint>
#include <optional>

#include "zomd/bounds.hpp"
#include "zomd/geometry.hpp"
#include "zomd/oracle.hpp"
#include "zomd/random.hpp"

namespace zomd {

/// Gaussian smoothing radius and dimension.
struct NgaConfig {
  double mu = 0.1;
  int n = 1;

  NgaConfig(double mu_, int n_);
};

struct GradientSample {
  Vector g_tilde;
  Vector u;
  double f_hat_far = 0.0;   // noisy value at x + mu u
  double f_hat_near = 0.0;  // noisy value at x
};

/// u ~ N(0, I_n).
Vector sample_direction(RandomStream& rng, int n);

/// Two-point estimate ((f^(x + mu u) - f^(x)) / mu) u.
///
/// `iteration` names one estimator call. The direction and the two oracle
/// evaluations each draw from their own sub-stream of it, so the noise at the
/// two points is independent.
GradientSample estimate_gradient(const ObjectiveSpec& obj, const NoiseModel& noise, const Vector& x,
                                 const NgaConfig& cfg, const RandomStream& iteration);

struct ScalarEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct VectorEstimate {
  Vector mean;
  Vector std_error;
};

/// Monte Carlo f_mu(x) = E[f(x + mu u)].
ScalarEstimate smoothed_value_ref(const ObjectiveSpec& obj, const Vector& x, double mu, std::int64_t samples,
                                  RandomStream& rng);

/// Monte Carlo grad f_mu(x) = E[u (f(x + mu u) - f(x))] / mu, noiseless.
VectorEstimate smoothed_gradient_ref(const ObjectiveSpec& obj, const Vector& x, double mu, std::int64_t samples,
                                     RandomStream& rng);

/// Theoretical second-moment bound of the estimator for the given smoothness class.
double second_moment_bound(SmoothnessClass cls, const ObjectiveSpec& obj, const NoiseModel& noise,
                           const NormPair& norms, double mu,
                           MomentVariant variant = MomentVariant::kStandard);

/// 2 kappa1 B sqrt(n) / mu.
double bias_bound(const NormPair& norms, const NoiseModel& noise, double mu);

struct EstimatorReport {
  double mu = 0.0;
  Vector x;
  std::int64_t samples = 0;
  SmoothnessClass cls = SmoothnessClass::kC00;

  double empirical_bias_dual_norm = 0.0;
  double bias_stderr = 0.0;
  double bias_bound = 0.0;
  bool bias_pass = false;

  double empirical_second_moment = 0.0;
  double second_moment_stderr = 0.0;
  double second_moment_bound = 0.0;
  bool second_moment_pass = false;

  // The alternative reading of the constant for this class (C00: fourth moment,
  // C11: printed L1) and whether the data satisfy it. Informational only.
  MomentVariant alt_variant = MomentVariant::kStandard;
  double second_moment_bound_alt = 0.0;
  bool second_moment_pass_alt = false;

  bool pass() const { return bias_pass && second_moment_pass; }
};

/// Compares the sample mean and second moment of g~ at x against the
/// estimator bounds; a check passes when empirical <= bound + 4 SE.
/// `cls` defaults to the objective's natural class.
EstimatorReport verify_estimator_bounds(const ObjectiveSpec& obj, const NoiseModel& noise, const Geometry& geometry,
                                        const Vector& x, const NgaConfig& cfg, std::int64_t samples,
                                        const RandomStream& rng,
                                        std::optional<SmoothnessClass> cls = std::nullopt);

}  // namespace zomd
