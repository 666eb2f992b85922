#include "zomd/estimator.hpp"

#include <cmath>
#include <string>

#include "zomd/bounds.hpp"
#include "zomd/errors.hpp"

namespace zomd {

namespace {

constexpr double kPassSigmas = 4.0;

// Welford accumulator over vectors (componentwise).
class VectorStats {
 public:
  explicit VectorStats(Eigen::Index n) : mean_(Vector::Zero(n)), m2_(Vector::Zero(n)) {}

  void add(const Vector& v) {
    ++count_;
    const Vector delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(v - mean_);
  }

  const Vector& mean() const { return mean_; }
  Vector std_error() const {
    if (count_ < 2) return Vector::Zero(mean_.size());
    return (m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_)).cwiseSqrt();
  }

 private:
  std::int64_t count_ = 0;
  Vector mean_;
  Vector m2_;
};

class ScalarStats {
 public:
  void add(double v) {
    ++count_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (v - mean_);
  }
  double mean() const { return mean_; }
  double std_error() const {
    if (count_ < 2) return 0.0;
    return std::sqrt(m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_));
  }

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

void RequireSamples(std::int64_t samples, std::int64_t minimum, const char* what) {
  if (samples < minimum) {
    throw PreconditionError(std::string(what) + " requires at least " + std::to_string(minimum) + " samples");
  }
}

}  // namespace

NgaConfig::NgaConfig(double mu_, int n_) : mu(mu_), n(n_) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("smoothing radius mu must be > 0");
  if (n < 1) throw ConfigError("dimension must be >= 1");
}

Vector sample_direction(RandomStream& rng, int n) { return rng.normal_vector(n); }

GradientSample estimate_gradient(const ObjectiveSpec& obj, const NoiseModel& noise, const Vector& x,
                                 const NgaConfig& cfg, const RandomStream& iteration) {
  RandomStream direction = call_stream(iteration, CallStream::kDirection);
  RandomStream far_noise = call_stream(iteration, CallStream::kFarNoise);
  RandomStream near_noise = call_stream(iteration, CallStream::kNearNoise);

  GradientSample s;
  s.u = sample_direction(direction, cfg.n);
  s.f_hat_far = evaluate_noisy(obj, noise, x + cfg.mu * s.u, far_noise);
  s.f_hat_near = evaluate_noisy(obj, noise, x, near_noise);
  s.g_tilde = ((s.f_hat_far - s.f_hat_near) / cfg.mu) * s.u;
  return s;
}

ScalarEstimate smoothed_value_ref(const ObjectiveSpec& obj, const Vector& x, double mu, std::int64_t samples,
                                  RandomStream& rng) {
  RequireSamples(samples, 1000, "smoothed_value_ref");
  ScalarStats stats;
  for (std::int64_t i = 0; i < samples; ++i) {
    stats.add(obj.value(x + mu * rng.normal_vector(x.size())));
  }
  return {stats.mean(), stats.std_error()};
}

VectorEstimate smoothed_gradient_ref(const ObjectiveSpec& obj, const Vector& x, double mu, std::int64_t samples,
                                     RandomStream& rng) {
  RequireSamples(samples, 1000, "smoothed_gradient_ref");
  if (!(mu > 0.0)) throw PreconditionError("smoothed_gradient_ref requires mu > 0");
  const double f_x = obj.value(x);
  VectorStats stats(x.size());
  for (std::int64_t i = 0; i < samples; ++i) {
    const Vector u = rng.normal_vector(x.size());
    // u f(x) has zero mean and removes the O(f(x)/mu) variance.
    stats.add(((obj.value(x + mu * u) - f_x) / mu) * u);
  }
  return {stats.mean(), stats.std_error()};
}

double bias_bound(const NormPair& norms, const NoiseModel& noise, double mu) {
  return compute_bias_bound(norms.kappa1(), noise.bias_bound(), norms.dimension(), mu);
}

double second_moment_bound(SmoothnessClass cls, const ObjectiveSpec& obj, const NoiseModel& noise,
                           const NormPair& norms, double mu, MomentVariant variant) {
  if (!(mu > 0.0)) throw PreconditionError("second moment bound requires mu > 0");
  const double margin = 6.0 * mu;
  SecondMomentInputs in;
  in.kappa1 = norms.kappa1();
  in.kappa2 = norms.kappa2();
  in.n = norms.dimension();
  in.mu = mu;
  in.v = noise.v();
  in.l0 = obj.lipschitz(margin);
  in.l1 = obj.gradient_lipschitz();
  in.g = obj.gradient_bound(margin);
  in.variant = variant;
  if (cls == SmoothnessClass::kC11 && !in.l1) {
    throw ConfigError("C11 bound requested for objective '" + std::string(obj.kind_name()) +
                      "' which has no Lipschitz gradient");
  }
  return compute_second_moment_bound(cls, in);
}

EstimatorReport verify_estimator_bounds(const ObjectiveSpec& obj, const NoiseModel& noise, const Geometry& geometry,
                                        const Vector& x, const NgaConfig& cfg, std::int64_t samples,
                                        const RandomStream& rng, std::optional<SmoothnessClass> cls) {
  RequireSamples(samples, 10000, "verify_estimator_bounds");
  if (x.size() != cfg.n || cfg.n != geometry.dimension()) {
    throw DimensionError("verify_estimator_bounds: dimension mismatch");
  }
  const NormPair& norms = geometry.norms();

  EstimatorReport report;
  report.mu = cfg.mu;
  report.x = x;
  report.samples = samples;
  report.cls = cls.value_or(obj.natural_class());
  // Computed first so a class/constant mismatch fails before any sampling.
  report.second_moment_bound = second_moment_bound(report.cls, obj, noise, norms, cfg.mu);
  report.alt_variant =
      report.cls == SmoothnessClass::kC11 ? MomentVariant::kPrintedL1 : MomentVariant::kFourthMoment;
  report.second_moment_bound_alt = second_moment_bound(report.cls, obj, noise, norms, cfg.mu, report.alt_variant);
  report.bias_bound = bias_bound(norms, noise, cfg.mu);

  const RandomStream sample_streams = rng.substream(0);
  VectorStats g_stats(x.size());
  ScalarStats moment_stats;
  for (std::int64_t i = 0; i < samples; ++i) {
    const GradientSample s = estimate_gradient(obj, noise, x, cfg, sample_streams.substream(i));
    g_stats.add(s.g_tilde);
    const double dn = norms.dual_norm(s.g_tilde);
    moment_stats.add(dn * dn);
  }

  RandomStream ref_stream = rng.substream(1);
  const VectorEstimate ref = smoothed_gradient_ref(obj, x, cfg.mu, samples, ref_stream);

  const Vector combined_se = (g_stats.std_error().cwiseAbs2() + ref.std_error.cwiseAbs2()).cwiseSqrt();
  report.empirical_bias_dual_norm = norms.dual_norm(g_stats.mean() - ref.mean);
  report.bias_stderr = norms.dual_norm(combined_se);
  report.bias_pass = report.empirical_bias_dual_norm <= report.bias_bound + kPassSigmas * report.bias_stderr;

  report.empirical_second_moment = moment_stats.mean();
  report.second_moment_stderr = moment_stats.std_error();
  const double slack = kPassSigmas * report.second_moment_stderr;
  report.second_moment_pass = report.empirical_second_moment <= report.second_moment_bound + slack;
  report.second_moment_pass_alt = report.empirical_second_moment <= report.second_moment_bound_alt + slack;
  return report;
}

}  // namespace zomd
