#include "zomd/bounds.hpp"

#include <cmath>
#include <string>

#include "zomd/errors.hpp"

namespace zomd {

double compute_delta(SmoothnessClass cls, double mu, double lipschitz, int n, DeltaVariant variant) {
  if (mu < 0.0 || lipschitz < 0.0 || n < 1) {
    throw PreconditionError("compute_delta: mu and the Lipschitz constant must be >= 0 and n >= 1");
  }
  const double dim = static_cast<double>(n);
  if (cls == SmoothnessClass::kC00) return mu * lipschitz * std::sqrt(dim);
  const double dim_factor = variant == DeltaVariant::kSqrtN ? std::sqrt(dim) : dim;
  return 0.5 * mu * mu * lipschitz * dim_factor;
}

double compute_bias_bound(double kappa1, double bias_bound, int n, double mu) {
  if (!(mu > 0.0)) throw PreconditionError("compute_bias_bound: mu must be > 0");
  if (kappa1 < 0.0 || bias_bound < 0.0 || n < 1) {
    throw PreconditionError("compute_bias_bound: kappa1 and B must be >= 0 and n >= 1");
  }
  return 2.0 * kappa1 * bias_bound * std::sqrt(static_cast<double>(n)) / mu;
}

double compute_second_moment_bound(SmoothnessClass cls, const SecondMomentInputs& in) {
  if (!(in.mu > 0.0)) throw PreconditionError("second moment bound: mu must be > 0");
  if (in.n < 1 || in.v < 0.0) throw PreconditionError("second moment bound: n >= 1 and V >= 0 required");
  const double n = in.n;
  const double k1sq = in.kappa1 * in.kappa1;
  const double noise = in.v * in.v / (in.mu * in.mu);
  if (cls == SmoothnessClass::kC00) {
    if (!in.l0) throw ConfigError("C00 second moment bound requires L0");
    const double u4 = in.variant == MomentVariant::kFourthMoment ? n * (n + 2.0) : n;
    return k1sq * (2.0 * (*in.l0) * (*in.l0) * u4 + 8.0 * noise * n);
  }
  if (!in.l1) throw ConfigError("C11 second moment bound requires L1");
  if (!in.g) throw ConfigError("C11 second moment bound requires G");
  const double l1_term = in.variant == MomentVariant::kPrintedL1 ? *in.l1 : (*in.l1) * (*in.l1);
  return k1sq * (0.75 * l1_term * in.mu * in.mu * std::pow(in.kappa2, 4) * std::pow(n + 6.0, 3) +
                 3.0 * (*in.g) * (*in.g) * (n + 4.0) * (n + 4.0) + 12.0 * noise * n);
}

double compute_zeta_bound(double kappa1, double K, double B1, double K1, CVariant variant) {
  const double k1_term = variant == CVariant::kSquaredK1 ? K1 * K1 : K1;
  return 3.0 * kappa1 * kappa1 * (K + B1 * B1 + k1_term);
}

}  // namespace zomd
