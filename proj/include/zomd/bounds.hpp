#pragma once

#include <optional>

#include "zomd/oracle.hpp"

namespace zomd {

/// Which reading of the C11 smoothing offset to use: (mu^2/2) L1 sqrt(n) or (mu^2/2) L1 n.
enum class DeltaVariant { kSqrtN, kN };

/// Whether the zeta second-moment constant uses K1^2 (derivation) or K1 (as printed).
enum class CVariant { kSquaredK1, kPrintedK1 };

/// Offset delta such that grad f_mu(x) is a delta-subgradient of f:
/// C00: mu L0 sqrt(n);  C11: (mu^2 / 2) L1 sqrt(n)  (or n, see DeltaVariant).
double compute_delta(SmoothnessClass cls, double mu, double lipschitz, int n,
                     DeltaVariant variant = DeltaVariant::kSqrtN);

/// 2 kappa1 B sqrt(n) / mu.
double compute_bias_bound(double kappa1, double bias_bound, int n, double mu);

/// Reading of the estimator second-moment constant.
/// kStandard: C00 as stated, C11 with L1^2 (what the derivation produces).
/// kPrintedL1: C11 with L1 unsquared, as printed.
/// kFourthMoment: C00 with E||u||_2^4 = n(n+2) in place of n in the L0 term.
enum class MomentVariant { kStandard, kPrintedL1, kFourthMoment };

struct SecondMomentInputs {
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  int n = 1;
  double mu = 0.1;
  double v = 0.0;
  std::optional<double> l0;
  std::optional<double> l1;
  std::optional<double> g;
  // Variants that do not apply to the requested class are ignored.
  MomentVariant variant = MomentVariant::kStandard;
};

/// C00: kappa1^2 (2 L0^2 n + 8 (V/mu)^2 n)  (kFourthMoment: 2 L0^2 n (n+2))
/// C11: kappa1^2 (3/4 L1^2 mu^2 kappa2^4 (n+6)^3 + 3 G^2 (n+4)^2 + 12 V^2 n / mu^2)
double compute_second_moment_bound(SmoothnessClass cls, const SecondMomentInputs& in);

/// 3 kappa1^2 (K + B1^2 + K1^2), or with K1 unsquared for CVariant::kPrintedK1.
double compute_zeta_bound(double kappa1, double K, double B1, double K1, CVariant variant = CVariant::kSquaredK1);

}  // namespace zomd
