#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "zomd/errors.hpp"
#include "zomd/estimator.hpp"

using namespace zomd;
using zomd::test::Moments;
using zomd::test::Vec;

namespace {

FeasibleSet Cube(int n, double half = 1.0) {
  return FeasibleSet::box(Vector::Constant(n, -half), Vector::Constant(n, half));
}

ObjectiveSpec SquaredNorm(int n) { return make_quadratic(Eigen::MatrixXd::Identity(n, n), Vector::Zero(n), Cube(n)); }

ObjectiveSpec Constant(int n) { return make_quadratic(Eigen::MatrixXd::Zero(n, n), Vector::Zero(n), Cube(n)); }

// With every a_i far outside the region probed, sum |x_i - a_i| is the affine
// function sum a_i - <1, x>.
ObjectiveSpec Affine(int n) { return make_abs_sum(Vector::Constant(n, 1e3), Cube(n)); }

}  // namespace

TEST_CASE("gaussian directions") {
  RandomStream a(5), b(5);
  CHECK(sample_direction(a, 4) == sample_direction(b, 4));

  const int n = 3;
  const int N = 1000000;
  RandomStream rng(17);
  Vector sum = Vector::Zero(n);
  Moments sq;
  for (int i = 0; i < N; ++i) {
    const Vector u = sample_direction(rng, n);
    sum += u;
    sq.add(u.squaredNorm());
  }
  CHECK((sum / N).cwiseAbs().maxCoeff() <= 4.0 / std::sqrt(N));
  CHECK(std::abs(sq.mean() - n) <= 4.0 * std::sqrt(2.0 * n) / std::sqrt(N));
}

TEST_CASE("two-point estimate on exact objectives") {
  const int n = 3;
  const NgaConfig cfg(0.1, n);
  const RandomStream root(3);
  const ObjectiveSpec affine = Affine(n);
  const ObjectiveSpec flat = Constant(n);
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Vector x = Vec({0.2, -0.4, 0.9});
    const GradientSample s = estimate_gradient(affine, NoiseModel::none(), x, cfg, root.substream(t));
    CHECK((s.g_tilde - (-s.u.sum()) * s.u).norm() <= 1e-9 * std::max(1.0, s.g_tilde.norm()));
    CHECK(s.g_tilde == ((s.f_hat_far - s.f_hat_near) / cfg.mu) * s.u);
    CHECK(estimate_gradient(flat, NoiseModel::none(), x, cfg, root.substream(t)).g_tilde.norm() == 0.0);
  }
  // Same iteration stream, same sample.
  const GradientSample p = estimate_gradient(SquaredNorm(n), NoiseModel::additive_gaussian(0.1), Vector::Zero(n),
                                             cfg, root.substream(9));
  const GradientSample q = estimate_gradient(SquaredNorm(n), NoiseModel::additive_gaussian(0.1), Vector::Zero(n),
                                             cfg, root.substream(9));
  CHECK(p.g_tilde == q.g_tilde);
  CHECK_THROWS_AS(NgaConfig(0.0, 2), ConfigError);
  CHECK_THROWS_AS(NgaConfig(0.1, 0), ConfigError);
}

TEST_CASE("estimate mean on the squared norm") {
  const ObjectiveSpec obj = SquaredNorm(2);
  const Vector x = Vec({1, -1});
  const NgaConfig cfg(0.1, 2);
  const RandomStream root(11);
  Moments m0, m1;
  for (std::uint64_t t = 0; t < 100000; ++t) {
    const Vector g = estimate_gradient(obj, NoiseModel::none(), x, cfg, root.substream(t)).g_tilde;
    m0.add(g[0]);
    m1.add(g[1]);
  }
  CHECK(std::abs(m0.mean() - 2.0) <= 4 * m0.std_error());
  CHECK(std::abs(m1.mean() + 2.0) <= 4 * m1.std_error());

  RandomStream ref_rng(12);
  const VectorEstimate ref = smoothed_gradient_ref(obj, x, 0.1, 100000, ref_rng);
  CHECK(std::abs(m0.mean() - ref.mean[0]) <= 4 * std::hypot(m0.std_error(), ref.std_error[0]));
  CHECK(std::abs(m1.mean() - ref.mean[1]) <= 4 * std::hypot(m1.std_error(), ref.std_error[1]));
}

TEST_CASE("smoothed value reference") {
  RandomStream rng(21);
  const ScalarEstimate sq = smoothed_value_ref(SquaredNorm(3), Vector::Zero(3), 0.5, 200000, rng);
  CHECK(std::abs(sq.mean - 0.75) <= 4 * sq.std_error);

  const ScalarEstimate abs1 = smoothed_value_ref(make_abs_sum(Vec({0}), Cube(1)), Vec({0}), 1.0, 200000, rng);
  CHECK(std::abs(abs1.mean - std::sqrt(2.0 / std::numbers::pi)) <= 4 * abs1.std_error);

  const Vector x = Vec({0.3, 0.1});
  const ObjectiveSpec affine = Affine(2);
  const ScalarEstimate lin = smoothed_value_ref(affine, x, 0.3, 100000, rng);
  CHECK(std::abs(lin.mean - affine.value(x)) <= 4 * lin.std_error);
  CHECK_THROWS_AS(smoothed_value_ref(affine, x, 0.3, 10, rng), PreconditionError);
}

TEST_CASE("smoothed gradient reference") {
  RandomStream rng(23);
  const VectorEstimate flat = smoothed_gradient_ref(Constant(2), Vec({0.5, 0.5}), 0.2, 10000, rng);
  CHECK(flat.mean.norm() == 0.0);
  const Vector x = Vec({0.4, -0.7, 0.1});
  const VectorEstimate sq = smoothed_gradient_ref(SquaredNorm(3), x, 0.2, 200000, rng);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(sq.mean[i] - 2 * x[i]) <= 4 * sq.std_error[i]);
}

TEST_CASE("noise at the two points is independent") {
  const ObjectiveSpec obj = SquaredNorm(3);
  const NoiseModel noise = NoiseModel::biased(0.1, 0.1);
  const NgaConfig cfg(0.1, 3);
  const Vector x = Vec({0.1, 0.2, -0.3});
  const RandomStream root(31);
  const int N = 100000;
  double sf = 0, sn = 0, sff = 0, snn = 0, sfn = 0;
  for (std::uint64_t t = 0; t < N; ++t) {
    const GradientSample s = estimate_gradient(obj, noise, x, cfg, root.substream(t));
    const double ef = s.f_hat_far - obj.value(x + cfg.mu * s.u);
    const double en = s.f_hat_near - obj.value(x);
    sf += ef;
    sn += en;
    sff += ef * ef;
    snn += en * en;
    sfn += ef * en;
  }
  const double cov = sfn / N - (sf / N) * (sn / N);
  const double corr = cov / std::sqrt((sff / N - (sf / N) * (sf / N)) * (snn / N - (sn / N) * (sn / N)));
  CHECK(std::abs(corr) <= 0.01);
}

TEST_CASE("bias and second-moment bound formulas") {
  const NormPair l2(Norm::kL2, 4);
  CHECK(bias_bound(l2, NoiseModel::none(), 0.5) == 0.0);
  CHECK(bias_bound(l2, NoiseModel::biased(0.1, 0.0), 0.5) == doctest::Approx(0.8));
  CHECK(bias_bound(l2, NoiseModel::biased(0.1, 0.0), 0.25) == doctest::Approx(1.6));
  // Dual linf brings kappa1 = sqrt(n).
  CHECK(bias_bound(NormPair(Norm::kL1, 4), NoiseModel::biased(0.1, 0.0), 0.5) == doctest::Approx(1.6));

  const ObjectiveSpec abs2 = make_abs_sum(Vector::Zero(2), Cube(2));
  const double L0 = abs2.lipschitz(0.6);
  const NoiseModel noise = NoiseModel::additive_gaussian(0.1);
  CHECK(second_moment_bound(SmoothnessClass::kC00, abs2, noise, NormPair(Norm::kL2, 2), 0.1) ==
        doctest::Approx(4 * L0 * L0 + 16));
  CHECK(second_moment_bound(SmoothnessClass::kC00, abs2, noise, NormPair(Norm::kL2, 2), 0.1,
                            MomentVariant::kFourthMoment) == doctest::Approx(2 * L0 * L0 * 8 + 16));
  CHECK_THROWS_AS(second_moment_bound(SmoothnessClass::kC11, abs2, noise, NormPair(Norm::kL2, 2), 0.1), ConfigError);
  CHECK_THROWS_AS(second_moment_bound(SmoothnessClass::kC00, abs2, noise, NormPair(Norm::kL2, 2), 0.0),
                  PreconditionError);
}

TEST_CASE("unbiased oracle shows no bias beyond sampling error") {
  const int n = 3;
  const Geometry geometry(Cube(n), MirrorKind::kEuclidean);
  const ObjectiveSpec obj = make_abs_sum(Vec({0.2, -0.1, 0.3}), Cube(n));
  const EstimatorReport r = verify_estimator_bounds(obj, NoiseModel::additive_gaussian(0.1), geometry,
                                                    Vec({0.5, 0.5, -0.5}), NgaConfig(0.1, n), 50000, RandomStream(41));
  CHECK(r.bias_bound == 0.0);
  CHECK(r.empirical_bias_dual_norm <= 4 * r.bias_stderr);
  CHECK(r.bias_pass);
}

TEST_CASE("second moment of the C00 example is within its bound") {
  const Geometry geometry(Cube(2), MirrorKind::kEuclidean);
  const ObjectiveSpec obj = make_abs_sum(Vector::Zero(2), Cube(2));
  const EstimatorReport r = verify_estimator_bounds(obj, NoiseModel::additive_gaussian(0.1), geometry,
                                                    Vec({0.5, -0.3}), NgaConfig(0.1, 2), 50000, RandomStream(43));
  const double L0 = obj.lipschitz(0.6);
  CHECK(r.second_moment_bound == doctest::Approx(4 * L0 * L0 + 16));
  CHECK(r.empirical_second_moment <= r.second_moment_bound);
  CHECK(r.pass());
}

TEST_CASE("noise share of the second moment grows as mu shrinks") {
  const Geometry geometry(Cube(2), MirrorKind::kEuclidean);
  const ObjectiveSpec obj = make_abs_sum(Vector::Zero(2), Cube(2));
  const NoiseModel noise = NoiseModel::additive_gaussian(0.1);
  const Vector x = Vec({0.5, -0.3});
  const double m1 =
      verify_estimator_bounds(obj, noise, geometry, x, NgaConfig(0.02, 2), 20000, RandomStream(45)).empirical_second_moment;
  const double m2 = verify_estimator_bounds(obj, noise, geometry, x, NgaConfig(0.01, 2), 20000, RandomStream(45))
                        .empirical_second_moment;
  CHECK(m2 >= m1);
  // Noise term dominates here: roughly four times the value at half the radius.
  CHECK(m2 >= 3 * m1);
}

TEST_CASE("bias stays within its bound under the biased oracle") {
  for (Norm primal : {Norm::kL2, Norm::kL1}) {
    for (int n : {2, 5}) {
      const FeasibleSet set = FeasibleSet::box(Vector::Constant(n, -1), Vector::Constant(n, 1), primal);
      const Geometry geometry(set, MirrorKind::kEuclidean);
      const ObjectiveSpec obj = make_log_sum_exp(0.5, set);
      RandomStream points(50 + n);
      for (double mu : {0.05, 0.1, 0.5}) {
        const EstimatorReport r = verify_estimator_bounds(obj, NoiseModel::biased(0.1, 0.05), geometry,
                                                          set.sample(points), NgaConfig(mu, n), 20000, RandomStream(n));
        INFO("n=", n, " mu=", mu);
        CHECK(r.bias_pass);
        CHECK(r.empirical_bias_dual_norm <= r.bias_bound + 4 * r.bias_stderr);
      }
    }
  }
}

// Smooth objectives against the stated constants over the radius grid; the
// nonsmooth abs_sum against the reading with E||u||^4 = n(n+2) (see the next test).
TEST_CASE("second moment across the radius grid for every objective and noise") {
  const int n = 3;
  const FeasibleSet set = Cube(n);
  const Geometry geometry(set, MirrorKind::kEuclidean);
  Eigen::MatrixXd Q(3, 3);
  Q << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 0.5;
  const std::vector<ObjectiveSpec> objectives = {make_quadratic(Q, Vec({0.3, -0.2, 0.1}), set),
                                                 make_abs_sum(Vec({0.5, -0.2, 0.1}), set),
                                                 make_log_sum_exp(0.7, set)};
  const std::vector<NoiseModel> noises = {NoiseModel::none(), NoiseModel::additive_gaussian(0.1),
                                          NoiseModel::biased(0.1, 0.1)};
  RandomStream points(61);
  for (const ObjectiveSpec& obj : objectives) {
    for (const NoiseModel& noise : noises) {
      const Vector x = set.sample(points);
      for (double mu : {0.01, 0.05, 0.1, 0.5, 1.0}) {
        const EstimatorReport r =
            verify_estimator_bounds(obj, noise, geometry, x, NgaConfig(mu, n), 20000, RandomStream(62));
        INFO(obj.kind_name(), " noise=", static_cast<int>(noise.kind()), " mu=", mu);
        if (obj.natural_class() == SmoothnessClass::kC11) {
          CHECK(r.second_moment_pass);
        } else {
          CHECK(r.alt_variant == MomentVariant::kFourthMoment);
          CHECK(r.second_moment_pass_alt);
        }
      }
    }
  }
}

TEST_CASE("stated C00 constant undercounts the fourth Gaussian moment") {
  // At a kink of every coordinate, ||g~||^2 = (sum |u_i|)^2 ||u||^2 exactly, whose mean
  // for n = 5 is about 124, while 2 L0^2 n = 50.
  const int n = 5;
  const Geometry geometry(Cube(n), MirrorKind::kEuclidean);
  const ObjectiveSpec obj = make_abs_sum(Vector::Zero(n), Cube(n));
  const EstimatorReport r = verify_estimator_bounds(obj, NoiseModel::none(), geometry, Vector::Zero(n),
                                                    NgaConfig(1.0, n), 50000, RandomStream(71));
  CHECK(r.second_moment_bound == doctest::Approx(50.0));
  CHECK(r.empirical_second_moment > r.second_moment_bound + 4 * r.second_moment_stderr);
  CHECK(r.second_moment_pass_alt);
}

TEST_CASE("smoothed gradient is a delta-subgradient of a nonsmooth objective") {
  const int n = 3;
  const double mu = 0.1;
  const FeasibleSet set = Cube(n);
  const ObjectiveSpec obj = make_abs_sum(Vec({0.2, -0.5, 0.0}), set);
  const double delta = mu * obj.lipschitz(6 * mu) * std::sqrt(n);
  RandomStream rng(81);
  for (int pair = 0; pair < 1000; ++pair) {
    const Vector x = set.sample(rng);
    const Vector y = set.sample(rng);
    const VectorEstimate g = smoothed_gradient_ref(obj, x, mu, 4000, rng);
    const double tol = 5 * g.std_error.norm() * (y - x).norm();
    CHECK(obj.value(y) >= obj.value(x) + g.mean.dot(y - x) - delta - tol);
  }
}

TEST_CASE("verification preconditions") {
  const Geometry geometry(Cube(2), MirrorKind::kEuclidean);
  const ObjectiveSpec obj = SquaredNorm(2);
  CHECK_THROWS_AS(verify_estimator_bounds(obj, NoiseModel::none(), geometry, Vec({0, 0}), NgaConfig(0.1, 2), 100,
                                          RandomStream(1)),
                  PreconditionError);
  CHECK_THROWS_AS(verify_estimator_bounds(obj, NoiseModel::none(), geometry, Vec({0, 0, 0}), NgaConfig(0.1, 3),
                                          10000, RandomStream(1)),
                  DimensionError);
}
