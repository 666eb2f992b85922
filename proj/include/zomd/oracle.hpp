#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "zomd/geometry.hpp"
#include "zomd/random.hpp"

namespace zomd {

enum class SmoothnessClass { kC00, kC11 };

std::string_view to_string(SmoothnessClass cls);
SmoothnessClass parse_smoothness_class(std::string_view name);

/// f(x) = (x - c)^T Q (x - c), Q symmetric positive semidefinite.
struct Quadratic {
  Eigen::MatrixXd Q;
  Vector c;
};

/// f(x) = sum_i |x_i - a_i|.
struct AbsSum {
  Vector a;
};

/// f(x) = scale * log(sum_i exp(x_i / scale)).
struct LogSumExp {
  double scale = 1.0;
  int n = 1;
};

/// Test objective with certified constants and a known optimum on the feasible set.
///
/// All Lipschitz-type constants are Euclidean: |f(x)-f(y)| <= L0 ||x-y||_2,
/// ||grad f(x) - grad f(y)||_2 <= L1 ||x-y||_2, and G bounds ||grad f||_2 on
/// the feasible set enlarged by a probe margin in every coordinate.
class ObjectiveSpec {
 public:
  using Kind = std::variant<Quadratic, AbsSum, LogSumExp>;

  ObjectiveSpec(Kind kind, FeasibleSet set);

  const Kind& kind() const { return kind_; }
  std::string_view kind_name() const;
  int dimension() const { return n_; }
  const FeasibleSet& set() const { return set_; }

  /// Natural class of the objective (abs_sum: C00, quadratic and log_sum_exp: C11).
  SmoothnessClass natural_class() const;

  double value(const Vector& x) const;

  /// Gradient; throws DomainError at a kink of abs_sum.
  Vector gradient(const Vector& x) const;

  /// An element of the subdifferential (zero component at abs_sum kinks).
  Vector subgradient(const Vector& x) const;

  /// Lipschitz constant of f on X enlarged by `margin` per coordinate.
  double lipschitz(double margin) const;

  /// Lipschitz constant of grad f; empty for non-smooth objectives.
  std::optional<double> gradient_lipschitz() const;

  /// Upper bound on ||grad f||_2 over X enlarged by `margin` per coordinate.
  double gradient_bound(double margin) const;

  double f_star() const { return f_star_; }
  const Vector& x_star() const { return x_star_; }

 private:
  void Minimize();

  Kind kind_;
  FeasibleSet set_;
  int n_ = 0;
  double f_star_ = 0.0;
  Vector x_star_;
};

ObjectiveSpec make_quadratic(Eigen::MatrixXd Q, Vector c, FeasibleSet set);
ObjectiveSpec make_abs_sum(Vector a, FeasibleSet set);
ObjectiveSpec make_log_sum_exp(double scale, FeasibleSet set);

enum class NoiseKind { kNone, kAdditiveGaussian, kBiased };
enum class BiasField { kSine, kConstant };

std::string_view to_string(NoiseKind kind);
std::string_view to_string(BiasField field);

/// Noise law e(x, w) = b(x) + sd * N(0, 1) with |b(x)| <= B and
/// declared second-moment bound E[e^2] <= V^2.
class NoiseModel {
 public:
  static NoiseModel none();
  static NoiseModel additive_gaussian(double sd, std::optional<double> declared_v = std::nullopt);
  /// Default field is b(x) = B sin(<1, x>); the constant field is b(x) = B.
  static NoiseModel biased(double bound, double sd, BiasField field = BiasField::kSine,
                           std::optional<double> declared_v = std::nullopt);

  NoiseKind kind() const { return kind_; }
  BiasField field() const { return field_; }
  double bias_bound() const { return bound_; }
  double sd() const { return sd_; }
  /// Declared V, or sqrt(B^2 + sd^2) when none was declared.
  double v() const;
  bool v_declared() const { return declared_v_.has_value(); }
  /// True when sup b(x)^2 + sd^2 <= V^2.
  bool v_valid() const;

  double bias(const Vector& x) const;
  double draw(const Vector& x, RandomStream& rng) const;

 private:
  NoiseModel(NoiseKind kind, BiasField field, double bound, double sd, std::optional<double> declared_v);

  NoiseKind kind_;
  BiasField field_;
  double bound_;
  double sd_;
  std::optional<double> declared_v_;
};

/// f(x) + e(x, w) with a fresh noise draw from `rng`.
double evaluate_noisy(const ObjectiveSpec& obj, const NoiseModel& noise, const Vector& x, RandomStream& rng);

double evaluate_exact(const ObjectiveSpec& obj, const Vector& x);

Vector gradient_exact(const ObjectiveSpec& obj, const Vector& x);

}  // namespace zomd
