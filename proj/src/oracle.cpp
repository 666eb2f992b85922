#include "zomd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "zomd/errors.hpp"

namespace zomd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kMaxVertexEnumerationDim = 14;

double LargestEigenvalue(const Eigen::MatrixXd& Q) {
  if (Q.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Q, Eigen::EigenvaluesOnly);
  return std::max(solver.eigenvalues().maxCoeff(), 0.0);
}

// Max of a convex function over the Minkowski sum of `vertices` and the cube [-m, m]^n.
template <class Fn>
double MaxOverInflatedVertices(const std::vector<Vector>& vertices, double margin, Fn&& fn) {
  const int n = static_cast<int>(vertices.front().size());
  const std::uint64_t corners = std::uint64_t{1} << n;
  double best = 0.0;
  Vector y(n);
  for (const Vector& v : vertices) {
    for (std::uint64_t mask = 0; mask < corners; ++mask) {
      for (int i = 0; i < n; ++i) y[i] = v[i] + ((mask >> i) & 1U ? margin : -margin);
      best = std::max(best, fn(y));
    }
  }
  return best;
}

// Projected gradient for a smooth convex objective; used only to locate the optimum.
template <class Grad>
Vector ProjectedGradient(const FeasibleSet& set, Vector x, double lipschitz, Grad&& grad) {
  if (!(lipschitz > 0.0)) return x;
  const double step = 1.0 / lipschitz;
  for (int k = 0; k < 200000; ++k) {
    Vector next = set.project(x - step * grad(x));
    const double moved = (next - x).lpNorm<Eigen::Infinity>();
    x = std::move(next);
    if (moved <= 1e-16) break;
  }
  return x;
}

}  // namespace

std::string_view to_string(SmoothnessClass cls) { return cls == SmoothnessClass::kC00 ? "C00" : "C11"; }

SmoothnessClass parse_smoothness_class(std::string_view name) {
  if (name == "C00") return SmoothnessClass::kC00;
  if (name == "C11") return SmoothnessClass::kC11;
  throw ConfigError("unknown smoothness class '" + std::string(name) + "' (expected C00 or C11)");
}

ObjectiveSpec::ObjectiveSpec(Kind kind, FeasibleSet set)
    : kind_(std::move(kind)), set_(std::move(set)), n_(set_.dimension()) {
  std::visit(Overloaded{
                 [&](const Quadratic& q) {
                   if (q.Q.rows() != n_ || q.Q.cols() != n_ || q.c.size() != n_) {
                     throw ConfigError("quadratic: Q must be n x n and c of length n (n = " +
                                       std::to_string(n_) + ")");
                   }
                   const double scale = std::max(1.0, q.Q.cwiseAbs().maxCoeff());
                   if ((q.Q - q.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
                     throw ConfigError("quadratic: Q must be symmetric");
                   }
                   Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(q.Q, Eigen::EigenvaluesOnly);
                   if (solver.eigenvalues().minCoeff() < -1e-12 * scale) {
                     throw ConfigError("quadratic: Q must be positive semidefinite");
                   }
                 },
                 [&](const AbsSum& a) {
                   if (a.a.size() != n_) throw ConfigError("abs_sum: a must have length n");
                 },
                 [&](LogSumExp& l) {
                   if (!(l.scale > 0.0)) throw ConfigError("log_sum_exp: scale must be > 0");
                   l.n = n_;
                 },
             },
             kind_);
  Minimize();
}

std::string_view ObjectiveSpec::kind_name() const {
  return std::visit(Overloaded{[](const Quadratic&) { return std::string_view("quadratic"); },
                               [](const AbsSum&) { return std::string_view("abs_sum"); },
                               [](const LogSumExp&) { return std::string_view("log_sum_exp"); }},
                    kind_);
}

SmoothnessClass ObjectiveSpec::natural_class() const {
  return std::holds_alternative<AbsSum>(kind_) ? SmoothnessClass::kC00 : SmoothnessClass::kC11;
}

double ObjectiveSpec::value(const Vector& x) const {
  if (x.size() != n_) throw DimensionError("objective evaluated at a point of the wrong dimension");
  return std::visit(Overloaded{
                        [&](const Quadratic& q) {
                          const Vector d = x - q.c;
                          return d.dot(q.Q * d);
                        },
                        [&](const AbsSum& a) { return (x - a.a).lpNorm<1>(); },
                        [&](const LogSumExp& l) {
                          const Vector s = x / l.scale;
                          const double m = s.maxCoeff();
                          return l.scale * (m + std::log((s.array() - m).exp().sum()));
                        },
                    },
                    kind_);
}

Vector ObjectiveSpec::gradient(const Vector& x) const {
  if (const auto* a = std::get_if<AbsSum>(&kind_)) {
    if (((x - a->a).array() == 0.0).any()) {
      throw DomainError("abs_sum is not differentiable where x_i = a_i");
    }
  }
  return subgradient(x);
}

Vector ObjectiveSpec::subgradient(const Vector& x) const {
  if (x.size() != n_) throw DimensionError("gradient requested at a point of the wrong dimension");
  return std::visit(Overloaded{
                        [&](const Quadratic& q) -> Vector { return 2.0 * (q.Q * (x - q.c)); },
                        [&](const AbsSum& a) -> Vector {
                          return (x - a.a).unaryExpr([](double d) { return (d > 0.0) - (d < 0.0) + 0.0; });
                        },
                        [&](const LogSumExp& l) -> Vector {
                          const Vector s = x / l.scale;
                          Vector e = (s.array() - s.maxCoeff()).exp().matrix();
                          return e / e.sum();
                        },
                    },
                    kind_);
}

double ObjectiveSpec::lipschitz(double margin) const {
  if (std::holds_alternative<Quadratic>(kind_)) return gradient_bound(margin);
  return gradient_bound(0.0);
}

std::optional<double> ObjectiveSpec::gradient_lipschitz() const {
  return std::visit(Overloaded{
                        [](const Quadratic& q) -> std::optional<double> { return 2.0 * LargestEigenvalue(q.Q); },
                        [](const AbsSum&) -> std::optional<double> { return std::nullopt; },
                        // Hessian (diag(p) - p p^T) / scale has spectral norm <= 1 / (2 scale).
                        [](const LogSumExp& l) -> std::optional<double> { return 0.5 / l.scale; },
                    },
                    kind_);
}

double ObjectiveSpec::gradient_bound(double margin) const {
  if (margin < 0.0) throw PreconditionError("gradient_bound: margin must be >= 0");
  const double root_n = std::sqrt(static_cast<double>(n_));
  if (std::holds_alternative<AbsSum>(kind_)) return root_n;
  if (std::holds_alternative<LogSumExp>(kind_)) return 1.0;

  const auto& q = std::get<Quadratic>(kind_);
  const double lambda = LargestEigenvalue(q.Q);
  auto grad_norm = [&](const Vector& y) { return 2.0 * (q.Q * (y - q.c)).norm(); };

  if (const auto* ball = std::get_if<Ball>(&set_.shape())) {
    return 2.0 * ((q.Q * (ball->center - q.c)).norm() + lambda * (ball->radius + margin * root_n));
  }
  std::vector<Vector> vertices;
  Vector lo(n_);
  Vector hi(n_);
  if (const auto* box = std::get_if<Box>(&set_.shape())) {
    lo = box->lo;
    hi = box->hi;
    vertices.push_back(box->lo);
  } else {
    lo.setZero();
    hi.setOnes();
    for (int i = 0; i < n_; ++i) vertices.push_back(Vector::Unit(n_, i));
  }
  if (n_ <= kMaxVertexEnumerationDim) {
    if (std::holds_alternative<Box>(set_.shape())) {
      // Corners of the enlarged box: lo/hi per coordinate, each pushed out by the margin.
      const Vector mid = 0.5 * (lo + hi);
      const Vector half = 0.5 * (hi - lo) + Vector::Constant(n_, margin);
      double best = 0.0;
      Vector y(n_);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_); ++mask) {
        for (int i = 0; i < n_; ++i) y[i] = mid[i] + ((mask >> i) & 1U ? half[i] : -half[i]);
        best = std::max(best, grad_norm(y));
      }
      return best;
    }
    return MaxOverInflatedVertices(vertices, margin, grad_norm);
  }
  const Vector reach = (lo.array() - margin - q.c.array()).abs().max((hi.array() + margin - q.c.array()).abs());
  return 2.0 * lambda * reach.norm();
}

void ObjectiveSpec::Minimize() {
  const Vector start = set_.bregman_center();
  x_star_ = std::visit(
      Overloaded{
          [&](const Quadratic& q) -> Vector {
            if (set_.contains(q.c, 0.0)) return q.c;
            const bool diagonal = q.Q.isDiagonal(0.0);
            if (diagonal && std::holds_alternative<Box>(set_.shape())) return set_.project(q.c);
            return ProjectedGradient(set_, start, 2.0 * LargestEigenvalue(q.Q),
                                     [&](const Vector& x) -> Vector { return 2.0 * (q.Q * (x - q.c)); });
          },
          [&](const AbsSum& a) -> Vector {
            if (std::holds_alternative<Box>(set_.shape())) return set_.project(a.a);
            if (std::holds_alternative<Simplex>(set_.shape())) {
              const Vector pos = a.a.cwiseMax(0.0);
              const double mass = pos.sum();
              if (mass >= 1.0) return pos / mass;
              return (pos.array() + (1.0 - mass) / n_).matrix();
            }
            // Ball: x = center + clip(a - center, tau) with tau chosen so the point is on the sphere.
            const auto& ball = std::get<Ball>(set_.shape());
            const Vector d = a.a - ball.center;
            if (d.norm() <= ball.radius) return a.a;
            double lo_tau = 0.0;
            double hi_tau = d.lpNorm<Eigen::Infinity>();
            for (int k = 0; k < 200; ++k) {
              const double mid = 0.5 * (lo_tau + hi_tau);
              if (d.cwiseMax(-mid).cwiseMin(mid).norm() > ball.radius) {
                hi_tau = mid;
              } else {
                lo_tau = mid;
              }
            }
            return ball.center + d.cwiseMax(-lo_tau).cwiseMin(lo_tau);
          },
          [&](const LogSumExp& l) -> Vector {
            // Increasing in every coordinate and permutation symmetric.
            if (const auto* box = std::get_if<Box>(&set_.shape())) return box->lo;
            if (std::holds_alternative<Simplex>(set_.shape())) return start;
            return ProjectedGradient(set_, start, 0.5 / l.scale,
                                     [&](const Vector& x) -> Vector { return subgradient(x); });
          },
      },
      kind_);
  f_star_ = value(x_star_);
}

ObjectiveSpec make_quadratic(Eigen::MatrixXd Q, Vector c, FeasibleSet set) {
  return ObjectiveSpec(Quadratic{std::move(Q), std::move(c)}, std::move(set));
}

ObjectiveSpec make_abs_sum(Vector a, FeasibleSet set) { return ObjectiveSpec(AbsSum{std::move(a)}, std::move(set)); }

ObjectiveSpec make_log_sum_exp(double scale, FeasibleSet set) {
  const int n = set.dimension();
  return ObjectiveSpec(LogSumExp{scale, n}, std::move(set));
}

// ---------------------------------------------------------------------------

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone:
      return "none";
    case NoiseKind::kAdditiveGaussian:
      return "additive_gaussian";
    case NoiseKind::kBiased:
      return "biased";
  }
  return "?";
}

std::string_view to_string(BiasField field) { return field == BiasField::kSine ? "sine" : "constant"; }

NoiseModel::NoiseModel(NoiseKind kind, BiasField field, double bound, double sd, std::optional<double> declared_v)
    : kind_(kind), field_(field), bound_(bound), sd_(sd), declared_v_(declared_v) {
  if (!(sd_ >= 0.0) || !std::isfinite(sd_)) throw ConfigError("noise sd must be finite and >= 0");
  if (!(bound_ >= 0.0) || !std::isfinite(bound_)) throw ConfigError("bias bound B must be finite and >= 0");
  if (declared_v_ && !(*declared_v_ >= 0.0 && std::isfinite(*declared_v_))) {
    throw ConfigError("declared V must be finite and >= 0");
  }
}

NoiseModel NoiseModel::none() { return NoiseModel(NoiseKind::kNone, BiasField::kSine, 0.0, 0.0, std::nullopt); }

NoiseModel NoiseModel::additive_gaussian(double sd, std::optional<double> declared_v) {
  return NoiseModel(NoiseKind::kAdditiveGaussian, BiasField::kSine, 0.0, sd, declared_v);
}

NoiseModel NoiseModel::biased(double bound, double sd, BiasField field, std::optional<double> declared_v) {
  return NoiseModel(NoiseKind::kBiased, field, bound, sd, declared_v);
}

double NoiseModel::v() const { return declared_v_.value_or(std::hypot(bound_, sd_)); }

bool NoiseModel::v_valid() const {
  const double v2 = v() * v();
  return bound_ * bound_ + sd_ * sd_ <= v2 * (1.0 + 1e-12);
}

double NoiseModel::bias(const Vector& x) const {
  if (kind_ != NoiseKind::kBiased) return 0.0;
  return field_ == BiasField::kConstant ? bound_ : bound_ * std::sin(x.sum());
}

double NoiseModel::draw(const Vector& x, RandomStream& rng) const {
  if (kind_ == NoiseKind::kNone) return 0.0;
  const double mean = bias(x);
  return sd_ > 0.0 ? mean + sd_ * rng.normal() : mean;
}

double evaluate_noisy(const ObjectiveSpec& obj, const NoiseModel& noise, const Vector& x, RandomStream& rng) {
  return obj.value(x) + noise.draw(x, rng);
}

double evaluate_exact(const ObjectiveSpec& obj, const Vector& x) { return obj.value(x); }

Vector gradient_exact(const ObjectiveSpec& obj, const Vector& x) { return obj.gradient(x); }

}  // namespace zomd
