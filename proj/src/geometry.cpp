#include "zomd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "zomd/errors.hpp"

namespace zomd {

namespace {

// Floor applied before taking logarithms of simplex coordinates.
constexpr double kEntropyFloor = 1e-300;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void RequireSameSize(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

Norm dual_of(Norm norm) {
  switch (norm) {
    case Norm::kL1:
      return Norm::kLinf;
    case Norm::kL2:
      return Norm::kL2;
    case Norm::kLinf:
      return Norm::kL1;
  }
  return Norm::kL2;
}

double norm_value(Norm norm, const Vector& v) {
  if (v.size() == 0) return 0.0;
  switch (norm) {
    case Norm::kL1:
      return v.lpNorm<1>();
    case Norm::kL2:
      return v.norm();
    case Norm::kLinf:
      return v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

std::string_view to_string(Norm norm) {
  switch (norm) {
    case Norm::kL1:
      return "l1";
    case Norm::kL2:
      return "l2";
    case Norm::kLinf:
      return "linf";
  }
  return "?";
}

Norm parse_norm(std::string_view name) {
  if (name == "l1") return Norm::kL1;
  if (name == "l2") return Norm::kL2;
  if (name == "linf") return Norm::kLinf;
  throw ConfigError("unknown norm '" + std::string(name) + "' (expected l1, l2 or linf)");
}

// ||v||_2 <= ||v||_1, ||v||_2 <= ||v||_2, ||v||_2 <= sqrt(n) ||v||_inf; all tight.
static double L2Constant(Norm norm, int n) {
  return norm == Norm::kLinf ? std::sqrt(static_cast<double>(n)) : 1.0;
}

NormPair::NormPair(Norm primal, int n)
    : primal_(primal),
      dual_(dual_of(primal)),
      n_(n),
      kappa1_(L2Constant(dual_of(primal), n)),
      kappa2_(L2Constant(primal, n)) {
  if (n < 1) throw ConfigError("norm pair dimension must be >= 1");
}

void NormPair::CheckDimension(const Vector& v) const {
  if (v.size() != n_) {
    throw DimensionError("vector of dimension " + std::to_string(v.size()) +
                         " used with a norm pair of dimension " + std::to_string(n_));
  }
}

double NormPair::primal_norm(const Vector& v) const {
  CheckDimension(v);
  return norm_value(primal_, v);
}

double NormPair::dual_norm(const Vector& v) const {
  CheckDimension(v);
  return norm_value(dual_, v);
}

double dual_norm_of(const Vector& v, const NormPair& norms) { return norms.dual_norm(v); }

// ---------------------------------------------------------------------------
// FeasibleSet

FeasibleSet::FeasibleSet(Shape shape, Norm primal) : shape_(std::move(shape)), primal_(primal) {
  std::visit(
      Overloaded{
          [&](const Box& b) {
            RequireSameSize(b.lo, b.hi, "box bounds");
            if (b.lo.size() < 1) throw ConfigError("box must have dimension >= 1");
            if ((b.lo.array() > b.hi.array()).any()) throw ConfigError("box requires lo <= hi componentwise");
            if (!b.lo.allFinite() || !b.hi.allFinite()) throw ConfigError("box bounds must be finite");
            n_ = static_cast<int>(b.lo.size());
            diameter_ = norm_value(primal, b.hi - b.lo);
          },
          [&](const Ball& b) {
            if (b.center.size() < 1) throw ConfigError("ball must have dimension >= 1");
            if (!(b.radius > 0.0) || !std::isfinite(b.radius)) throw ConfigError("ball radius must be > 0");
            n_ = static_cast<int>(b.center.size());
            // Largest primal norm of a vector with Euclidean length 2r.
            const double scale = primal == Norm::kL1 ? std::sqrt(static_cast<double>(n_)) : 1.0;
            diameter_ = 2.0 * b.radius * scale;
          },
          [&](const Simplex& s) {
            if (s.n < 1) throw ConfigError("simplex requires n >= 1");
            n_ = s.n;
            if (n_ == 1) {
              diameter_ = 0.0;
            } else {
              // Attained between two distinct vertices e_i - e_j.
              diameter_ = primal == Norm::kL1 ? 2.0 : primal == Norm::kL2 ? std::sqrt(2.0) : 1.0;
            }
          },
      },
      shape_);
}

FeasibleSet FeasibleSet::box(Vector lo, Vector hi, Norm primal) {
  return FeasibleSet(Box{std::move(lo), std::move(hi)}, primal);
}

FeasibleSet FeasibleSet::ball(Vector center, double radius, Norm primal) {
  return FeasibleSet(Ball{std::move(center), radius}, primal);
}

FeasibleSet FeasibleSet::simplex(int n, Norm primal) { return FeasibleSet(Simplex{n}, primal); }

std::string_view FeasibleSet::kind_name() const {
  return std::visit(Overloaded{[](const Box&) { return std::string_view("box"); },
                               [](const Ball&) { return std::string_view("ball"); },
                               [](const Simplex&) { return std::string_view("simplex"); }},
                    shape_);
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (x.size() != n_ || !x.allFinite()) return false;
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            return ((x.array() >= b.lo.array() - tol) && (x.array() <= b.hi.array() + tol)).all();
          },
          [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
          [&](const Simplex&) { return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol; },
      },
      shape_);
}

Vector FeasibleSet::bregman_center() const {
  return std::visit(Overloaded{
                        [](const Box& b) -> Vector { return 0.5 * (b.lo + b.hi); },
                        [](const Ball& b) -> Vector { return b.center; },
                        [](const Simplex& s) -> Vector { return Vector::Constant(s.n, 1.0 / s.n); },
                    },
                    shape_);
}

Vector FeasibleSet::sample(RandomStream& rng) const {
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector {
            Vector x(n_);
            for (int i = 0; i < n_; ++i) x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * rng.uniform();
            return x;
          },
          [&](const Ball& b) -> Vector {
            Vector d = rng.normal_vector(n_);
            const double len = d.norm();
            if (len == 0.0) return b.center;
            const double r = b.radius * std::pow(rng.uniform(), 1.0 / n_);
            return b.center + (r / len) * d;
          },
          [&](const Simplex&) -> Vector {
            Vector e(n_);
            for (int i = 0; i < n_; ++i) e[i] = -std::log1p(-rng.uniform());
            return e / e.sum();
          },
      },
      shape_);
}

Vector FeasibleSet::project(const Vector& y) const {
  if (y.size() != n_) throw DimensionError("projection: dimension mismatch");
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector { return y.cwiseMax(b.lo).cwiseMin(b.hi); },
          [&](const Ball& b) -> Vector {
            const Vector d = y - b.center;
            const double len = d.norm();
            if (len <= b.radius) return y;
            return b.center + (b.radius / len) * d;
          },
          [&](const Simplex&) -> Vector {
            // Sort-and-threshold projection onto {x >= 0, sum x = 1}.
            std::vector<double> sorted(y.data(), y.data() + y.size());
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            double cumulative = 0.0;
            double theta = 0.0;
            for (std::size_t k = 0; k < sorted.size(); ++k) {
              cumulative += sorted[k];
              const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
              if (sorted[k] - candidate > 0.0) theta = candidate;
            }
            return (y.array() - theta).cwiseMax(0.0).matrix();
          },
      },
      shape_);
}

// ---------------------------------------------------------------------------
// MirrorMap

std::string_view to_string(MirrorKind kind) {
  return kind == MirrorKind::kEuclidean ? "euclidean" : "negative_entropy";
}

MirrorKind parse_mirror_kind(std::string_view name) {
  if (name == "euclidean") return MirrorKind::kEuclidean;
  if (name == "negative_entropy") return MirrorKind::kNegativeEntropy;
  throw ConfigError("unknown mirror map '" + std::string(name) + "' (expected euclidean or negative_entropy)");
}

MirrorMap::MirrorMap(MirrorKind kind, Norm primal, int n) : kind_(kind), sigma_(1.0) {
  if (n < 1) throw ConfigError("mirror map dimension must be >= 1");
  // 0.5||x||_2^2 is 1-strongly convex in l2 and linf, but only 1/n in l1.
  // Negative entropy is 1-strongly convex in l1 on the simplex (Pinsker), hence in l2 and linf.
  if (kind == MirrorKind::kEuclidean && primal == Norm::kL1) sigma_ = 1.0 / n;
}

double MirrorMap::value(const Vector& x) const {
  if (kind_ == MirrorKind::kEuclidean) return 0.5 * x.squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw DomainError("negative entropy is undefined for negative coordinates");
    if (x[i] > 0.0) total += x[i] * std::log(x[i]);
  }
  return total;
}

Vector MirrorMap::gradient(const Vector& x) const {
  if (kind_ == MirrorKind::kEuclidean) return x;
  if ((x.array() <= 0.0).any()) {
    throw DomainError("entropy gradient requires strictly positive coordinates");
  }
  return (x.array().log() + 1.0).matrix();
}

double bregman(const MirrorMap& map, const Vector& x, const Vector& y) {
  RequireSameSize(x, y, "bregman");
  if (map.kind() == MirrorKind::kEuclidean) return 0.5 * (x - y).squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw DomainError("bregman: y lies on the boundary of the entropy domain");
    if (x[i] < 0.0) throw DomainError("bregman: x has a negative coordinate");
    const double xlogx = x[i] > 0.0 ? x[i] * std::log(x[i] / y[i]) : 0.0;
    total += xlogx - x[i] + y[i];
  }
  return std::max(total, 0.0);
}

double three_point_gap(const MirrorMap& map, const Vector& x, const Vector& y, const Vector& z) {
  RequireSameSize(x, y, "three_point_gap");
  RequireSameSize(x, z, "three_point_gap");
  const double lhs = bregman(map, z, y) - bregman(map, z, x) - bregman(map, x, y);
  const double rhs = (map.gradient(x) - map.gradient(y)).dot(z - x);
  return std::abs(lhs - rhs);
}

Vector prox_step(const MirrorMap& map, const FeasibleSet& set, const Vector& x_t, const Vector& g,
                 double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("prox_step requires alpha > 0");
  RequireSameSize(x_t, g, "prox_step");
  if (x_t.size() != set.dimension()) throw DimensionError("prox_step: iterate does not match the set dimension");

  const auto& shape = set.shape();
  if (map.kind() == MirrorKind::kEuclidean) {
    if (std::holds_alternative<Simplex>(shape)) {
      throw ConfigError("euclidean mirror map is only supported on box and ball sets");
    }
    return set.project(x_t - alpha * g);
  }
  if (!std::holds_alternative<Simplex>(shape)) {
    throw ConfigError("negative_entropy mirror map requires the simplex");
  }
  // x_{t+1,i} proportional to x_{t,i} exp(-alpha g_i), evaluated in log space.
  Vector w = (x_t.cwiseMax(kEntropyFloor).array().log() - alpha * g.array()).matrix();
  w.array() -= w.maxCoeff();
  w = w.array().exp().matrix();
  return w / w.sum();
}

// ---------------------------------------------------------------------------

Geometry::Geometry(FeasibleSet set, MirrorKind mirror)
    : norms_(set.primal(), set.dimension()),
      set_(std::move(set)),
      map_(mirror, set_.primal(), set_.dimension()) {
  const bool simplex = std::holds_alternative<Simplex>(set_.shape());
  if (mirror == MirrorKind::kNegativeEntropy && !simplex) {
    throw ConfigError("negative_entropy mirror map requires a simplex feasible set");
  }
  if (mirror == MirrorKind::kEuclidean && simplex) {
    throw ConfigError("the simplex is only supported with the negative_entropy mirror map");
  }
}

}  // namespace zomd
