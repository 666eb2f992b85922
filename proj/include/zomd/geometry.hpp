#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "zomd/random.hpp"

namespace zomd {

enum class Norm { kL1, kL2, kLinf };

Norm dual_of(Norm norm);
double norm_value(Norm norm, const Vector& v);
std::string_view to_string(Norm norm);
Norm parse_norm(std::string_view name);

/// A primal norm, its dual, and the tight equivalence constants in dimension n:
/// ||v||_2 <= kappa1 * ||v||_*  and  ||v||_2 <= kappa2 * ||v||.
class NormPair {
 public:
  NormPair(Norm primal, int n);

  Norm primal() const { return primal_; }
  Norm dual() const { return dual_; }
  int dimension() const { return n_; }
  double kappa1() const { return kappa1_; }
  double kappa2() const { return kappa2_; }
  double kappa() const { return kappa1_ * kappa2_; }

  double primal_norm(const Vector& v) const;
  double dual_norm(const Vector& v) const;

 private:
  void CheckDimension(const Vector& v) const;

  Norm primal_;
  Norm dual_;
  int n_;
  double kappa1_;
  double kappa2_;
};

/// Closed-form dual norm sup{<v,y> : ||y|| <= 1}.
double dual_norm_of(const Vector& v, const NormPair& norms);

struct Box {
  Vector lo;
  Vector hi;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Simplex {
  int n = 1;
};

/// Convex compact feasible set. The diameter is computed exactly in the
/// configured primal norm at construction.
class FeasibleSet {
 public:
  using Shape = std::variant<Box, Ball, Simplex>;

  FeasibleSet(Shape shape, Norm primal);

  static FeasibleSet box(Vector lo, Vector hi, Norm primal = Norm::kL2);
  static FeasibleSet ball(Vector center, double radius, Norm primal = Norm::kL2);
  static FeasibleSet simplex(int n, Norm primal = Norm::kL1);

  const Shape& shape() const { return shape_; }
  Norm primal() const { return primal_; }
  int dimension() const { return n_; }
  double diameter() const { return diameter_; }
  std::string_view kind_name() const;

  bool contains(const Vector& x, double tol = 1e-12) const;

  /// Box midpoint, ball center, or the uniform point of the simplex.
  Vector bregman_center() const;

  /// Uniform sample from the set (Dirichlet(1) on the simplex).
  Vector sample(RandomStream& rng) const;

  /// Euclidean projection onto the set.
  Vector project(const Vector& y) const;

 private:
  Shape shape_;
  Norm primal_;
  int n_ = 0;
  double diameter_ = 0.0;
};

enum class MirrorKind { kEuclidean, kNegativeEntropy };

std::string_view to_string(MirrorKind kind);
MirrorKind parse_mirror_kind(std::string_view name);

/// Distance-generating function R with its strong-convexity modulus
/// relative to the primal norm.
class MirrorMap {
 public:
  MirrorMap(MirrorKind kind, Norm primal, int n);

  MirrorKind kind() const { return kind_; }
  double sigma() const { return sigma_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

 private:
  MirrorKind kind_;
  double sigma_;
};

/// D_R(x, y) = R(x) - R(y) - <grad R(y), x - y>.
double bregman(const MirrorMap& map, const Vector& x, const Vector& y);

/// Residual of the three-point identity
/// D(z,y) - D(z,x) - D(x,y) = <grad R(x) - grad R(y), z - x>.
double three_point_gap(const MirrorMap& map, const Vector& x, const Vector& y, const Vector& z);

/// Exact minimizer over the set of <g, x - x_t> + D_R(x, x_t) / alpha.
Vector prox_step(const MirrorMap& map, const FeasibleSet& set, const Vector& x_t, const Vector& g,
                 double alpha);

/// Norm pair, feasible set and mirror map checked for a supported pairing.
class Geometry {
 public:
  Geometry(FeasibleSet set, MirrorKind mirror);

  const NormPair& norms() const { return norms_; }
  const FeasibleSet& set() const { return set_; }
  const MirrorMap& map() const { return map_; }
  int dimension() const { return set_.dimension(); }

  Vector prox(const Vector& x_t, const Vector& g, double alpha) const {
    return prox_step(map_, set_, x_t, g, alpha);
  }

 private:
  NormPair norms_;
  FeasibleSet set_;
  MirrorMap map_;
};

}  // namespace zomd
