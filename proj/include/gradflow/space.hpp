#ifndef GRADFLOW_SPACE_HPP
#define GRADFLOW_SPACE_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gradflow/errors.hpp"

namespace gradflow {

using Vector = Eigen::VectorXd;

enum class SpaceKind { euclidean, sphere, hyperbolic, spider };
enum class BoundSide { upper, lower, both };

std::string to_string(SpaceKind kind);
SpaceKind space_kind_from_string(const std::string& s);

// A model geodesic space with exact closed-form primitives.
//
// Charts:
//   euclidean   R^n, ambient coordinates.
//   sphere      radius-(1/sqrt(kappa)) sphere in R^(n+1), kappa > 0.
//   hyperbolic  hyperboloid model in R^(n+1) with Minkowski form
//               <x,y> = -x0 y0 + sum_i xi yi, <x,x> = 1/kappa, kappa < 0.
//   spider      m >= 3 half-lines glued at one branch point; points are
//               (leg index, distance from branch).
struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::euclidean;
  int dimension = 1;  // spider: leg count m
  double kappa = 0.0;

  static SpaceDescriptor Euclidean(int dim);
  static SpaceDescriptor Sphere(int dim, double kappa);
  static SpaceDescriptor Hyperbolic(int dim, double kappa);
  static SpaceDescriptor Spider(int legs);

  // Which comparison inequality holds, and at which kappa. Constant-curvature
  // spaces satisfy both bounds at their kappa; the spider only the upper
  // bound at 0 (every lower bound fails at the branch point).
  BoundSide bound_side() const;
  bool has_upper_bound() const { return true; }
  bool has_lower_bound() const { return kind != SpaceKind::spider; }

  int ambient_dim() const;
  double radius() const;  // sphere/hyperbolic: 1/sqrt(|kappa|)

  bool operator==(const SpaceDescriptor& o) const {
    return kind == o.kind && dimension == o.dimension && kappa == o.kappa;
  }
};

struct Point {
  SpaceDescriptor space;
  Vector x;

  Point() = default;
  // Renormalizes sphere/hyperbolic coordinates onto the constraint surface
  // and canonicalizes the spider branch point to leg 0.
  Point(SpaceDescriptor space, Vector coords);

  // spider accessors
  int leg() const { return static_cast<int>(x[0]); }
  double leg_pos() const { return x[1]; }
  bool at_branch() const { return x[1] == 0.0; }
};

// A base point with a direction-and-magnitude element of the tangent cone.
// Magnitude 0 is the cone origin; the direction is then irrelevant.
//
// Manifolds: `dir` is a unit ambient tangent vector at `base` (Minkowski-unit
// for hyperbolic). Spider: dir = (continuation leg, sign); sign +1 moves away
// from the branch along the current leg, sign -1 moves toward the branch and
// continues onto the stated leg.
struct TangentVector {
  Point base;
  Vector dir;
  double mag = 0.0;

  TangentVector() = default;
  TangentVector(Point base, Vector dir, double mag);

  static TangentVector Origin(Point base);
};

struct GeodesicBall {
  Point center;
  double radius = 0.0;

  GeodesicBall() = default;
  GeodesicBall(Point center, double radius);

  // Throws when the ball is too large to serve as the region G of an
  // upper-bound flow: on a sphere we need diam G < pi/(2 sqrt(kappa)).
  void require_valid_for_upper() const;
  double diameter() const { return 2.0 * radius; }
};

double distance(const Point& x, const Point& y);

// The point x#_t y on a minimal geodesic from x to y.
Point geodesic_point(const Point& x, const Point& y, double t);

// Initial velocity of the minimal geodesic from x to y; magnitude d(x,y).
TangentVector log_map(const Point& x, const Point& y);

// Unit-speed geodesic from v.base in direction v.dir evaluated at v.mag.
Point exp_map(const TangentVector& v);
Point exp_map(const Point& base, const Vector& dir, double mag);

// Gradient exponential: exp_map within the injectivity radius; on the sphere
// magnitudes >= pi/sqrt(kappa) clamp to the antipode, so that always
// d(base, result) <= mag. Requires a lower curvature bound.
Point grad_exp(const TangentVector& v);

// <u,v> = |u||v| cos(angle) in the tangent cone at the common base.
double inner_product(const TangentVector& u, const TangentVector& v);

// Distance in M^2(kappa) from x-tilde to the point a fraction t along the
// comparison triangle side y-tilde -> z-tilde.
double comparison_distance(double d_xy, double d_yz, double d_zx, double t,
                           double kappa);

// x if inside G, otherwise the point at distance G.radius on the minimal
// geodesic from the center to x.
Point project_to_ball(const Point& x, const GeodesicBall& G);

bool same_space(const Point& x, const Point& y);

// Orthonormal basis of the tangent space at x (manifold spaces only;
// hyperbolic: orthonormal for the Minkowski form).
std::vector<Vector> tangent_basis(const Point& x);

}  // namespace gradflow

#endif
