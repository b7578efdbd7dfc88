#include "gradflow/space.hpp"

#include <algorithm>
#include <cmath>

namespace gradflow {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kConstraintTol = 1e-12;
constexpr double kAntipodalTol = 1e-9;

// Minkowski form -u0 v0 + sum_i ui vi on R^(n+1).
double mink(const Vector& u, const Vector& v) {
  return u.tail(u.size() - 1).dot(v.tail(v.size() - 1)) - u[0] * v[0];
}

void check_same_space(const Point& x, const Point& y, const char* op) {
  if (!(x.space == y.space))
    throw InvalidArgument(std::string(op) + ": points in different spaces");
}

int spider_dir_leg(const Vector& dir) { return static_cast<int>(dir[0]); }
double spider_dir_sign(const Vector& dir) { return dir[1]; }

}  // namespace

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::euclidean: return "euclidean";
    case SpaceKind::sphere: return "sphere";
    case SpaceKind::hyperbolic: return "hyperbolic";
    case SpaceKind::spider: return "spider";
  }
  return "?";
}

SpaceKind space_kind_from_string(const std::string& s) {
  if (s == "euclidean") return SpaceKind::euclidean;
  if (s == "sphere") return SpaceKind::sphere;
  if (s == "hyperbolic") return SpaceKind::hyperbolic;
  if (s == "spider") return SpaceKind::spider;
  throw InvalidArgument("unknown space kind: " + s);
}

SpaceDescriptor SpaceDescriptor::Euclidean(int dim) {
  if (dim < 1) throw InvalidArgument("euclidean: dimension must be >= 1");
  return {SpaceKind::euclidean, dim, 0.0};
}

SpaceDescriptor SpaceDescriptor::Sphere(int dim, double kappa) {
  if (dim < 1) throw InvalidArgument("sphere: dimension must be >= 1");
  if (!(kappa > 0.0)) throw InvalidArgument("sphere: kappa must be > 0");
  return {SpaceKind::sphere, dim, kappa};
}

SpaceDescriptor SpaceDescriptor::Hyperbolic(int dim, double kappa) {
  if (dim < 1) throw InvalidArgument("hyperbolic: dimension must be >= 1");
  if (!(kappa < 0.0)) throw InvalidArgument("hyperbolic: kappa must be < 0");
  return {SpaceKind::hyperbolic, dim, kappa};
}

SpaceDescriptor SpaceDescriptor::Spider(int legs) {
  if (legs < 3) throw InvalidArgument("spider: need at least 3 legs");
  return {SpaceKind::spider, legs, 0.0};
}

BoundSide SpaceDescriptor::bound_side() const {
  return kind == SpaceKind::spider ? BoundSide::upper : BoundSide::both;
}

int SpaceDescriptor::ambient_dim() const {
  switch (kind) {
    case SpaceKind::euclidean: return dimension;
    case SpaceKind::sphere:
    case SpaceKind::hyperbolic: return dimension + 1;
    case SpaceKind::spider: return 2;
  }
  return 0;
}

double SpaceDescriptor::radius() const {
  return 1.0 / std::sqrt(std::abs(kappa));
}

Point::Point(SpaceDescriptor s, Vector coords) : space(s), x(std::move(coords)) {
  if (x.size() != space.ambient_dim())
    throw InvalidArgument("point: coordinate size does not match the space");
  switch (space.kind) {
    case SpaceKind::euclidean:
      break;
    case SpaceKind::sphere: {
      const double r = space.radius();
      const double n = x.norm();
      if (std::abs(n - r) > 1e-6 * std::max(1.0, r))
        throw InvalidArgument("sphere point: too far from the sphere");
      x *= r / n;
      break;
    }
    case SpaceKind::hyperbolic: {
      const double r = space.radius();
      const double q = -mink(x, x);
      if (q <= 0.0 || x[0] <= 0.0 ||
          std::abs(q - r * r) > 1e-6 * std::max(1.0, r * r))
        throw InvalidArgument("hyperbolic point: not on the hyperboloid sheet");
      x *= r / std::sqrt(q);
      break;
    }
    case SpaceKind::spider: {
      const int leg = static_cast<int>(x[0]);
      if (leg != x[0] || leg < 0 || leg >= space.dimension)
        throw InvalidArgument("spider point: bad leg index");
      if (x[1] < 0.0) throw InvalidArgument("spider point: negative leg position");
      if (x[1] == 0.0) x[0] = 0.0;  // canonical branch representation
      break;
    }
  }
}

TangentVector::TangentVector(Point b, Vector d, double m)
    : base(std::move(b)), dir(std::move(d)), mag(m) {
  if (mag < 0.0) throw InvalidArgument("tangent vector: negative magnitude");
  if (mag == 0.0) return;
  switch (base.space.kind) {
    case SpaceKind::euclidean: {
      const double n = dir.norm();
      if (std::abs(n - 1.0) > 1e-6)
        throw InvalidArgument("tangent vector: direction not unit");
      dir /= n;
      break;
    }
    case SpaceKind::sphere: {
      // project out the radial component, then renormalize
      dir -= (dir.dot(base.x) / base.x.squaredNorm()) * base.x;
      const double n = dir.norm();
      if (n < 1e-8) throw InvalidArgument("tangent vector: degenerate direction");
      dir /= n;
      break;
    }
    case SpaceKind::hyperbolic: {
      const double r2 = base.space.radius() * base.space.radius();
      dir += (mink(dir, base.x) / r2) * base.x;
      const double q = mink(dir, dir);
      if (q < 1e-16) throw InvalidArgument("tangent vector: degenerate direction");
      dir /= std::sqrt(q);
      break;
    }
    case SpaceKind::spider: {
      if (dir.size() != 2) throw InvalidArgument("spider tangent: need (leg, sign)");
      const int leg = spider_dir_leg(dir);
      const double s = spider_dir_sign(dir);
      if (leg != dir[0] || leg < 0 || leg >= base.space.dimension)
        throw InvalidArgument("spider tangent: bad continuation leg");
      if (s != 1.0 && s != -1.0)
        throw InvalidArgument("spider tangent: sign must be +-1");
      if (base.at_branch() && s != 1.0)
        throw InvalidArgument("spider tangent: at the branch the direction is a leg");
      if (!base.at_branch() && s == 1.0 && leg != base.leg())
        throw InvalidArgument("spider tangent: outward direction must stay on the leg");
      if (!base.at_branch() && s == -1.0 && leg == base.leg() &&
          mag > base.leg_pos() + 1e-12)
        throw InvalidArgument("spider tangent: inward direction cannot return to the leg");
      break;
    }
  }
}

TangentVector TangentVector::Origin(Point base) {
  TangentVector v;
  v.base = std::move(base);
  v.dir = Vector::Zero(v.base.space.kind == SpaceKind::spider
                           ? 2
                           : v.base.space.ambient_dim());
  v.mag = 0.0;
  return v;
}

GeodesicBall::GeodesicBall(Point c, double r) : center(std::move(c)), radius(r) {
  if (!(r > 0.0)) throw InvalidArgument("geodesic ball: radius must be positive");
}

void GeodesicBall::require_valid_for_upper() const {
  if (center.space.kind == SpaceKind::sphere) {
    const double kappa = center.space.kappa;
    if (!(diameter() < kPi / (2.0 * std::sqrt(kappa))))
      throw InvalidArgument(
          "geodesic ball: diameter must be < pi/(2 sqrt(kappa)) for upper-bound use");
  }
}

bool same_space(const Point& x, const Point& y) { return x.space == y.space; }

double distance(const Point& x, const Point& y) {
  check_same_space(x, y, "distance");
  switch (x.space.kind) {
    case SpaceKind::euclidean:
      return (x.x - y.x).norm();
    case SpaceKind::sphere: {
      const double r = x.space.radius();
      const double h = std::min(1.0, (x.x - y.x).norm() / (2.0 * r));
      return 2.0 * r * std::asin(h);
    }
    case SpaceKind::hyperbolic: {
      const double r = x.space.radius();
      const Vector d = x.x - y.x;
      const double q = std::max(0.0, mink(d, d));
      return 2.0 * r * std::asinh(std::sqrt(q) / (2.0 * r));
    }
    case SpaceKind::spider: {
      if (x.leg() == y.leg()) return std::abs(x.leg_pos() - y.leg_pos());
      return x.leg_pos() + y.leg_pos();
    }
  }
  return 0.0;
}

Point geodesic_point(const Point& x, const Point& y, double t) {
  check_same_space(x, y, "geodesic_point");
  if (t < 0.0 || t > 1.0) throw InvalidArgument("geodesic_point: t outside [0,1]");
  switch (x.space.kind) {
    case SpaceKind::euclidean:
      return Point(x.space, (1.0 - t) * x.x + t * y.x);
    case SpaceKind::sphere: {
      const double r = x.space.radius();
      const double theta = distance(x, y) / r;
      if (theta > kPi - kAntipodalTol)
        throw NonUniqueGeodesic("geodesic_point: antipodal sphere points");
      if (theta < 1e-15) return x;
      const double s = std::sin(theta);
      return Point(x.space,
                   (std::sin((1.0 - t) * theta) * x.x + std::sin(t * theta) * y.x) / s);
    }
    case SpaceKind::hyperbolic: {
      const double r = x.space.radius();
      const double theta = distance(x, y) / r;
      if (theta < 1e-15) return x;
      const double s = std::sinh(theta);
      return Point(x.space,
                   (std::sinh((1.0 - t) * theta) * x.x + std::sinh(t * theta) * y.x) / s);
    }
    case SpaceKind::spider: {
      if (x.leg() == y.leg()) {
        return Point(x.space,
                     (Vector(2) << x.leg(),
                      (1.0 - t) * x.leg_pos() + t * y.leg_pos()).finished());
      }
      const double total = x.leg_pos() + y.leg_pos();
      const double s = t * total;
      if (s <= x.leg_pos())
        return Point(x.space, (Vector(2) << x.leg(), x.leg_pos() - s).finished());
      return Point(x.space, (Vector(2) << y.leg(), s - x.leg_pos()).finished());
    }
  }
  throw InvalidArgument("geodesic_point: unreachable");
}

TangentVector log_map(const Point& x, const Point& y) {
  check_same_space(x, y, "log_map");
  const double d = distance(x, y);
  if (d < 1e-15) return TangentVector::Origin(x);
  switch (x.space.kind) {
    case SpaceKind::euclidean:
      return TangentVector(x, (y.x - x.x) / d, d);
    case SpaceKind::sphere: {
      const double r = x.space.radius();
      if (d / r > kPi - kAntipodalTol)
        throw NonUniqueGeodesic("log_map: antipodal sphere points");
      Vector w = y.x - (x.x.dot(y.x) / (r * r)) * x.x;
      const double n = w.norm();
      if (n < 1e-15) throw NonUniqueGeodesic("log_map: antipodal sphere points");
      return TangentVector(x, w / n, d);
    }
    case SpaceKind::hyperbolic: {
      const double r2 = x.space.radius() * x.space.radius();
      Vector w = y.x + (mink(x.x, y.x) / r2) * x.x;
      w /= std::sqrt(mink(w, w));
      return TangentVector(x, w, d);
    }
    case SpaceKind::spider: {
      Vector dir(2);
      if (x.at_branch()) {
        dir << y.leg(), 1.0;
      } else if (x.leg() == y.leg()) {
        dir << x.leg(), (y.leg_pos() > x.leg_pos() ? 1.0 : -1.0);
      } else {
        dir << y.leg(), -1.0;
      }
      return TangentVector(x, dir, d);
    }
  }
  throw InvalidArgument("log_map: unreachable");
}

Point exp_map(const TangentVector& v) {
  const Point& x = v.base;
  if (v.mag == 0.0) return x;
  switch (x.space.kind) {
    case SpaceKind::euclidean:
      return Point(x.space, x.x + v.mag * v.dir);
    case SpaceKind::sphere: {
      const double r = x.space.radius();
      const double theta = v.mag / r;
      return Point(x.space, std::cos(theta) * x.x + std::sin(theta) * r * v.dir);
    }
    case SpaceKind::hyperbolic: {
      const double r = x.space.radius();
      const double theta = v.mag / r;
      return Point(x.space, std::cosh(theta) * x.x + std::sinh(theta) * r * v.dir);
    }
    case SpaceKind::spider: {
      const int leg = spider_dir_leg(v.dir);
      const double sign = spider_dir_sign(v.dir);
      if (x.at_branch())
        return Point(x.space, (Vector(2) << leg, v.mag).finished());
      if (sign > 0.0)
        return Point(x.space, (Vector(2) << x.leg(), x.leg_pos() + v.mag).finished());
      if (v.mag <= x.leg_pos())
        return Point(x.space, (Vector(2) << x.leg(), x.leg_pos() - v.mag).finished());
      return Point(x.space, (Vector(2) << leg, v.mag - x.leg_pos()).finished());
    }
  }
  throw InvalidArgument("exp_map: unreachable");
}

Point exp_map(const Point& base, const Vector& dir, double mag) {
  return exp_map(TangentVector(base, dir, mag));
}

Point grad_exp(const TangentVector& v) {
  const Point& x = v.base;
  if (!x.space.has_lower_bound())
    throw UnsupportedSpace("grad_exp: space has no lower curvature bound");
  if (x.space.kind == SpaceKind::sphere) {
    const double r = x.space.radius();
    // beyond the antipode the gradient of d_x^2 vanishes; the flow parks there
    const double theta = std::min(v.mag / r, kPi);
    return exp_map(TangentVector(x, v.dir, theta * r));
  }
  return exp_map(v);
}

double inner_product(const TangentVector& u, const TangentVector& v) {
  if (!(u.base.space == v.base.space) || (u.base.x - v.base.x).norm() > 1e-9)
    throw InvalidArgument("inner_product: tangent vectors at different base points");
  if (u.mag == 0.0 || v.mag == 0.0) return 0.0;
  double cosang = 0.0;
  switch (u.base.space.kind) {
    case SpaceKind::euclidean:
    case SpaceKind::sphere:
      cosang = u.dir.dot(v.dir);
      break;
    case SpaceKind::hyperbolic:
      cosang = mink(u.dir, v.dir);
      break;
    case SpaceKind::spider: {
      if (u.base.at_branch()) {
        cosang = spider_dir_leg(u.dir) == spider_dir_leg(v.dir) ? 1.0 : -1.0;
      } else {
        cosang = spider_dir_sign(u.dir) * spider_dir_sign(v.dir);
      }
      break;
    }
  }
  cosang = std::clamp(cosang, -1.0, 1.0);
  return u.mag * v.mag * cosang;
}

double comparison_distance(double d_xy, double d_yz, double d_zx, double t,
                           double kappa) {
  if (t < 0.0 || t > 1.0)
    throw InvalidArgument("comparison_distance: t outside [0,1]");
  if (d_xy < 0.0 || d_yz < 0.0 || d_zx < 0.0)
    throw InvalidArgument("comparison_distance: negative side");
  const double slack = 1e-12 * std::max({1.0, d_xy, d_yz, d_zx});
  if (d_xy > d_yz + d_zx + slack || d_yz > d_xy + d_zx + slack ||
      d_zx > d_xy + d_yz + slack)
    throw InvalidArgument("comparison_distance: triangle inequality violated");
  if (kappa > 0.0) {
    const double sk = std::sqrt(kappa);
    if (!((d_xy + d_yz + d_zx) * sk < 2.0 * kPi))
      throw InvalidArgument("comparison_distance: perimeter >= 2 pi / sqrt(kappa)");
  }
  if (d_yz == 0.0) return d_xy;
  if (kappa == 0.0) {
    const double px = (d_xy * d_xy + d_yz * d_yz - d_zx * d_zx) / (2.0 * d_yz);
    const double py2 = std::max(0.0, d_xy * d_xy - px * px);
    const double dx = px - t * d_yz;
    return std::sqrt(dx * dx + py2);
  }
  if (kappa > 0.0) {
    const double sk = std::sqrt(kappa);
    const double a = d_yz * sk, b = d_xy * sk, c = d_zx * sk;
    if (b == 0.0) return t * d_yz;
    double cosphi = (std::cos(c) - std::cos(a) * std::cos(b)) /
                    (std::sin(a) * std::sin(b));
    cosphi = std::clamp(cosphi, -1.0, 1.0);
    const double sinphi = std::sqrt(1.0 - cosphi * cosphi);
    const Eigen::Vector3d xt(std::cos(b), std::sin(b) * cosphi, std::sin(b) * sinphi);
    const Eigen::Vector3d mt(std::cos(t * a), std::sin(t * a), 0.0);
    const double h = std::min(1.0, (xt - mt).norm() / 2.0);
    return 2.0 * std::asin(h) / sk;
  }
  const double sk = std::sqrt(-kappa);
  const double a = d_yz * sk, b = d_xy * sk, c = d_zx * sk;
  if (b == 0.0) return t * d_yz;
  double cosphi = (std::cosh(a) * std::cosh(b) - std::cosh(c)) /
                  (std::sinh(a) * std::sinh(b));
  cosphi = std::clamp(cosphi, -1.0, 1.0);
  const double sinphi = std::sqrt(1.0 - cosphi * cosphi);
  // hyperboloid coordinates (t, u, v) with form -t^2 + u^2 + v^2
  const Eigen::Vector3d xt(std::cosh(b), std::sinh(b) * cosphi, std::sinh(b) * sinphi);
  const Eigen::Vector3d mt(std::cosh(t * a), std::sinh(t * a), 0.0);
  const Eigen::Vector3d dv = xt - mt;
  const double q = std::max(0.0, dv[1] * dv[1] + dv[2] * dv[2] - dv[0] * dv[0]);
  return 2.0 * std::asinh(std::sqrt(q) / 2.0) / sk;
}

std::vector<Vector> tangent_basis(const Point& x) {
  const SpaceDescriptor& sp = x.space;
  if (sp.kind == SpaceKind::spider)
    throw UnsupportedSpace("tangent_basis: spider has no linear tangent space");
  const int n = sp.ambient_dim();
  std::vector<Vector> basis;
  if (sp.kind == SpaceKind::euclidean) {
    for (int i = 0; i < n; ++i) basis.push_back(Vector::Unit(n, i));
    return basis;
  }
  const bool hyp = sp.kind == SpaceKind::hyperbolic;
  auto form = [&](const Vector& u, const Vector& v) {
    return hyp ? mink(u, v) : u.dot(v);
  };
  const double xx = form(x.x, x.x);  // R^2 or -R^2
  // Gram-Schmidt of the coordinate axes against x under the space's form
  for (int i = 0; i < n && static_cast<int>(basis.size()) < sp.dimension; ++i) {
    Vector v = Vector::Unit(n, i);
    v -= (form(v, x.x) / xx) * x.x;
    for (const Vector& b : basis) v -= form(v, b) * b;
    const double q = form(v, v);
    if (q < 1e-12) continue;
    basis.push_back(v / std::sqrt(q));
  }
  return basis;
}

Point project_to_ball(const Point& x, const GeodesicBall& G) {
  const double d = distance(G.center, x);
  if (d <= G.radius) return x;
  return geodesic_point(G.center, x, G.radius / d);
}

}  // namespace gradflow
