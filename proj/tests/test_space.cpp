#include <doctest.h>

#include <cmath>

#include "gradflow/oracle.hpp"
#include "gradflow/rng.hpp"
#include "gradflow/sampling.hpp"
#include "gradflow/space.hpp"

using namespace gradflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }
Vector vec3(double a, double b, double c) {
  return (Vector(3) << a, b, c).finished();
}

const SpaceDescriptor kSphere = SpaceDescriptor::Sphere(2, 1.0);
const SpaceDescriptor kHyp = SpaceDescriptor::Hyperbolic(2, -1.0);
const SpaceDescriptor kEuclid2 = SpaceDescriptor::Euclidean(2);
const SpaceDescriptor kSpider = SpaceDescriptor::Spider(3);

Point spider_pt(int leg, double pos) { return Point(kSpider, vec2(leg, pos)); }
}  // namespace

TEST_CASE("space descriptors validate their parameters") {
  CHECK_THROWS_AS(SpaceDescriptor::Euclidean(0), InvalidArgument);
  CHECK_THROWS_AS(SpaceDescriptor::Sphere(2, 0.0), InvalidArgument);
  CHECK_THROWS_AS(SpaceDescriptor::Hyperbolic(2, 1.0), InvalidArgument);
  CHECK_THROWS_AS(SpaceDescriptor::Spider(2), InvalidArgument);
  CHECK(kSphere.bound_side() == BoundSide::both);
  CHECK(kSpider.bound_side() == BoundSide::upper);
  CHECK(!kSpider.has_lower_bound());
}

TEST_CASE("distance closed forms") {
  CHECK(distance(Point(kSphere, vec3(1, 0, 0)), Point(kSphere, vec3(0, 1, 0))) ==
        doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(distance(spider_pt(0, 1.0), spider_pt(1, 2.0)) == doctest::Approx(3.0));
  CHECK(distance(spider_pt(0, 1.0), spider_pt(0, 2.5)) == doctest::Approx(1.5));
  CHECK_THROWS_AS(
      distance(Point(kEuclid2, vec2(0, 0)), Point(kSphere, vec3(1, 0, 0))),
      InvalidArgument);
}

TEST_CASE("distance is a metric on sampled points") {
  for (const SpaceDescriptor& sp : {kSphere, kHyp, kEuclid2, kSpider}) {
    Point c;
    if (sp.kind == SpaceKind::sphere) c = Point(sp, vec3(1, 0, 0));
    else if (sp.kind == SpaceKind::hyperbolic) c = Point(sp, vec3(1, 0, 0));
    else if (sp.kind == SpaceKind::euclidean) c = Point(sp, vec2(0, 0));
    else c = spider_pt(0, 0.0);
    GeodesicBall G(c, sp.kind == SpaceKind::sphere ? 0.7 : 1.5);
    CounterRng rng(7);
    for (int i = 0; i < 200; ++i) {
      const Point x = sample_in_ball(G, rng);
      const Point y = sample_in_ball(G, rng);
      const Point z = sample_in_ball(G, rng);
      const double dxy = distance(x, y);
      CHECK(dxy == doctest::Approx(distance(y, x)).epsilon(1e-12));
      CHECK(distance(x, x) == doctest::Approx(0.0));
      CHECK(dxy <= distance(x, z) + distance(z, y) + 1e-10);
    }
  }
}

TEST_CASE("geodesic_point endpoints and frozen values") {
  const Point x(kSphere, vec3(1, 0, 0));
  const Point y(kSphere, vec3(0, 1, 0));
  const Point mid = geodesic_point(x, y, 0.5);
  CHECK(mid.x[0] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(mid.x[1] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(mid.x[2] == doctest::Approx(0.0));

  const Point a(kEuclid2, vec2(1, 2));
  const Point b(kEuclid2, vec2(3, -4));
  const Point e = geodesic_point(a, b, 0.25);
  CHECK(e.x[0] == doctest::Approx(1.5));
  CHECK(e.x[1] == doctest::Approx(0.5));

  CHECK(geodesic_point(spider_pt(0, 1.0), spider_pt(1, 1.0), 0.5).at_branch());

  CHECK(distance(geodesic_point(x, y, 0.0), x) == doctest::Approx(0.0));
  CHECK(distance(geodesic_point(x, y, 1.0), y) == doctest::Approx(0.0));
  CHECK_THROWS_AS(
      geodesic_point(x, Point(kSphere, vec3(-1, 0, 0)), 0.5),
      NonUniqueGeodesic);
}

TEST_CASE("geodesic_point reparametrization property") {
  CounterRng rng(11);
  for (const SpaceDescriptor& sp : {kSphere, kHyp, kEuclid2, kSpider}) {
    Point c = sp.kind == SpaceKind::spider ? spider_pt(0, 0.5)
              : sp.kind == SpaceKind::euclidean ? Point(sp, vec2(0, 0))
                                                : Point(sp, vec3(1, 0, 0));
    GeodesicBall G(c, sp.kind == SpaceKind::sphere ? 0.7 : 1.2);
    for (int i = 0; i < 100; ++i) {
      const Point x = sample_in_ball(G, rng);
      const Point y = sample_in_ball(G, rng);
      const double d = distance(x, y);
      const double s = rng.next_double(), t = rng.next_double();
      const double dd =
          distance(geodesic_point(x, y, s), geodesic_point(x, y, t));
      CHECK(dd == doctest::Approx(std::abs(s - t) * d).epsilon(1e-10));
    }
  }
}

TEST_CASE("log_map frozen values and exp round trip") {
  const Point x(kSphere, vec3(1, 0, 0));
  const Point y(kSphere, vec3(0, 1, 0));
  const TangentVector v = log_map(x, y);
  CHECK(v.mag == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(v.dir[0] == doctest::Approx(0.0));
  CHECK(v.dir[1] == doctest::Approx(1.0));

  CHECK(log_map(x, x).mag == 0.0);

  const Point a(kEuclid2, vec2(1, 1));
  const Point b(kEuclid2, vec2(4, 5));
  const TangentVector w = log_map(a, b);
  CHECK(w.mag == doctest::Approx(5.0));
  CHECK(w.dir[0] == doctest::Approx(0.6));
  CHECK(w.dir[1] == doctest::Approx(0.8));

  CounterRng rng(3);
  for (const SpaceDescriptor& sp : {kSphere, kHyp, kEuclid2, kSpider}) {
    Point c = sp.kind == SpaceKind::spider ? spider_pt(1, 0.5)
              : sp.kind == SpaceKind::euclidean ? Point(sp, vec2(0.2, -0.1))
                                                : Point(sp, vec3(1, 0, 0));
    GeodesicBall G(c, sp.kind == SpaceKind::sphere ? 0.7 : 1.2);
    for (int i = 0; i < 200; ++i) {
      const Point p = sample_in_ball(G, rng);
      const Point q = sample_in_ball(G, rng);
      const Point back = exp_map(log_map(p, q));
      CHECK(distance(back, q) < 1e-10);
    }
  }
}

TEST_CASE("exp_map frozen values") {
  const Point x(kSphere, vec3(1, 0, 0));
  const Point out = exp_map(x, vec3(0, 1, 0), kPi / 2);
  CHECK(out.x[0] == doctest::Approx(0.0));
  CHECK(out.x[1] == doctest::Approx(1.0));

  // hyperbolic: distance round trip at several magnitudes
  const Point v0(kHyp, vec3(1, 0, 0));
  for (double s : {0.1, 0.5, 1.3, 2.0}) {
    const Point p = exp_map(v0, vec3(0, 1, 0), s);
    CHECK(distance(v0, p) == doctest::Approx(s).epsilon(1e-12));
  }

  // spider: crossing the branch continues on the stated leg
  const Point sp = spider_pt(0, 1.0);
  const Point crossed = exp_map(TangentVector(sp, vec2(2, -1.0), 1.75));
  CHECK(crossed.leg() == 2);
  CHECK(crossed.leg_pos() == doctest::Approx(0.75));
}

TEST_CASE("grad_exp clamps at the sphere antipode and contracts") {
  const Point x(kSphere, vec3(1, 0, 0));
  const Point anti = grad_exp(TangentVector(x, vec3(0, 1, 0), 4.0));
  CHECK(anti.x[0] == doctest::Approx(-1.0).epsilon(1e-12));

  const Point unit = grad_exp(TangentVector(x, vec3(0, 1, 0), 1.0));
  CHECK(distance(x, unit) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(grad_exp(TangentVector(spider_pt(0, 1.0), vec2(0, 1.0), 0.5)),
                  UnsupportedSpace);

  CounterRng rng(5);
  for (const SpaceDescriptor& spd : {kSphere, kHyp, kEuclid2}) {
    Point base = spd.kind == SpaceKind::euclidean ? Point(spd, vec2(0, 0))
                                                  : Point(spd, vec3(1, 0, 0));
    for (int i = 0; i < 200; ++i) {
      TangentVector dir = random_unit_tangent(base, rng);
      const double mag = 5.0 * rng.next_double();
      const Point out = grad_exp(TangentVector(base, dir.dir, mag));
      CHECK(distance(base, out) <= mag + 1e-10);
    }
  }
}

TEST_CASE("inner_product frozen values") {
  const Point x(kSphere, vec3(1, 0, 0));
  const TangentVector u(x, vec3(0, 1, 0), 2.0);
  CHECK(inner_product(u, u) == doctest::Approx(4.0));
  CHECK(inner_product(u, TangentVector::Origin(x)) == 0.0);

  // different legs seen from the branch point: angle pi
  const Point branch = spider_pt(0, 0.0);
  const TangentVector s(branch, vec2(0, 1.0), 2.0);
  const TangentVector t(branch, vec2(1, 1.0), 3.0);
  CHECK(inner_product(s, t) == doctest::Approx(-6.0));
  CHECK(inner_product(s, s) == doctest::Approx(4.0));

  const TangentVector w(x, vec3(0, 0, 1), 3.0);
  CHECK(std::abs(inner_product(u, w)) <= 2.0 * 3.0 + 1e-12);
  CHECK(inner_product(u, w) == doctest::Approx(0.0));
}

TEST_CASE("comparison_distance frozen values") {
  CHECK(comparison_distance(1, 1, 1, 0.5, 0.0) ==
        doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
  for (double kappa : {-1.0, 0.0, 1.0})
    CHECK(comparison_distance(0.8, 0.9, 0.7, 0.0, kappa) ==
          doctest::Approx(0.8).epsilon(1e-12));
  CHECK(comparison_distance(kPi / 2, kPi / 2, kPi / 2, 0.5, 1.0) ==
        doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK_THROWS_AS(comparison_distance(3, 1, 1, 0.5, 0.0), InvalidArgument);
  CHECK_THROWS_AS(comparison_distance(2.5, 2.5, 2.0, 0.5, 1.0), InvalidArgument);
}

TEST_CASE("constant-curvature spaces meet the comparison equality") {
  // sphere and hyperbolic: d(x, y#_t z) equals the model value at their kappa
  CounterRng rng(13);
  for (const SpaceDescriptor& sp : {kSphere, kHyp, kEuclid2}) {
    Point c = sp.kind == SpaceKind::euclidean ? Point(sp, vec2(0, 0))
                                              : Point(sp, vec3(1, 0, 0));
    GeodesicBall G(c, sp.kind == SpaceKind::sphere ? 0.7 : 1.0);
    for (int i = 0; i < 300; ++i) {
      const Point x = sample_in_ball(G, rng);
      const Point y = sample_in_ball(G, rng);
      const Point z = sample_in_ball(G, rng);
      const double t = rng.next_double();
      const double actual = distance(x, geodesic_point(y, z, t));
      const double model = comparison_distance(
          distance(x, y), distance(y, z), distance(z, x), t, sp.kappa);
      CHECK(actual == doctest::Approx(model).epsilon(1e-9));
    }
  }
}

TEST_CASE("spider satisfies the upper bound at 0 and breaks every lower bound") {
  // triple through the branch: the midpoint of y,z is the branch point, and
  // x on a third leg is closer to it than the flat comparison allows
  const Point x = spider_pt(2, 1.0);
  const Point y = spider_pt(0, 1.0);
  const Point z = spider_pt(1, 1.0);
  const double actual = distance(x, geodesic_point(y, z, 0.5));
  const double model =
      comparison_distance(distance(x, y), distance(y, z), distance(z, x), 0.5, 0.0);
  CHECK(actual < model - 0.5);  // strict violation of the lower bound
  CHECK(actual <= model + 1e-12);

  CounterRng rng(17);
  GeodesicBall G(spider_pt(0, 0.0), 2.0);
  for (int i = 0; i < 500; ++i) {
    const Point a = sample_in_ball(G, rng);
    const Point b = sample_in_ball(G, rng);
    const Point c = sample_in_ball(G, rng);
    const double t = rng.next_double();
    const double d_actual = distance(a, geodesic_point(b, c, t));
    const double d_model = comparison_distance(
        distance(a, b), distance(b, c), distance(c, a), t, 0.0);
    CHECK(d_actual <= d_model + 1e-10);
  }
}

TEST_CASE("project_to_ball") {
  const Point c(kEuclid2, vec2(0, 0));
  GeodesicBall G(c, 1.0);
  const Point inside(kEuclid2, vec2(0.3, 0.4));
  CHECK(distance(project_to_ball(inside, G), inside) == 0.0);
  const Point out = project_to_ball(Point(kEuclid2, vec2(2, 0)), G);
  CHECK(out.x[0] == doctest::Approx(1.0));
  CHECK(out.x[1] == doctest::Approx(0.0));

  const Point sc(kSphere, vec3(1, 0, 0));
  GeodesicBall SG(sc, kPi / 8);
  const Point sp = project_to_ball(Point(kSphere, vec3(0, 1, 0)), SG);
  CHECK(distance(sc, sp) == doctest::Approx(kPi / 8).epsilon(1e-12));
  const Point expect = geodesic_point(sc, Point(kSphere, vec3(0, 1, 0)),
                                      (kPi / 8) / (kPi / 2));
  CHECK(distance(sp, expect) < 1e-12);
}

TEST_CASE("ball validity for upper-bound use") {
  const Point sc(kSphere, vec3(1, 0, 0));
  CHECK_NOTHROW(GeodesicBall(sc, 0.7).require_valid_for_upper());
  CHECK_THROWS_AS(GeodesicBall(sc, 0.8).require_valid_for_upper(),
                  InvalidArgument);
  CHECK_THROWS_AS(GeodesicBall(sc, -1.0), InvalidArgument);
}

TEST_CASE("first variation of the distance matches the log map") {
  // (d(exp_x(eps w), y) - d(x, y))/eps -> -<w, log_x y>/d(x, y)
  CounterRng rng(23);
  for (const SpaceDescriptor& sp : {kSphere, kHyp, kEuclid2}) {
    Point c = sp.kind == SpaceKind::euclidean ? Point(sp, vec2(0, 0))
                                              : Point(sp, vec3(1, 0, 0));
    GeodesicBall G(c, sp.kind == SpaceKind::sphere ? 0.7 : 1.0);
    for (int i = 0; i < 40; ++i) {
      const Point x = sample_in_ball(G, rng);
      const Point y = sample_in_ball(G, rng);
      const double d = distance(x, y);
      if (d < 1e-3) continue;
      const TangentVector w = random_unit_tangent(x, rng);
      const double fd = oracle::fd_directional(
          [&](const Point& p) { return distance(p, y); }, w);
      const double expected = -inner_product(w, log_map(x, y)) / d;
      CHECK(fd == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("tangent basis is orthonormal and tangent") {
  const Point s(kSphere, vec3(0.6, 0.8, 0.0));
  const auto basis = tangent_basis(s);
  REQUIRE(basis.size() == 2);
  for (const auto& b : basis) {
    CHECK(std::abs(b.dot(s.x)) < 1e-10);
    CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(std::abs(basis[0].dot(basis[1])) < 1e-10);
  CHECK_THROWS_AS(tangent_basis(spider_pt(0, 1.0)), UnsupportedSpace);
}
