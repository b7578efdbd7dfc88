#include <doctest.h>

#include <cmath>

#include "gradflow/oracle.hpp"
#include "gradflow/resolvent.hpp"
#include "gradflow/rng.hpp"
#include "gradflow/sampling.hpp"

using namespace gradflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

Vector vec1(double a) { return (Vector(1) << a).finished(); }
Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }
Vector vec3(double a, double b, double c) {
  return (Vector(3) << a, b, c).finished();
}

const SpaceDescriptor kLine = SpaceDescriptor::Euclidean(1);
const SpaceDescriptor kSphere = SpaceDescriptor::Sphere(2, 1.0);
const SpaceDescriptor kSpider = SpaceDescriptor::Spider(3);
const SpaceDescriptor kHyp = SpaceDescriptor::Hyperbolic(2, -1.0);

Point spider_pt(int leg, double pos) { return Point(kSpider, vec2(leg, pos)); }
}  // namespace

TEST_CASE("prox closed form on the euclidean line") {
  const GeodesicBall G(Point(kLine, vec1(0)), 10.0);
  const Point a(kLine, vec1(2.0));
  const FunctionalSpec f = FunctionalSpec::SquaredDistance(a, G);
  for (double lambda : {0.1, 0.5, 1.0, 3.0}) {
    for (double x0 : {-3.0, 0.0, 1.0, 5.0}) {
      const Point x(kLine, vec1(x0));
      const ResolventStep s = prox_upper(f, lambda, x, G);
      CHECK(s.output.x[0] ==
            doctest::Approx((x0 + 2 * lambda * 2.0) / (1 + 2 * lambda))
                .epsilon(1e-12));
      // staying put is never better
      const double d = distance(x, s.output);
      CHECK(s.f_value_out + d * d / (2 * lambda) <= s.f_value_in + 1e-8);
    }
  }
  CHECK_THROWS_AS(prox_upper(f, 0.0, a, G), InvalidArgument);
}

TEST_CASE("prox on the sphere realizes the inductive-mean fraction") {
  const GeodesicBall cap(Point(kSphere, vec3(1, 0, 0)), 0.7);
  const Point a = exp_map(cap.center, vec3(0, 1, 0), 0.5);
  const FunctionalSpec f = FunctionalSpec::SquaredDistance(a, cap);
  const Point x = exp_map(cap.center, vec3(0, 0, 1), 0.4);
  for (int k : {1, 2, 5, 20}) {
    const double lambda = 1.0 / (2.0 * k);
    const ResolventStep s = prox_upper(f, lambda, x, cap);
    const Point expect = geodesic_point(x, a, 1.0 / (k + 1));
    CHECK(distance(s.output, expect) < 1e-10);
  }
}

TEST_CASE("closed-form and iterative prox paths agree") {
  const GeodesicBall cap(Point(kSphere, vec3(1, 0, 0)), 0.7);
  const Point a = exp_map(cap.center, vec3(0, 1, 0), 0.5);
  // weighting the same atom twice forces the iterative path
  const FunctionalSpec direct = FunctionalSpec::SquaredDistance(a, cap);
  const FunctionalSpec split = FunctionalSpec::WeightedSum(
      {{a, 0.5, 2.0}, {a, 0.5, 2.0}}, cap);
  CounterRng rng(19);
  for (int i = 0; i < 25; ++i) {
    const Point x = sample_in_ball(cap, rng);
    const double lambda = 0.05 + rng.next_double();
    const Point c1 = prox_upper(direct, lambda, x, cap).output;
    const Point c2 = prox_upper(split, lambda, x, cap).output;
    CHECK(distance(c1, c2) < 1e-7);
  }
}

TEST_CASE("prox agrees with the grid oracle on every functional kind") {
  CounterRng rng(29);

  // two-anchor weighted sum on a sphere cap
  const GeodesicBall cap(Point(kSphere, vec3(1, 0, 0)), 0.6);
  const FunctionalSpec fs = FunctionalSpec::WeightedSum(
      {{exp_map(cap.center, vec3(0, 1, 0), 0.4), 0.6, 2.0},
       {exp_map(cap.center, vec3(0, 0, 1), 0.3), 0.4, 2.0}},
      cap);
  // p-mean on a hyperbolic ball
  const GeodesicBall hball(Point(kHyp, vec3(1, 0, 0)), 1.0);
  const FunctionalSpec fh = FunctionalSpec::WeightedSum(
      {{exp_map(hball.center, vec3(0, 1, 0), 0.6), 0.5, 1.0},
       {exp_map(hball.center, vec3(0, 0, 1), 0.5), 0.5, 3.0}},
      hball);
  for (const FunctionalSpec* f : {&fs, &fh}) {
    for (int i = 0; i < 4; ++i) {
      const Point x = sample_in_ball(f->region(), rng);
      const double lambda = 0.2 + rng.next_double();
      const ResolventStep s = prox_upper(*f, lambda, x, f->region());
      const auto sub = [&](const Point& y) {
        const double d = distance(x, y);
        return f->evaluate(y) + d * d / (2 * lambda);
      };
      const oracle::GridResult g = oracle::grid_minimize(sub, f->region());
      CHECK(distance(s.output, g.minimizer) < std::max(2.0 * g.resolution, 1e-4));
    }
  }
}

TEST_CASE("prox on the spider matches the grid oracle") {
  const GeodesicBall G(spider_pt(0, 0.0), 3.0);
  const FunctionalSpec f = FunctionalSpec::WeightedSum(
      {{spider_pt(0, 2.0), 0.5, 2.0}, {spider_pt(1, 1.0), 0.5, 2.0}}, G);
  CounterRng rng(31);
  for (int i = 0; i < 10; ++i) {
    const Point x = sample_in_ball(G, rng);
    const double lambda = 0.1 + rng.next_double();
    const ResolventStep s = prox_upper(f, lambda, x, G);
    const auto sub = [&](const Point& y) {
      const double d = distance(x, y);
      return f.evaluate(y) + d * d / (2 * lambda);
    };
    const oracle::GridResult g = oracle::grid_minimize(sub, G);
    CHECK(std::abs(sub(s.output) - g.value) < 1e-4);
    CHECK(distance(s.output, g.minimizer) < 1e-4);
  }
}

TEST_CASE("soft threshold for a single p=1 atom") {
  const GeodesicBall G(Point(kLine, vec1(0)), 10.0);
  const FunctionalSpec f =
      FunctionalSpec::DistancePower(Point(kLine, vec1(0)), 1.0, G);
  const Point x(kLine, vec1(3.0));
  CHECK(prox_upper(f, 1.0, x, G).output.x[0] == doctest::Approx(2.0));
  // step longer than the distance stops at the anchor
  CHECK(prox_upper(f, 5.0, x, G).output.x[0] == doctest::Approx(0.0));
}

TEST_CASE("lower resolvent step") {
  const GeodesicBall G(Point(kLine, vec1(0)), 10.0);
  const Point a(kLine, vec1(2.0));
  const FunctionalSpec f = FunctionalSpec::SquaredDistance(a, G);

  CHECK(step_lower(f, 0.7, a).displacement == 0.0);  // zero gradient

  const Point x(kLine, vec1(0.0));
  const ResolventStep s = step_lower(f, 0.5, x);
  CHECK(s.output.x[0] == doctest::Approx(2.0));  // x + 2 lambda (a - x)
  CHECK(s.displacement <= s.lambda * s.absolute_gradient + 1e-10);

  // sphere: step along the great circle toward the anchor
  const Point sx(kSphere, vec3(1, 0, 0));
  const Point sa = exp_map(sx, vec3(0, 1, 0), 0.6);
  const GeodesicBall cap(sx, 0.7);
  const FunctionalSpec g = FunctionalSpec::SquaredDistance(sa, cap);
  const double lam = 0.05;
  const ResolventStep t = step_lower(g, lam, sx);
  CHECK(distance(sx, t.output) == doctest::Approx(2 * lam * 0.6).epsilon(1e-10));
  CHECK(distance(t.output, geodesic_point(sx, sa, 2 * lam)) < 1e-10);

  CHECK_THROWS_AS(
      step_lower(FunctionalSpec::SquaredDistance(
                     spider_pt(0, 1.0), GeodesicBall(spider_pt(0, 0.0), 2.0)),
                 0.5, spider_pt(1, 0.5)),
      UnsupportedSpace);
}

TEST_CASE("per-step estimate hand values") {
  const GeodesicBall G(Point(kLine, vec1(0)), 10.0);
  const FunctionalSpec f =
      FunctionalSpec::SquaredDistance(Point(kLine, vec1(0)), G);
  const Point x(kLine, vec1(1.0));
  const Point y(kLine, vec1(0.0));

  // upper: x=1, lambda=1/2 gives J=1/2; residual 1 - 2(1/2)(1/4) - 1/4 = 1/2
  const ResolventStep su = prox_upper(f, 0.5, x, G);
  CHECK(su.output.x[0] == doctest::Approx(0.5));
  CHECK(check_estimate_upper(f, su, y) == doctest::Approx(0.5).epsilon(1e-12));
  // y = J(x): residual is the squared displacement
  CHECK(check_estimate_upper(f, su, su.output) ==
        doctest::Approx(0.25).epsilon(1e-12));

  // lower: lambda=1/4 gives J=1/2; residual 1 - (1/2)(1 - 0) - 1/4 = 1/4
  const ResolventStep sl = step_lower(f, 0.25, x);
  CHECK(sl.output.x[0] == doctest::Approx(0.5));
  CHECK(check_estimate_lower(f, sl, y, 0.0) ==
        doctest::Approx(0.25).epsilon(1e-12));

  // lambda = 0: identity step, residual exactly 0
  const ResolventStep s0 = step_lower(f, 0.0, x);
  CHECK(s0.displacement == 0.0);
  CHECK(check_estimate_lower(f, s0, y, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("per-step estimates hold on sampled instances") {
  CounterRng rng(37);

  const GeodesicBall cap(Point(kSphere, vec3(1, 0, 0)), 0.7);
  const GeodesicBall hball(Point(kHyp, vec3(1, 0, 0)), 1.0);
  const GeodesicBall sball(spider_pt(0, 0.0), 2.0);
  const GeodesicBall eball(Point(kLine, vec1(0)), 2.0);

  for (const GeodesicBall* G : {&cap, &hball, &sball, &eball}) {
    for (int i = 0; i < 250; ++i) {
      const Point anchor = sample_in_ball(*G, rng);
      const FunctionalSpec f = FunctionalSpec::SquaredDistance(anchor, *G);
      const Point x = sample_in_ball(*G, rng);
      const Point y = sample_in_ball(*G, rng);
      const double lambda = 0.05 + rng.next_double();
      const ResolventStep s = prox_upper(f, lambda, x, *G);
      CHECK(check_estimate_upper(f, s, y) >= -1e-7);
    }
  }

  // lower estimate with the concavity constant of each region
  for (const GeodesicBall* G : {&hball, &cap, &eball}) {
    const double k =
        squared_distance_concavity(G->center.space, G->diameter());
    for (int i = 0; i < 250; ++i) {
      const Point anchor = sample_in_ball(*G, rng);
      const FunctionalSpec f = FunctionalSpec::SquaredDistance(anchor, *G);
      const Point x = sample_in_ball(*G, rng);
      const Point y = sample_in_ball(*G, rng);
      const double lambda = 0.05 + 0.2 * rng.next_double();
      const ResolventStep s = step_lower(f, lambda, x);
      CHECK(check_estimate_lower(f, s, y, k) >= -1e-7);
    }
  }
}

TEST_CASE("optimality condition at the prox output") {
  // D f(w) - <log to x, w>/lambda >= 0 for unit directions w at the output
  const GeodesicBall cap(Point(kSphere, vec3(1, 0, 0)), 0.6);
  const FunctionalSpec f = FunctionalSpec::WeightedSum(
      {{exp_map(cap.center, vec3(0, 1, 0), 0.4), 0.5, 2.0},
       {exp_map(cap.center, vec3(0, 0, 1), 0.35), 0.5, 2.0}},
      cap);
  CounterRng rng(53);
  for (int i = 0; i < 20; ++i) {
    const Point x = sample_in_ball(cap, rng);
    const double lambda = 0.1 + rng.next_double();
    const ResolventStep s = prox_upper(f, lambda, x, cap);
    if (distance(cap.center, s.output) > cap.radius - 1e-6) continue;
    for (int j = 0; j < 20; ++j) {
      const TangentVector w = random_unit_tangent(s.output, rng);
      const double slope =
          directional_derivative(f, w) -
          (distance(s.output, x) > 1e-12
               ? inner_product(log_map(s.output, x), w) / lambda
               : 0.0);
      CHECK(slope >= -1e-5);
    }
  }
}

TEST_CASE("minimize_on_ball reaches the grid minimum") {
  const GeodesicBall cap(Point(kSphere, vec3(1, 0, 0)), 0.6);
  const FunctionalSpec f = FunctionalSpec::WeightedSum(
      {{exp_map(cap.center, vec3(0, 1, 0), 0.4), 0.5, 2.0},
       {exp_map(cap.center, vec3(0, -1, 0), 0.4), 0.5, 2.0}},
      cap);
  const Point m = minimize_on_ball(f, cap, cap.center);
  CHECK(distance(m, cap.center) < 1e-9);  // symmetric pair: center is optimal
}
