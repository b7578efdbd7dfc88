#include "gradflow/sampling.hpp"

#include <cmath>

namespace gradflow {

namespace {

TangentVector tangent_from_uniforms(const Point& x, const double* u, int dim) {
  const SpaceDescriptor& sp = x.space;
  if (sp.kind == SpaceKind::spider) {
    const int leg = std::min(sp.dimension - 1,
                             static_cast<int>(u[0] * sp.dimension));
    if (x.at_branch())
      return TangentVector(x, (Vector(2) << leg, 1.0).finished(), 1.0);
    const double sign = u[1] < 0.5 ? 1.0 : -1.0;
    const int cont = sign > 0.0 ? x.leg() : (leg == x.leg() ? (leg + 1) % sp.dimension : leg);
    return TangentVector(x, (Vector(2) << cont, sign).finished(), 1.0);
  }
  // Gaussian ambient vector via Box-Muller; the constructor projects it
  // onto the tangent space and normalizes.
  Vector dir(sp.ambient_dim());
  for (int i = 0; i < dir.size(); i += 2) {
    const double a = u[(i / 2) % dim];
    const double b = u[(i / 2 + 1) % dim];
    const double r = std::sqrt(-2.0 * std::log(std::max(a, 1e-16)));
    dir[i] = r * std::cos(2.0 * 3.14159265358979323846 * b);
    if (i + 1 < dir.size()) dir[i + 1] = r * std::sin(2.0 * 3.14159265358979323846 * b);
  }
  if (dir.norm() < 1e-12) dir[0] = 1.0;
  if (sp.kind == SpaceKind::euclidean) dir /= dir.norm();
  return TangentVector(x, dir, 1.0);
}

Point point_from_uniforms(const GeodesicBall& G, const double* u, int dim) {
  const TangentVector t = tangent_from_uniforms(G.center, u, dim - 1);
  const double r = u[dim - 1] * G.radius;
  return exp_map(G.center, t.dir, r);
}

}  // namespace

TangentVector random_unit_tangent(const Point& x, CounterRng& rng) {
  double u[6];
  for (double& v : u) v = rng.next_double();
  return tangent_from_uniforms(x, u, 5);
}

Point sample_in_ball(const GeodesicBall& G, CounterRng& rng) {
  double u[6];
  for (double& v : u) v = rng.next_double();
  return point_from_uniforms(G, u, 6);
}

Point sample_in_ball(const GeodesicBall& G, HaltonSampler& halton) {
  double u[6];
  halton.next(u, 6);
  return point_from_uniforms(G, u, 6);
}

}  // namespace gradflow
