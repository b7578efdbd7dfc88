#include "gradflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gradflow/rng.hpp"
#include "gradflow/sampling.hpp"

namespace gradflow {
namespace oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string coords_to_string(const Point& p) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < p.x.size(); ++i) os << (i ? "," : "") << p.x[i];
  os << "]";
  return os.str();
}

// Evaluate f over a geodesic-polar grid of the ball B(center, radius) and
// keep the best cell. Ties broken by evaluation order, so the result does
// not depend on any parallel schedule.
void polar_scan(const std::function<double(const Point&)>& f, const Point& center,
                double radius, int per_dim, GridResult* best) {
  const SpaceDescriptor& sp = center.space;
  auto consider = [&](const Point& p) {
    const double v = f(p);
    if (v < best->value) {
      best->value = v;
      best->minimizer = p;
    }
  };
  if (sp.kind == SpaceKind::spider) {
    consider(Point(sp, (Vector(2) << 0, 0.0).finished()));
    for (int leg = 0; leg < sp.dimension; ++leg) {
      // leg coordinates reachable within the ball
      double lo = 0.0, hi = 0.0;
      const double cp = center.leg_pos();
      if (!center.at_branch() && center.leg() == leg) {
        lo = std::max(0.0, cp - radius);
        hi = cp + radius;
      } else if (radius >= cp) {
        hi = radius - cp;
      } else {
        continue;
      }
      for (int i = 0; i <= per_dim; ++i) {
        const double s = lo + (hi - lo) * i / per_dim;
        consider(Point(sp, (Vector(2) << leg, s).finished()));
      }
    }
    return;
  }
  const int dim = sp.dimension;
  const std::vector<Vector> basis = tangent_basis(center);
  consider(center);
  if (dim == 1) {
    for (int i = 1; i <= per_dim; ++i) {
      const double r = radius * i / per_dim;
      consider(exp_map(center, basis[0], r));
      consider(exp_map(center, -basis[0], r));
    }
    return;
  }
  if (dim == 2) {
    const int n_r = per_dim, n_th = 2 * per_dim;
    for (int i = 1; i <= n_r; ++i) {
      const double r = radius * i / n_r;
      for (int j = 0; j < n_th; ++j) {
        const double th = 2.0 * kPi * j / n_th;
        const Vector dir = std::cos(th) * basis[0] + std::sin(th) * basis[1];
        consider(exp_map(center, dir, r));
      }
    }
    return;
  }
  // dim 3: radius x polar x azimuth
  const int n_r = per_dim, n_ph = per_dim, n_th = 2 * per_dim;
  for (int i = 1; i <= n_r; ++i) {
    const double r = radius * i / n_r;
    for (int p = 0; p <= n_ph; ++p) {
      const double phi = kPi * p / n_ph;
      for (int j = 0; j < n_th; ++j) {
        const double th = 2.0 * kPi * j / n_th;
        const Vector dir = std::sin(phi) * (std::cos(th) * basis[0] +
                                            std::sin(th) * basis[1]) +
                           std::cos(phi) * basis[2];
        consider(exp_map(center, dir, r));
        if (p == 0 || p == n_ph) break;  // poles are direction-independent
      }
    }
  }
}

}  // namespace

GridResult grid_minimize(const std::function<double(const Point&)>& f,
                         const GeodesicBall& G, int points_per_dim) {
  const SpaceDescriptor& sp = G.center.space;
  if (sp.kind != SpaceKind::spider && sp.dimension > 3)
    throw UnsupportedSpace("grid_minimize: dense grids only up to dimension 3");
  int per_dim = points_per_dim;
  if (per_dim <= 0)
    per_dim = (sp.kind != SpaceKind::spider && sp.dimension == 3) ? 61 : 201;

  // candidates outside G are rejected rather than projected
  auto fg = [&](const Point& p) {
    return distance(G.center, p) <= G.radius + 1e-12
               ? f(p)
               : std::numeric_limits<double>::infinity();
  };

  GridResult best;
  best.minimizer = G.center;
  best.value = std::numeric_limits<double>::infinity();
  polar_scan(fg, G.center, G.radius, per_dim, &best);
  double spacing = G.radius / per_dim;

  // local refinement: re-grid a shrinking ball around the incumbent
  for (int pass = 0; pass < 5; ++pass) {
    const double local_r = 2.0 * spacing;
    polar_scan(fg, best.minimizer, local_r, 24, &best);
    spacing = local_r / 24;
  }
  best.resolution = G.radius / per_dim;
  best.value = f(best.minimizer);
  return best;
}

GridResult grid_minimize(const FunctionalSpec& f, const GeodesicBall& G,
                         int points_per_dim) {
  return grid_minimize([&f](const Point& p) { return f.evaluate(p); }, G,
                       points_per_dim);
}

double fd_directional(const std::function<double(const Point&)>& f,
                      const TangentVector& v) {
  if (v.mag == 0.0) return 0.0;
  const double f0 = f(v.base);
  constexpr int levels = 5;
  double table[levels][levels];
  double eps = 1e-3;
  for (int i = 0; i < levels; ++i, eps *= 0.5) {
    const Point p = exp_map(v.base, v.dir, eps);
    table[i][0] = (f(p) - f0) / eps;
    for (int j = 1; j <= i; ++j) {
      const double w = std::pow(2.0, j);
      table[i][j] = (w * table[i][j - 1] - table[i - 1][j - 1]) / (w - 1.0);
    }
  }
  return table[levels - 1][levels - 1] * v.mag;
}

VerifyReport verify_curvature(const GeodesicBall& region, int samples,
                              BoundSide side, double kappa, std::uint64_t seed) {
  HaltonSampler halton(seed);
  VerifyReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  const double ts[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int produced = 0;
  while (produced < samples) {
    const Point x = sample_in_ball(region, halton);
    const Point y = sample_in_ball(region, halton);
    const Point z = sample_in_ball(region, halton);
    const double d_yz = distance(y, z);
    if (d_yz < 1e-9) continue;
    const double d_xy = distance(x, y);
    const double d_zx = distance(z, x);
    for (double t : ts) {
      const Point m = geodesic_point(y, z, t);
      const double dm = distance(m, x);
      const double dc = comparison_distance(d_xy, d_yz, d_zx, t, kappa);
      double margin = 0.0;
      switch (side) {
        case BoundSide::upper: margin = dc - dm; break;
        case BoundSide::lower: margin = dm - dc; break;
        case BoundSide::both: margin = -std::abs(dm - dc); break;
      }
      if (margin < report.min_margin) {
        report.min_margin = margin;
        std::ostringstream os;
        os << "x=" << coords_to_string(x) << " y=" << coords_to_string(y)
           << " z=" << coords_to_string(z) << " t=" << t << " d(space)=" << dm
           << " d(model)=" << dc;
        report.witness = os.str();
      }
      ++produced;
    }
  }
  report.samples = produced;
  return report;
}

VerifyReport verify_k_convexity(const std::function<double(const Point&)>& f,
                                const GeodesicBall& region, double K,
                                int samples, std::uint64_t seed) {
  HaltonSampler halton(seed);
  VerifyReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  const SpaceDescriptor& sp = region.center.space;

  auto consider = [&](const Point& x, const Point& y, double t) {
    const double d = distance(x, y);
    if (d < 1e-10) return;
    const Point m = geodesic_point(x, y, t);
    const double defect = (1.0 - t) * f(x) + t * f(y) -
                          0.5 * K * t * (1.0 - t) * d * d - f(m);
    // normalized so the tolerance is scale-free in the pair separation
    const double margin = defect / std::max(d * d, 1e-12);
    if (margin < report.min_margin) {
      report.min_margin = margin;
      std::ostringstream os;
      os << "x=" << coords_to_string(x) << " y=" << coords_to_string(y)
         << " t=" << t << " defect=" << defect;
      report.witness = os.str();
    }
    ++report.samples;
  };

  // deterministic boundary probes: short near-tangential geodesics at the
  // sphere of radius r, where the modulus of a cap is attained
  if (sp.kind != SpaceKind::spider && sp.dimension >= 2) {
    const std::vector<Vector> basis = tangent_basis(region.center);
    const int n_dirs = 48;
    for (int j = 0; j < n_dirs; ++j) {
      const double th = 2.0 * kPi * j / n_dirs;
      const Vector dir = std::cos(th) * basis[0] + std::sin(th) * basis[1];
      const Point b = exp_map(region.center, dir, region.radius * 0.999);
      const std::vector<Vector> local = tangent_basis(b);
      for (const Vector& w : local) {
        for (double delta : {0.01, 0.03, 0.08}) {
          const double h = delta * region.radius;
          const Point x = project_to_ball(exp_map(b, w, h), region);
          const Point y = project_to_ball(exp_map(b, -w, h), region);
          consider(x, y, 0.5);
        }
      }
    }
  }

  while (report.samples < samples) {
    const Point x = sample_in_ball(region, halton);
    double u[2];
    halton.next(u, 2);
    const double t = 0.05 + 0.9 * u[0];
    if (report.samples % 2 == 0) {
      consider(x, sample_in_ball(region, halton), t);
    } else {
      // short geodesic from x
      CounterRng rng(CounterRng::mix(seed, static_cast<std::uint64_t>(report.samples)));
      const TangentVector dir = random_unit_tangent(x, rng);
      const double h = (0.005 + 0.1 * u[1]) * region.radius;
      const Point y = project_to_ball(exp_map(x, dir.dir, h), region);
      consider(x, y, t);
    }
  }
  return report;
}

VerifyReport verify_k_convexity(const FunctionalSpec& f, double K, int samples,
                                std::uint64_t seed) {
  return verify_k_convexity([&f](const Point& p) { return f.evaluate(p); },
                            f.region(), K, samples, seed);
}

Point barycenter_fixed_point(const std::vector<Point>& anchors,
                             const std::vector<double>& weights,
                             const GeodesicBall& G) {
  if (anchors.empty() || anchors.size() != weights.size())
    throw InvalidArgument("barycenter: anchors and weights must match");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (!(wsum > 0.0)) throw InvalidArgument("barycenter: zero total weight");

  if (G.center.space.kind == SpaceKind::spider) {
    // no linear tangent structure: per-leg 1-D quadratic minimization.
    // On a fixed leg the objective is piecewise quadratic; minimize by
    // ternary search per leg and compare with the branch point.
    auto value = [&](const Point& p) {
      double v = 0.0;
      for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double d = distance(p, anchors[i]);
        v += weights[i] / wsum * d * d;
      }
      return v;
    };
    Point best = Point(G.center.space, (Vector(2) << 0, 0.0).finished());
    double best_v = value(best);
    for (int leg = 0; leg < G.center.space.dimension; ++leg) {
      double lo = 0.0, hi = G.radius + distance(G.center, best);
      for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        const Point p1(G.center.space, (Vector(2) << leg, m1).finished());
        const Point p2(G.center.space, (Vector(2) << leg, m2).finished());
        if (value(p1) <= value(p2)) hi = m2; else lo = m1;
      }
      const Point cand(G.center.space, (Vector(2) << leg, 0.5 * (lo + hi)).finished());
      if (value(cand) < best_v) { best = cand; best_v = value(cand); }
    }
    return project_to_ball(best, G);
  }

  Point s = G.center;
  for (int iter = 0; iter < 500; ++iter) {
    Vector v = Vector::Zero(s.space.ambient_dim());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const double d = distance(s, anchors[i]);
      if (d < 1e-15) continue;
      v += (weights[i] / wsum) * d * log_map(s, anchors[i]).dir;
    }
    const double n = v.norm();
    if (n < 1e-15) break;
    s = project_to_ball(exp_map(s, v / n, n), G);
    if (n < 1e-14) break;
  }
  return s;
}

VerifyReport verify_variance_inequality(const MeasureSpec& mu, int samples,
                                        std::uint64_t seed) {
  const FunctionalSpec g = mu.mean_functional();
  const GeodesicBall& G = mu.region();
  Point mean = G.center;
  if (mu.all_squared_distance()) {
    std::vector<Point> anchors;
    std::vector<double> weights;
    for (const auto& a : g.atoms()) {
      anchors.push_back(a.anchor);
      weights.push_back(a.weight);
    }
    mean = barycenter_fixed_point(anchors, weights, G);
  } else {
    mean = grid_minimize(g, G).minimizer;
  }
  const double var = g.evaluate(mean);
  const double K = mu.common_k();

  HaltonSampler halton(seed);
  VerifyReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const Point x = sample_in_ball(G, halton);
    const double d = distance(x, mean);
    const double residual = 2.0 / K * (g.evaluate(x) - var) - d * d;
    if (residual < report.min_margin) {
      report.min_margin = residual;
      report.witness = "x=" + coords_to_string(x);
    }
  }
  report.samples = samples;
  return report;
}

}  // namespace oracle
}  // namespace gradflow
