#include "gradflow/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gradflow {

namespace {

ResolventStep make_step(const FunctionalSpec& f, double lambda, const Point& x,
                        Point output, ResolventMode mode, std::string note = {}) {
  ResolventStep s;
  s.input = x;
  s.output = std::move(output);
  s.lambda = lambda;
  s.mode = mode;
  s.f_value_in = f.evaluate(x);
  s.f_value_out = f.evaluate(s.output);
  s.displacement = distance(x, s.output);
  s.note = std::move(note);
  return s;
}

// h(y) = f(y) + (lambda_inv/2) d(x,y)^2 minimized over G by projected
// geodesic descent. The subproblem is strongly convex, so a step derived
// from the convexity modulus converges linearly; halving on increase keeps
// the iteration safe when that step overshoots.
Point descend(const FunctionalSpec& f, double lambda_inv, const Point& x,
              const GeodesicBall& G, const Point& start, double step_tol,
              long max_iters) {
  auto h = [&](const Point& y) {
    const double d = distance(x, y);
    return f.evaluate(y) + 0.5 * lambda_inv * d * d;
  };
  const double k_d2 = squared_distance_modulus(G.center.space, G.diameter());
  const double k_h =
      std::max(f.modulus_k(), 0.0) + 0.5 * lambda_inv * k_d2;
  const double eta0 = k_h > 1e-12 ? 1.0 / k_h : 1.0;

  const bool hyp = x.space.kind == SpaceKind::hyperbolic;
  auto tangent_norm = [&](const Vector& g) {
    if (!hyp) return g.norm();
    const double q = g.tail(g.size() - 1).squaredNorm() - g[0] * g[0];
    return std::sqrt(std::max(q, 0.0));
  };

  Point y = project_to_ball(start, G);
  double hy = h(y);
  double last_disp = std::numeric_limits<double>::infinity();
  for (long iter = 0; iter < max_iters; ++iter) {
    const GradientInfo gi = gradient_of_minus_f(f, y);
    Vector g = Vector::Zero(y.space.ambient_dim());
    if (gi.absolute_gradient > 0.0)
      g += gi.absolute_gradient * gi.descent_direction.dir;
    const double dxy = distance(y, x);
    if (lambda_inv > 0.0 && dxy > 1e-15) g += lambda_inv * dxy * log_map(y, x).dir;
    const double gm = tangent_norm(g);
    if (gm < 1e-14) return y;
    const TangentVector dir(y, g / gm, 1.0);
    // backtrack from the modulus-derived full step every iteration; for
    // nonsmooth objectives the acceptable scale changes between iterates
    bool improved = false;
    for (double eta = eta0; eta > 1e-18; eta *= 0.5) {
      const Point trial = project_to_ball(exp_map(y, dir.dir, eta * gm), G);
      const double ht = h(trial);
      if (ht < hy - 1e-18 * std::max(1.0, std::abs(hy))) {
        last_disp = distance(y, trial);
        y = trial;
        hy = ht;
        improved = true;
        break;
      }
    }
    // no step length descends: stationary within line-search precision
    if (!improved || last_disp < step_tol) return y;
  }
  if (last_disp > 1e-8)
    throw ConvergenceFailure("prox_upper: inner solver hit the iteration cap",
                             last_disp);
  return y;
}

// Leg coordinates of the intersection of G with one spider leg, empty when
// the leg is out of reach.
bool spider_leg_interval(const GeodesicBall& G, int leg, double* lo, double* hi) {
  const double cp = G.center.leg_pos();
  if (!G.center.at_branch() && G.center.leg() == leg) {
    *lo = std::max(0.0, cp - G.radius);
    *hi = cp + G.radius;
    return true;
  }
  if (G.radius < cp) return false;
  *lo = 0.0;
  *hi = G.radius - cp;
  return true;
}

Point prox_spider(const FunctionalSpec& f, double lambda, const Point& x,
                  const GeodesicBall& G, std::string* note) {
  auto h = [&](const Point& y) {
    const double d = distance(x, y);
    return f.evaluate(y) + d * d / (2.0 * lambda);
  };
  const SpaceDescriptor& sp = G.center.space;
  Point best = project_to_ball(x, G);
  double best_val = h(best);
  int best_leg = best.at_branch() ? -1 : best.leg();
  for (int leg = 0; leg < sp.dimension; ++leg) {
    double lo, hi;
    if (!spider_leg_interval(G, leg, &lo, &hi)) continue;
    // h is convex along the leg; ternary search
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      const Point p1(sp, (Vector(2) << leg, m1).finished());
      const Point p2(sp, (Vector(2) << leg, m2).finished());
      if (h(p1) <= h(p2)) hi = m2; else lo = m1;
    }
    const Point cand(sp, (Vector(2) << leg, 0.5 * (lo + hi)).finished());
    const double val = h(cand);
    if (val < best_val - 1e-12) {
      best = cand;
      best_val = val;
      best_leg = leg;
    } else if (val < best_val + 1e-12 && !cand.at_branch() && best_leg >= 0 &&
               leg < best_leg) {
      // equal-value tie across legs: deterministic lowest-leg-index choice
      best = cand;
      best_val = std::min(best_val, val);
      best_leg = leg;
      if (note) *note = "branch tie: chose leg " + std::to_string(leg);
    }
  }
  return best;
}

}  // namespace

ResolventStep prox_upper(const FunctionalSpec& f, double lambda, const Point& x,
                         const GeodesicBall& G) {
  if (!(lambda > 0.0)) throw InvalidArgument("prox_upper: lambda must be positive");
  if (!(x.space == G.center.space))
    throw InvalidArgument("prox_upper: point and region in different spaces");
  G.require_valid_for_upper();

  if (f.single_atom()) {
    const DistanceAtom& a = f.atoms()[0];
    const double d = distance(x, a.anchor);
    Point candidate = x;
    if (a.power == 2.0) {
      const double t = 2.0 * lambda * a.weight / (1.0 + 2.0 * lambda * a.weight);
      candidate = d < 1e-15 ? x : geodesic_point(x, a.anchor, t);
    } else if (a.power == 1.0) {
      const double step = std::min(d, lambda * a.weight);
      candidate = d < 1e-15 ? x : geodesic_point(x, a.anchor, step / d);
    } else {
      candidate = Point();  // fall through to the iterative path
    }
    if (candidate.x.size() > 0 &&
        distance(G.center, candidate) <= G.radius + 1e-12) {
      return make_step(f, lambda, x, std::move(candidate),
                       ResolventMode::upper_prox);
    }
  }

  std::string note;
  Point out = x.space.kind == SpaceKind::spider
                  ? prox_spider(f, lambda, x, G, &note)
                  : descend(f, 1.0 / lambda, x, G, x, 1e-12, 20000);
  return make_step(f, lambda, x, std::move(out), ResolventMode::upper_prox,
                   std::move(note));
}

ResolventStep step_lower(const FunctionalSpec& f, double lambda, const Point& x) {
  if (lambda < 0.0) throw InvalidArgument("step_lower: lambda must be nonnegative");
  if (!x.space.has_lower_bound())
    throw UnsupportedSpace("step_lower: space has no lower curvature bound");
  const GradientInfo gi = gradient_of_minus_f(f, x);
  Point out = x;
  if (gi.absolute_gradient > 0.0) {
    out = grad_exp(TangentVector(x, gi.descent_direction.dir,
                                 lambda * gi.absolute_gradient));
  }
  ResolventStep s = make_step(f, lambda, x, std::move(out), ResolventMode::lower_grad);
  s.absolute_gradient = gi.absolute_gradient;
  return s;
}

double check_estimate_upper(const FunctionalSpec& f, const ResolventStep& step,
                            const Point& y) {
  const double dyx = distance(y, step.input);
  const double dyj = distance(y, step.output);
  return dyx * dyx - 2.0 * step.lambda * (step.f_value_out - f.evaluate(y)) -
         dyj * dyj;
}

double check_estimate_lower(const FunctionalSpec& f, const ResolventStep& step,
                            const Point& y, double concavity_k) {
  const double dyx = distance(y, step.input);
  const double dyj = distance(y, step.output);
  const double drift = step.lambda * step.absolute_gradient;
  return dyx * dyx - 2.0 * step.lambda * (step.f_value_in - f.evaluate(y)) +
         0.5 * concavity_k * drift * drift - dyj * dyj;
}

Point minimize_on_ball(const FunctionalSpec& f, const GeodesicBall& G,
                       const Point& start, double step_tol, long max_iters) {
  Point y = project_to_ball(start, G);
  for (long k = 0; k < max_iters; ++k) {
    ResolventStep s = prox_upper(f, 0.5, y, G);
    const double disp = distance(y, s.output);
    y = std::move(s.output);
    if (disp < step_tol) break;
  }
  return y;
}

}  // namespace gradflow
