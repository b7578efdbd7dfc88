#ifndef GRADFLOW_RESOLVENT_HPP
#define GRADFLOW_RESOLVENT_HPP

#include <string>

#include "gradflow/functional.hpp"
#include "gradflow/space.hpp"

namespace gradflow {

enum class ResolventMode { upper_prox, lower_grad };

struct ResolventStep {
  Point input;
  Point output;
  double lambda = 0.0;
  ResolventMode mode = ResolventMode::upper_prox;
  double f_value_in = 0.0;
  double f_value_out = 0.0;
  double displacement = 0.0;        // d(input, output)
  double absolute_gradient = 0.0;   // lower mode: |grad_- f|(input)
  std::string note;                 // e.g. spider branch tie-break
};

// Moreau-Yosida step: argmin over G of f(y) + d(x,y)^2 / (2 lambda).
// Closed forms for single squared-distance and single p=1 atoms; otherwise a
// damped projected geodesic descent on the strongly convex subproblem
// (spider: per-leg ternary search plus branch comparison).
ResolventStep prox_upper(const FunctionalSpec& f, double lambda, const Point& x,
                         const GeodesicBall& G);

// Gradient-exponential step g-exp(lambda grad(-f)(x)) for lower curvature
// bounds. No monotonicity of f is guaranteed.
ResolventStep step_lower(const FunctionalSpec& f, double lambda, const Point& x);

// Residual of d(y,J(x))^2 <= d(y,x)^2 - 2 lambda [f(J(x)) - f(y)];
// nonnegative (within tolerance) for every y in G.
double check_estimate_upper(const FunctionalSpec& f, const ResolventStep& step,
                            const Point& y);

// Residual of
// d(y,J(x))^2 <= d(y,x)^2 - 2 lambda [f(x) - f(y)] + (K/2)(lambda |grad|)^2
// with K the concavity constant of the region.
double check_estimate_lower(const FunctionalSpec& f, const ResolventStep& step,
                            const Point& y, double concavity_k);

// Minimizer of f over G to high accuracy, by iterating the unit-step
// resolvent until the step length vanishes.
Point minimize_on_ball(const FunctionalSpec& f, const GeodesicBall& G,
                       const Point& start, double step_tol = 1e-13,
                       long max_iters = 4000);

}  // namespace gradflow

#endif
