#ifndef GRADFLOW_ORACLE_HPP
#define GRADFLOW_ORACLE_HPP

#include <functional>
#include <string>

#include "gradflow/functional.hpp"
#include "gradflow/space.hpp"

namespace gradflow {
namespace oracle {

// Brute-force and finite-difference certifiers. These are deliberately kept
// independent of the solver paths they check: grid_minimize never calls the
// resolvent, fd_directional never calls closed-form derivatives.

struct GridResult {
  Point minimizer;
  double value = 0.0;
  double resolution = 0.0;  // final grid spacing
};

// Exhaustive evaluation over a geodesic-polar grid of G followed by local
// refinement passes that halve the spacing around the incumbent.
GridResult grid_minimize(const std::function<double(const Point&)>& f,
                         const GeodesicBall& G, int points_per_dim = 0);
GridResult grid_minimize(const FunctionalSpec& f, const GeodesicBall& G,
                         int points_per_dim = 0);

// Richardson-extrapolated one-sided difference of f along exp_map.
double fd_directional(const std::function<double(const Point&)>& f,
                      const TangentVector& v);

struct VerifyReport {
  double min_margin = 0.0;
  std::string witness;  // inputs achieving the worst margin
  long samples = 0;
  bool pass(double tol) const { return min_margin >= -tol; }
};

// Samples triples (x,y,z) and t in the region and compares d(x, y#_t z)
// against the model space M^2(kappa). Margin is signed so that >= 0 means the
// declared side holds.
VerifyReport verify_curvature(const GeodesicBall& region, int samples,
                              BoundSide side, double kappa, std::uint64_t seed);

// Minimum defect of the K-convexity midpoint inequality over sampled
// geodesics in the region. Includes short near-boundary geodesics, where the
// modulus of a constant-curvature cap is attained.
VerifyReport verify_k_convexity(const std::function<double(const Point&)>& f,
                                const GeodesicBall& region, double K,
                                int samples, std::uint64_t seed);
VerifyReport verify_k_convexity(const FunctionalSpec& f, double K, int samples,
                                std::uint64_t seed);

// Residual of d(x, E mu)^2 <= (2/K) [g(x) - g(E mu)] over sampled x, with
// E mu computed here by fixed-point iteration (squared distances) or grid
// search, independently of the flow layer.
VerifyReport verify_variance_inequality(const MeasureSpec& mu, int samples,
                                        std::uint64_t seed);

// Independent barycenter for weighted squared-distance measures: tangent
// fixed-point iteration S <- exp_S(sum_i w_i log_S a_i).
Point barycenter_fixed_point(const std::vector<Point>& anchors,
                             const std::vector<double>& weights,
                             const GeodesicBall& G);

}  // namespace oracle
}  // namespace gradflow

#endif
