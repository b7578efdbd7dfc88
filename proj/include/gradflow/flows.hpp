#ifndef GRADFLOW_FLOWS_HPP
#define GRADFLOW_FLOWS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradflow/functional.hpp"
#include "gradflow/resolvent.hpp"
#include "gradflow/schedule.hpp"
#include "gradflow/space.hpp"

namespace gradflow {

struct IterateRow {
  long m = 0;                 // global iterate index
  Point x;
  double f_value = 0.0;       // full objective at x
  double dist_to_ref = 0.0;   // d(x, reference), 0 when no reference
  double lambda = 0.0;
  double monotone_residual = 0.0;  // f decrease across the step (upper flows)
  double bound_residual = 0.0;     // flow-specific certificate residual
  double drift_margin = 0.0;       // cyclic: bound - actual intra-cycle drift
};

// Full trajectory with per-step diagnostics. The iterate log is append-only
// and dense in m; certificates are residuals that must stay >= -1e-7.
struct RunRecord {
  SpaceDescriptor space;
  GeodesicBall region;
  std::string flow;
  std::string schedule;
  std::uint64_t seed = 0;
  std::optional<Point> reference;
  std::vector<IterateRow> rows;
  std::vector<double> envelope;  // a_k per cycle, when applicable
  std::vector<std::string> events;
  std::string status;  // "converged" or "max_iterations"

  double min_certificate_residual() const;
  const Point& terminal() const { return rows.back().x; }
};

// Proximal point algorithm x_k = J^f_{lambda_k}(x_{k-1}) on an upper-bound
// space. Certifies per-step monotonicity of f and, when a reference y is
// given, the suboptimality bound f(x_k) - f(y) <= d(y,x_0)^2 / (2 sum lambda).
RunRecord ppa(const FunctionalSpec& f, const StepSchedule& schedule,
              const Point& x0, const GeodesicBall& G, long max_k,
              std::optional<Point> reference = std::nullopt);

// Cyclic proximal splitting over f_1..f_n with a shared decaying step.
// Certifies the intra-cycle drift bound d(x_{kn}, x_{kn+i}) <= 2 lambda_k L i
// (upper mode) or <= lambda_k L i (lower mode). In lower mode a step that
// would exit G shrinks lambda and logs the event.
RunRecord cyclic_ppa(const std::vector<FunctionalSpec>& fs,
                     const StepSchedule& schedule, const Point& x0,
                     const GeodesicBall& G, ResolventMode mode, long max_k,
                     std::optional<Point> reference = std::nullopt,
                     bool shuffle_per_cycle = false, std::uint64_t seed = 0);

// Envelope a_0 = d(x_0,y)^2, a_{k+1} = (1 - lambda_k K) a_k + beta lambda_k^2
// with beta = 2 L^2 n (n+1) (upper) or L^2 n (K/2 + n - 1) (lower), evaluated
// along the run's schedule. Requires lambda_k K < 1.
std::vector<double> envelope_kconvex(const RunRecord& run, double K, double L,
                                     int n, ResolventMode mode);

// Closed product form of the same envelope; matches the recursion exactly.
double envelope_closed_form(const std::vector<double>& lambdas, double K,
                            double beta, double a0, std::size_t k);

// Stochastic proximal flow S_{k+1} = J^{f_k}_{lambda_k}(S_k) with f_k drawn
// i.i.d. from mu by the seeded counter generator. The reference is E mu,
// computed once deterministically and cross-checked against the grid oracle.
RunRecord stochastic_ppa(const MeasureSpec& mu, const StepSchedule& schedule,
                         const Point& s0, const GeodesicBall& G,
                         std::uint64_t seed, long max_k);

// Streaming inductive mean S_{k+1} = S_k #_{1/(k+1)} a_{k+1}; the stream is
// the given anchor order, or i.i.d. draws from the weights when a seed-driven
// length is requested.
RunRecord inductive_mean(const std::vector<Point>& anchors,
                         const std::vector<int>& stream, const GeodesicBall& G);
RunRecord inductive_mean_sampled(const std::vector<Point>& anchors,
                                 const std::vector<double>& weights,
                                 const GeodesicBall& G, std::uint64_t seed,
                                 long max_k);

struct JensenRow {
  long k = 0;
  Point s;
  double z = 0.0;
  double f_s = 0.0;
};

struct JensenRecord {
  std::vector<JensenRow> rows;
  double min_gap = 0.0;  // min over k of Z_k - f(S_k); >= -1e-8 certifies
};

// Coupled sequences S_{k+1} = S_k #_{1/(k+1)} Y_{k+1} and running mean Z of
// f(Y); certifies f(S_k) <= Z_k at every step.
JensenRecord jensen_run(const std::vector<Point>& atoms,
                        const std::vector<double>& weights,
                        const FunctionalSpec& f_convex, const GeodesicBall& G,
                        std::uint64_t seed, long max_k);

// E mu as the minimizer of the mean functional (deterministic high-accuracy
// solve cross-checked against the grid oracle) and var(mu) as its value.
std::pair<Point, double> expectation_and_variance(const MeasureSpec& mu);

}  // namespace gradflow

#endif
