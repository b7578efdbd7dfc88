#include "gradflow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gradflow/oracle.hpp"
#include "gradflow/rng.hpp"

namespace gradflow {

namespace {

constexpr double kStepTol = 1e-12;

IterateRow start_row(const Point& x0, const FunctionalSpec& f,
                     const std::optional<Point>& ref) {
  IterateRow row;
  row.m = 0;
  row.x = x0;
  row.f_value = f.evaluate(x0);
  row.dist_to_ref = ref ? distance(x0, *ref) : 0.0;
  return row;
}

}  // namespace

double RunRecord::min_certificate_residual() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    r = std::min({r, row.monotone_residual, row.bound_residual, row.drift_margin});
  }
  return r;
}

RunRecord ppa(const FunctionalSpec& f, const StepSchedule& schedule,
              const Point& x0, const GeodesicBall& G, long max_k,
              std::optional<Point> reference) {
  if (!schedule.divergent_sum())
    throw InvalidArgument("ppa: schedule must have a divergent step sum");
  G.require_valid_for_upper();
  if (distance(x0, G.center) > G.radius + 1e-12)
    throw InvalidArgument("ppa: start point outside the region");

  RunRecord run;
  run.space = G.center.space;
  run.region = G;
  run.flow = "ppa";
  run.schedule = schedule.describe();
  run.reference = reference;
  run.rows.push_back(start_row(x0, f, reference));
  run.status = "max_iterations";

  const double f_ref = reference ? f.evaluate(*reference) : 0.0;
  const double d0_sq =
      reference ? distance(*reference, x0) * distance(*reference, x0) : 0.0;

  Point x = x0;
  double f_prev = run.rows[0].f_value;
  double lambda_sum = 0.0;
  for (long k = 1; k <= max_k; ++k) {
    const double lambda = schedule.value(k - 1);
    ResolventStep step = prox_upper(f, lambda, x, G);
    lambda_sum += lambda;
    x = step.output;

    IterateRow row;
    row.m = k;
    row.x = x;
    row.f_value = step.f_value_out;
    row.lambda = lambda;
    row.monotone_residual = f_prev - step.f_value_out;
    if (reference) {
      row.dist_to_ref = distance(x, *reference);
      row.bound_residual =
          d0_sq / (2.0 * lambda_sum) - (step.f_value_out - f_ref);
    }
    run.rows.push_back(row);
    f_prev = step.f_value_out;

    if (step.displacement < kStepTol) {
      run.status = "converged";
      break;
    }
  }
  return run;
}

RunRecord cyclic_ppa(const std::vector<FunctionalSpec>& fs,
                     const StepSchedule& schedule, const Point& x0,
                     const GeodesicBall& G, ResolventMode mode, long max_k,
                     std::optional<Point> reference, bool shuffle_per_cycle,
                     std::uint64_t seed) {
  if (fs.empty()) throw InvalidArgument("cyclic_ppa: empty functional list");
  if (!schedule.divergent_sum() || !schedule.square_summable())
    throw InvalidArgument(
        "cyclic_ppa: schedule needs a divergent, square-summable step sum");
  if (mode == ResolventMode::upper_prox) {
    G.require_valid_for_upper();
  } else if (!G.center.space.has_lower_bound()) {
    throw InvalidArgument(
        "cyclic_ppa: lower mode needs a lower curvature bound");
  }
  if (distance(x0, G.center) > G.radius + 1e-12)
    throw InvalidArgument("cyclic_ppa: start point outside the region");

  const int n = static_cast<int>(fs.size());
  double lip = 0.0;
  for (const auto& f : fs) lip = std::max(lip, f.lipschitz_l());

  // Total objective, used for the iterate log only.
  const auto total = [&fs](const Point& p) {
    double s = 0.0;
    for (const auto& f : fs) s += f.evaluate(p);
    return s;
  };

  RunRecord run;
  run.space = G.center.space;
  run.region = G;
  run.flow = mode == ResolventMode::upper_prox ? "cyclic_ppa" : "cyclic_ppa_lower";
  run.schedule = schedule.describe();
  run.seed = seed;
  run.reference = reference;
  run.status = "max_iterations";

  IterateRow first;
  first.m = 0;
  first.x = x0;
  first.f_value = total(x0);
  first.dist_to_ref = reference ? distance(x0, *reference) : 0.0;
  run.rows.push_back(first);

  CounterRng rng(seed);
  std::vector<int> order(fs.size());
  std::iota(order.begin(), order.end(), 0);

  Point x = x0;
  for (long k = 0; k < max_k; ++k) {
    double lambda = schedule.value(k);
    if (shuffle_per_cycle) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1],
                  order[rng.next_below(static_cast<std::uint64_t>(i))]);
      }
    }
    const Point cycle_start = x;
    double cycle_disp = 0.0;
    for (int i = 0; i < n; ++i) {
      const FunctionalSpec& fi = fs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      ResolventStep step;
      if (mode == ResolventMode::upper_prox) {
        step = prox_upper(fi, lambda, x, G);
      } else {
        step = step_lower(fi, lambda, x);
        while (distance(step.output, G.center) > G.radius + 1e-12) {
          lambda *= 0.5;
          run.events.push_back("cycle " + std::to_string(k) +
                               ": step left the region, lambda shrunk to " +
                               std::to_string(lambda));
          step = step_lower(fi, lambda, x);
        }
      }
      cycle_disp = std::max(cycle_disp, step.displacement);
      x = step.output;

      IterateRow row;
      row.m = k * n + i + 1;
      row.x = x;
      row.f_value = total(x);
      row.lambda = lambda;
      row.dist_to_ref = reference ? distance(x, *reference) : 0.0;
      const double drift_bound = (mode == ResolventMode::upper_prox ? 2.0 : 1.0) *
                                 lambda * lip * static_cast<double>(i + 1);
      row.drift_margin = drift_bound - distance(cycle_start, x);
      if (!step.note.empty()) run.events.push_back(step.note);
      run.rows.push_back(row);
    }
    if (cycle_disp < kStepTol) {
      run.status = "converged";
      break;
    }
  }
  return run;
}

std::vector<double> envelope_kconvex(const RunRecord& run, double K, double L,
                                     int n, ResolventMode mode) {
  if (!(K > 0.0)) throw InvalidArgument("envelope: K must be positive");
  if (!run.reference)
    throw InvalidArgument("envelope: run carries no reference minimizer");
  if (run.rows.empty() || (run.rows.size() - 1) % static_cast<std::size_t>(n) != 0)
    throw InvalidArgument("envelope: iterate log is not whole cycles");

  const double beta = mode == ResolventMode::upper_prox
                          ? 2.0 * L * L * n * (n + 1)
                          : L * L * n * (K / 2.0 + n - 1);
  const std::size_t cycles = (run.rows.size() - 1) / static_cast<std::size_t>(n);
  const double d0 = run.rows[0].dist_to_ref;

  std::vector<double> a;
  a.reserve(cycles + 1);
  a.push_back(d0 * d0);
  for (std::size_t k = 0; k < cycles; ++k) {
    const double lambda = run.rows[k * static_cast<std::size_t>(n) + 1].lambda;
    if (lambda * K >= 1.0)
      throw InvalidArgument("envelope: lambda K >= 1, contraction lost");
    a.push_back((1.0 - lambda * K) * a.back() + beta * lambda * lambda);
  }
  return a;
}

double envelope_closed_form(const std::vector<double>& lambdas, double K,
                            double beta, double a0, std::size_t k) {
  // a_k = a0 prod_{i<k} (1 - lambda_i K)
  //       + beta sum_{j<k} lambda_j^2 prod_{j<i<k} (1 - lambda_i K)
  double prod = 1.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = k - 1 - j;  // accumulate from the tail
    sum += lambdas[i] * lambdas[i] * prod;
    prod *= 1.0 - lambdas[i] * K;
  }
  return a0 * prod + beta * sum;
}

RunRecord stochastic_ppa(const MeasureSpec& mu, const StepSchedule& schedule,
                         const Point& s0, const GeodesicBall& G,
                         std::uint64_t seed, long max_k) {
  if (!schedule.divergent_sum())
    throw InvalidArgument("stochastic_ppa: schedule must have a divergent sum");
  if (schedule.value(0) * mu.common_k() >= 1.0 &&
      schedule.kind == ScheduleKind::constant)
    throw InvalidArgument("stochastic_ppa: lambda K >= 1");
  G.require_valid_for_upper();

  const auto [mean, variance] = expectation_and_variance(mu);
  (void)variance;
  const FunctionalSpec g = mu.mean_functional();

  RunRecord run;
  run.space = G.center.space;
  run.region = G;
  run.flow = "stochastic_ppa[" + CounterRng::name() + "]";
  run.schedule = schedule.describe();
  run.seed = seed;
  run.reference = mean;
  run.rows.push_back(start_row(s0, g, run.reference));
  run.status = "max_iterations";

  CounterRng rng(seed);
  Point s = s0;
  for (long k = 0; k < max_k; ++k) {
    double lambda = schedule.value(k);
    if (lambda * mu.common_k() > 1.0)
      lambda = 1.0 / mu.common_k();  // cap preserves the decay flags
    const std::size_t idx = mu.draw(rng.next_double());
    ResolventStep step = prox_upper(mu.support()[idx], lambda, s, G);
    s = step.output;

    IterateRow row;
    row.m = k + 1;
    row.x = s;
    row.f_value = g.evaluate(s);
    row.lambda = lambda;
    row.dist_to_ref = distance(s, mean);
    run.rows.push_back(row);
  }
  return run;
}

RunRecord inductive_mean(const std::vector<Point>& anchors,
                         const std::vector<int>& stream,
                         const GeodesicBall& G) {
  if (anchors.empty() || stream.empty())
    throw InvalidArgument("inductive_mean: empty input");
  G.require_valid_for_upper();
  for (const auto& a : anchors) {
    if (distance(a, G.center) > G.radius + 1e-12)
      throw InvalidArgument("inductive_mean: anchor outside the region");
  }

  // Log the mean squared distance to the anchor set as the objective.
  const auto msd = [&anchors](const Point& p) {
    double s = 0.0;
    for (const auto& a : anchors) {
      const double d = distance(p, a);
      s += d * d;
    }
    return s / static_cast<double>(anchors.size());
  };

  RunRecord run;
  run.space = G.center.space;
  run.region = G;
  run.flow = "inductive_mean";
  run.schedule = "stream";
  run.status = "converged";

  Point s = anchors[static_cast<std::size_t>(stream[0])];
  IterateRow first;
  first.m = 1;
  first.x = s;
  first.f_value = msd(s);
  run.rows.push_back(first);

  for (std::size_t k = 1; k < stream.size(); ++k) {
    const Point& a = anchors[static_cast<std::size_t>(stream[k])];
    s = geodesic_point(s, a, 1.0 / static_cast<double>(k + 1));
    IterateRow row;
    row.m = static_cast<long>(k + 1);
    row.x = s;
    row.f_value = msd(s);
    row.lambda = 1.0 / static_cast<double>(k + 1);
    run.rows.push_back(row);
  }
  return run;
}

RunRecord inductive_mean_sampled(const std::vector<Point>& anchors,
                                 const std::vector<double>& weights,
                                 const GeodesicBall& G, std::uint64_t seed,
                                 long max_k) {
  if (anchors.empty() || anchors.size() != weights.size())
    throw InvalidArgument("inductive_mean: anchors/weights size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("inductive_mean: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("inductive_mean: weights must sum to 1");

  CounterRng rng(seed);
  std::vector<int> stream;
  stream.reserve(static_cast<std::size_t>(max_k));
  for (long k = 0; k < max_k; ++k) {
    const double u = rng.next_double();
    double acc = 0.0;
    int idx = static_cast<int>(anchors.size()) - 1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) {
        idx = static_cast<int>(i);
        break;
      }
    }
    stream.push_back(idx);
  }
  RunRecord run = inductive_mean(anchors, stream, G);
  run.flow = "inductive_mean[" + CounterRng::name() + "]";
  run.seed = seed;
  return run;
}

JensenRecord jensen_run(const std::vector<Point>& atoms,
                        const std::vector<double>& weights,
                        const FunctionalSpec& f_convex, const GeodesicBall& G,
                        std::uint64_t seed, long max_k) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw InvalidArgument("jensen_run: atoms/weights size mismatch");
  G.require_valid_for_upper();
  if (!f_convex.k_certified() || f_convex.modulus_k() < 0.0) {
    const CertifiedConstant sampled = sampled_modulus(f_convex, 2000, seed);
    if (sampled.value < -1e-8)
      throw InvalidArgument("jensen_run: functional fails the convexity sampler");
  }

  CounterRng rng(seed);
  const auto draw = [&]() -> const Point& {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return atoms[i];
    }
    return atoms.back();
  };

  JensenRecord rec;
  rec.min_gap = std::numeric_limits<double>::infinity();

  const Point& y1 = draw();
  Point s = y1;
  double z = f_convex.evaluate(y1);
  rec.rows.push_back({1, s, z, z});
  rec.min_gap = 0.0;

  for (long k = 1; k < max_k; ++k) {
    const Point& y = draw();
    s = geodesic_point(s, y, 1.0 / static_cast<double>(k + 1));
    z = (static_cast<double>(k) * z + f_convex.evaluate(y)) /
        static_cast<double>(k + 1);
    const double fs = f_convex.evaluate(s);
    rec.rows.push_back({k + 1, s, z, fs});
    rec.min_gap = std::min(rec.min_gap, z - fs);
  }
  return rec;
}

std::pair<Point, double> expectation_and_variance(const MeasureSpec& mu) {
  if (!(mu.common_k() > 0.0))
    throw InvalidArgument(
        "expectation: common convexity modulus must be positive");

  const FunctionalSpec g = mu.mean_functional();
  const GeodesicBall& G = mu.region();

  const oracle::GridResult coarse = oracle::grid_minimize(g, G);
  const Point polished = minimize_on_ball(g, G, coarse.minimizer);
  const double gap = distance(polished, coarse.minimizer);
  if (gap > 4.0 * coarse.resolution + 1e-9)
    throw ConvergenceFailure(
        "expectation: polished minimizer disagrees with the grid oracle", gap);
  return {polished, g.evaluate(polished)};
}

}  // namespace gradflow
