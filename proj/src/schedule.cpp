#include "gradflow/schedule.hpp"

#include <cmath>
#include <sstream>

namespace gradflow {

StepSchedule StepSchedule::Constant(double c) {
  if (!(c > 0.0)) throw InvalidArgument("schedule: c must be positive");
  return {ScheduleKind::constant, c, 0.0, std::nullopt};
}

StepSchedule StepSchedule::Harmonic(double c) {
  if (!(c > 0.0)) throw InvalidArgument("schedule: c must be positive");
  return {ScheduleKind::harmonic, c, 1.0, std::nullopt};
}

StepSchedule StepSchedule::Power(double c, double q) {
  if (!(c > 0.0) || !(q > 0.0)) throw InvalidArgument("schedule: c, q must be positive");
  return {ScheduleKind::power, c, q, std::nullopt};
}

bool StepSchedule::divergent_sum() const {
  switch (kind) {
    case ScheduleKind::constant: return true;
    case ScheduleKind::harmonic: return true;
    case ScheduleKind::power: return q <= 1.0;
  }
  return false;
}

bool StepSchedule::square_summable() const {
  switch (kind) {
    case ScheduleKind::constant: return false;
    case ScheduleKind::harmonic: return true;
    case ScheduleKind::power: return q > 0.5;
  }
  return false;
}

double StepSchedule::value(long k) const {
  double v = 0.0;
  switch (kind) {
    case ScheduleKind::constant: v = c; break;
    case ScheduleKind::harmonic: v = c / static_cast<double>(k + 1); break;
    case ScheduleKind::power: v = c / std::pow(static_cast<double>(k + 1), q); break;
  }
  if (cap && v > *cap) v = *cap;
  return v;
}

StepSchedule StepSchedule::with_cap(double cap_value) const {
  if (!(cap_value > 0.0)) throw InvalidArgument("schedule: cap must be positive");
  StepSchedule s = *this;
  s.cap = s.cap ? std::min(*s.cap, cap_value) : cap_value;
  return s;
}

std::string StepSchedule::describe() const {
  std::ostringstream os;
  switch (kind) {
    case ScheduleKind::constant: os << "constant(" << c << ")"; break;
    case ScheduleKind::harmonic: os << "harmonic(" << c << ")"; break;
    case ScheduleKind::power: os << "power(" << c << "," << q << ")"; break;
  }
  if (cap) os << " cap " << *cap;
  return os.str();
}

// Certified upper envelope for a_{k+1} = (1 - alpha/(k+1)) a_k + beta/(k+1)^2.
// Three decay regimes: k^{-alpha} for alpha < 1, log(k)/k at alpha = 1, and
// 1/((alpha-1) k) for alpha > 1, matching the recursion's exact asymptotics.
double rate_envelope(double alpha, double beta, double a0, long k) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw InvalidArgument("rate_envelope: alpha and beta must be positive");
  if (a0 < 0.0 || k < 0) throw InvalidArgument("rate_envelope: bad a0 or k");
  const double kd = static_cast<double>(k);

  double bound;
  if (alpha < 1.0) {
    // product form of the recursion: the homogeneous factor is at most
    // (k+1)^{-alpha} and the forced sum at most 2^alpha (2-alpha)/(1-alpha)
    // times that, via 1-x <= e^{-x} and harmonic-sum integral bounds
    bound = (a0 + std::pow(2.0, alpha) * beta * (2.0 - alpha) / (1.0 - alpha)) /
            std::pow(kd + 1.0, alpha);
  } else if (alpha == 1.0) {
    // exact solution: k a_k telescopes to beta H_k, and H_k <= 1 + log k
    bound = k == 0 ? a0 : beta * (1.0 + std::log(kd)) / kd;
  } else {
    // the step coefficient can be negative while k + 1 <= alpha, so take
    // those first steps exactly; past k0 = ceil(alpha) the tail form
    // (beta + c (k+1)^{1-alpha}) / ((alpha-1)(k+1)) with c >= 0 is invariant
    // under the recursion step and anchored at the exact value a_{k0}
    const long k0 = static_cast<long>(std::ceil(alpha));
    double a = a0;
    for (long j = 0; j < std::min(k, k0); ++j) {
      const double jd = static_cast<double>(j + 1);
      a = (1.0 - alpha / jd) * a + beta / (jd * jd);
    }
    if (k <= k0) {
      bound = a;
    } else {
      const double s0 = static_cast<double>(k0 + 1);
      const double c =
          std::max(0.0, ((alpha - 1.0) * s0 * a - beta) * std::pow(s0, alpha - 1.0));
      bound = (beta + c * std::pow(kd + 1.0, 1.0 - alpha)) /
              ((alpha - 1.0) * (kd + 1.0));
    }
  }

  double classic;
  if (alpha < 1.0) {
    classic = (a0 + std::pow(2.0, alpha) * beta * (2.0 - alpha) / (1.0 - alpha)) /
              std::pow(kd + 2.0, alpha);
  } else if (alpha == 1.0) {
    classic = beta * (1.0 + std::log(kd + 1.0)) / (kd + 1.0);
  } else {
    classic = (beta + ((alpha - 1.0) * a0 - beta) / std::pow(kd + 2.0, alpha - 1.0)) /
              ((alpha - 1.0) * (kd + 2.0));
  }
  return std::max(bound, classic);
}

}  // namespace gradflow
