#ifndef GRADFLOW_SCHEDULE_HPP
#define GRADFLOW_SCHEDULE_HPP

#include <optional>
#include <string>

#include "gradflow/errors.hpp"

namespace gradflow {

enum class ScheduleKind { constant, harmonic, power };

// Step-size sequence lambda_k with analytically derived summability flags.
//   constant(c)   lambda_k = c
//   harmonic(c)   lambda_k = c / (k+1)
//   power(c,q)    lambda_k = c / (k+1)^q
// An optional cap clips each step; the cap binds only finitely often for
// decaying kinds, so the flags are unaffected.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::harmonic;
  double c = 1.0;
  double q = 1.0;
  std::optional<double> cap;

  static StepSchedule Constant(double c);
  static StepSchedule Harmonic(double c);
  static StepSchedule Power(double c, double q);

  bool divergent_sum() const;    // sum lambda_k = +inf
  bool square_summable() const;  // sum lambda_k^2 < +inf

  double value(long k) const;

  StepSchedule with_cap(double cap_value) const;
  std::string describe() const;
};

// The three-case decay bound for a_{k+1} <= (1 - alpha/(k+1)) a_k + beta/(k+1)^2.
double rate_envelope(double alpha, double beta, double a0, long k);

}  // namespace gradflow

#endif
