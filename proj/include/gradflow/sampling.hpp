#ifndef GRADFLOW_SAMPLING_HPP
#define GRADFLOW_SAMPLING_HPP

#include "gradflow/rng.hpp"
#include "gradflow/space.hpp"

namespace gradflow {

// Unit tangent at x from a random ambient vector (spider: random leg).
TangentVector random_unit_tangent(const Point& x, CounterRng& rng);

// Point in the closed ball G, uniform enough for verification sampling.
Point sample_in_ball(const GeodesicBall& G, CounterRng& rng);

// Low-discrepancy variant driven by a Halton sequence.
Point sample_in_ball(const GeodesicBall& G, HaltonSampler& halton);

}  // namespace gradflow

#endif
