#include "gradflow/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gradflow/rng.hpp"
#include "gradflow/sampling.hpp"

namespace gradflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::squared_distance: return "squared_distance";
    case FunctionalKind::distance_power: return "distance_power";
    case FunctionalKind::weighted_sum: return "weighted_sum";
    case FunctionalKind::affine: return "affine";
  }
  return "?";
}

double squared_distance_modulus(const SpaceDescriptor& space, double diam) {
  if (!(diam > 0.0)) throw InvalidArgument("modulus: diameter must be positive");
  if (space.kind == SpaceKind::sphere) {
    const double sk = std::sqrt(space.kappa);
    const double eps = kPi / 2.0 - diam * sk;
    if (!(eps > 0.0))
      throw InvalidArgument("modulus: region too large, need diam < pi/(2 sqrt(kappa))");
    return (kPi - 2.0 * eps) * std::tan(eps);
  }
  return 2.0;
}

double squared_distance_concavity(const SpaceDescriptor& space, double diam) {
  if (!space.has_lower_bound())
    throw UnsupportedSpace("concavity constant: space has no lower curvature bound");
  // -d(., a)^2 is (-K)-convex; flat and positively curved spaces have the
  // exact flat constant 2 (radial second derivative of d^2)
  if (space.kappa >= 0.0) return 2.0;
  return 2.0 * (1.0 - space.kappa * diam * diam);
}

FunctionalSpec::FunctionalSpec(FunctionalKind kind, std::vector<DistanceAtom> atoms,
                               GeodesicBall region)
    : kind_(kind), atoms_(std::move(atoms)), region_(std::move(region)) {
  const double diam = region_.diameter();
  double k_sum = 0.0;
  bool all_squared = true;
  double l_sum = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.anchor.space == space()))
      throw InvalidArgument("functional: anchor in a different space");
    if (a.weight < 0.0) throw InvalidArgument("functional: negative weight");
    if (a.power < 1.0) throw InvalidArgument("functional: power must be >= 1");
    if (a.power != 2.0) all_squared = false;
    l_sum += a.weight * a.power * std::pow(diam, a.power - 1.0);
  }
  lipschitz_l_ = l_sum;
  if (all_squared) {
    const double k2 = squared_distance_modulus(space(), diam);
    for (const auto& a : atoms_) k_sum += a.weight * k2;
    modulus_k_ = {k_sum, true};
  } else if (space().kind != SpaceKind::sphere) {
    // distance powers p >= 1 are convex when curvature is bounded above by 0
    modulus_k_ = {0.0, true};
  } else {
    modulus_k_ = {0.0, false};  // sampled_modulus can sharpen this
  }
}

FunctionalSpec FunctionalSpec::SquaredDistance(Point anchor, GeodesicBall region) {
  return FunctionalSpec(FunctionalKind::squared_distance,
                        {DistanceAtom{std::move(anchor), 1.0, 2.0}}, std::move(region));
}

FunctionalSpec FunctionalSpec::DistancePower(Point anchor, double p,
                                             GeodesicBall region) {
  return FunctionalSpec(p == 2.0 ? FunctionalKind::squared_distance
                                 : FunctionalKind::distance_power,
                        {DistanceAtom{std::move(anchor), 1.0, p}}, std::move(region));
}

FunctionalSpec FunctionalSpec::WeightedSum(std::vector<DistanceAtom> atoms,
                                           GeodesicBall region) {
  if (atoms.empty()) throw InvalidArgument("weighted_sum: no atoms");
  return FunctionalSpec(FunctionalKind::weighted_sum, std::move(atoms),
                        std::move(region));
}

FunctionalSpec FunctionalSpec::Affine(Vector slope, double offset, GeodesicBall region) {
  if (region.center.space.kind != SpaceKind::euclidean)
    throw InvalidArgument("affine functional: euclidean spaces only");
  FunctionalSpec f(FunctionalKind::affine, {}, std::move(region));
  f.affine_slope_ = std::move(slope);
  f.affine_offset_ = offset;
  f.modulus_k_ = {0.0, true};
  f.lipschitz_l_ = f.affine_slope_.norm();
  return f;
}

bool FunctionalSpec::smooth_everywhere() const {
  if (kind_ == FunctionalKind::affine) return true;
  for (const auto& a : atoms_)
    if (a.power < 2.0) return false;
  return true;
}

double FunctionalSpec::evaluate(const Point& x) const {
  if (kind_ == FunctionalKind::affine)
    return affine_slope_.dot(x.x) + affine_offset_;
  double v = 0.0;
  for (const auto& a : atoms_)
    v += a.weight * std::pow(distance(x, a.anchor), a.power);
  return v;
}

bool FunctionalSpec::in_region(const Point& x) const {
  return distance(region_.center, x) <= region_.radius + 1e-12;
}

double directional_derivative(const FunctionalSpec& f, const TangentVector& v) {
  if (v.mag == 0.0) return 0.0;
  const Point& x = v.base;
  if (f.kind() == FunctionalKind::affine) return f.affine_slope().dot(v.dir) * v.mag;
  double deriv = 0.0;
  for (const auto& a : f.atoms()) {
    const double d = distance(x, a.anchor);
    if (d < 1e-14) {
      // at the anchor: d^p has one-sided slope p d^(p-1) -> 0 for p > 1,
      // and unit slope in every direction for p = 1
      if (a.power == 1.0) deriv += a.weight * v.mag;
      continue;
    }
    const TangentVector u = log_map(x, a.anchor);
    deriv += a.weight * (-a.power) * std::pow(d, a.power - 2.0) * inner_product(v, u);
  }
  return deriv;
}

GradientInfo gradient_of_minus_f(const FunctionalSpec& f, const Point& x) {
  if (!x.space.has_lower_bound())
    throw UnsupportedSpace("gradient_of_minus_f: space has no lower curvature bound");
  Vector g = Vector::Zero(x.space.ambient_dim());
  double nonsmooth_weight = 0.0;
  if (f.kind() == FunctionalKind::affine) {
    g = -f.affine_slope();
  } else {
    for (const auto& a : f.atoms()) {
      const double d = distance(x, a.anchor);
      if (d < 1e-14) {
        if (a.power == 1.0) nonsmooth_weight += a.weight;
        continue;
      }
      const TangentVector u = log_map(x, a.anchor);
      g += a.weight * a.power * std::pow(d, a.power - 1.0) * u.dir;
    }
  }
  // tangent magnitude under the space's metric (Minkowski for hyperbolic)
  double mag;
  if (x.space.kind == SpaceKind::hyperbolic) {
    const double q =
        g.tail(g.size() - 1).squaredNorm() - g[0] * g[0];
    mag = std::sqrt(std::max(q, 0.0));
  } else {
    mag = g.norm();
  }
  // minimal-norm element when p=1 anchors sit at x: the subdifferential of
  // each such atom is the unit ball, which can cancel up to its weight
  mag = std::max(0.0, mag - nonsmooth_weight);
  GradientInfo info;
  if (mag < 1e-14) {
    info.absolute_gradient = 0.0;
    info.descent_direction = TangentVector::Origin(x);
    return info;
  }
  info.absolute_gradient = mag;
  info.descent_direction = TangentVector(x, g / g.norm(), mag);
  return info;
}

MeasureSpec::MeasureSpec(std::vector<FunctionalSpec> support,
                         std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty() || support_.size() != weights_.size())
    throw InvalidArgument("measure: support and weights must match and be nonempty");
  double wsum = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw InvalidArgument("measure: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw InvalidArgument("measure: weights must sum to 1");
  const GeodesicBall& G = support_[0].region();
  common_k_ = std::numeric_limits<double>::infinity();
  for (const auto& f : support_) {
    if (!(f.space() == G.center.space) ||
        (f.region().center.x - G.center.x).norm() > 1e-12 ||
        std::abs(f.region().radius - G.radius) > 1e-12)
      throw InvalidArgument("measure: supports must share one region");
    if (!f.k_certified() || !(f.modulus_k() > 0.0))
      throw InvalidArgument("measure: supports need a certified K > 0");
    common_k_ = std::min(common_k_, f.modulus_k());
    common_l_ = std::max(common_l_, f.lipschitz_l());
  }
}

FunctionalSpec MeasureSpec::mean_functional() const {
  std::vector<DistanceAtom> atoms;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    for (DistanceAtom a : support_[i].atoms()) {
      a.weight *= weights_[i];
      atoms.push_back(std::move(a));
    }
  }
  return FunctionalSpec::WeightedSum(std::move(atoms), region());
}

std::size_t MeasureSpec::draw(double u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights_.size(); ++i) {
    acc += weights_[i];
    if (u < acc) return i;
  }
  return weights_.size() - 1;
}

bool MeasureSpec::all_squared_distance() const {
  for (const auto& f : support_) {
    if (f.kind() == FunctionalKind::affine) return false;
    for (const auto& a : f.atoms())
      if (a.power != 2.0) return false;
  }
  return true;
}

CertifiedConstant sampled_modulus(const FunctionalSpec& f, int samples,
                                  std::uint64_t seed) {
  // largest K consistent with the midpoint inequality over sampled geodesics
  CounterRng rng(seed);
  const GeodesicBall& G = f.region();
  double best = std::numeric_limits<double>::infinity();
  auto sample_point = [&]() { return sample_in_ball(G, rng); };
  for (int i = 0; i < samples; ++i) {
    const Point x = sample_point();
    const Point y = sample_point();
    const double d = distance(x, y);
    if (d < 1e-6) continue;
    const double t = 0.1 + 0.8 * rng.next_double();
    const Point m = geodesic_point(x, y, t);
    const double gap = (1.0 - t) * f.evaluate(x) + t * f.evaluate(y) - f.evaluate(m);
    best = std::min(best, 2.0 * gap / (t * (1.0 - t) * d * d));
  }
  if (!std::isfinite(best)) best = 0.0;
  return {best, false};
}

}  // namespace gradflow
