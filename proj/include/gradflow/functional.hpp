#ifndef GRADFLOW_FUNCTIONAL_HPP
#define GRADFLOW_FUNCTIONAL_HPP

#include <string>
#include <vector>

#include "gradflow/space.hpp"

namespace gradflow {

enum class FunctionalKind { squared_distance, distance_power, weighted_sum, affine };

std::string to_string(FunctionalKind kind);

// One term w * d(., a)^p of a functional.
struct DistanceAtom {
  Point anchor;
  double weight = 1.0;
  double power = 2.0;
};

struct CertifiedConstant {
  double value = 0.0;
  bool certified = false;  // false: sampled empirically, not proved
};

// Largest proved convexity modulus of d(., a)^2 on a region of the given
// diameter: (pi - 2 eps) tan(eps) with diam = (pi/2 - eps)/sqrt(kappa) for
// kappa > 0, and 2 for kappa <= 0.
double squared_distance_modulus(const SpaceDescriptor& space, double diam);

// Concavity constant K >= 0 with -d(., a)^2 being (-K)-convex on a region of
// the given diameter: 0 for kappa >= 0, 2 (1 - kappa diam^2) for kappa < 0.
double squared_distance_concavity(const SpaceDescriptor& space, double diam);

// A convex functional on a region G, carrying its certified convexity
// modulus K and Lipschitz constant L.
//
// Sums of distance powers are stored as atom lists; affine functionals
// (euclidean only) as slope/offset.
class FunctionalSpec {
 public:
  static FunctionalSpec SquaredDistance(Point anchor, GeodesicBall region);
  static FunctionalSpec DistancePower(Point anchor, double p, GeodesicBall region);
  static FunctionalSpec WeightedSum(std::vector<DistanceAtom> atoms,
                                    GeodesicBall region);
  static FunctionalSpec Affine(Vector slope, double offset, GeodesicBall region);

  FunctionalKind kind() const { return kind_; }
  const std::vector<DistanceAtom>& atoms() const { return atoms_; }
  const GeodesicBall& region() const { return region_; }
  const SpaceDescriptor& space() const { return region_.center.space; }
  const Vector& affine_slope() const { return affine_slope_; }
  double affine_offset() const { return affine_offset_; }

  double modulus_k() const { return modulus_k_.value; }
  bool k_certified() const { return modulus_k_.certified; }
  double lipschitz_l() const { return lipschitz_l_; }

  // Has a single-prox closed form (one squared distance or one p=1 atom).
  bool single_atom() const { return kind_ != FunctionalKind::affine && atoms_.size() == 1; }
  bool smooth_everywhere() const;

  double evaluate(const Point& x) const;
  bool in_region(const Point& x) const;

 private:
  FunctionalSpec(FunctionalKind kind, std::vector<DistanceAtom> atoms,
                 GeodesicBall region);

  FunctionalKind kind_;
  std::vector<DistanceAtom> atoms_;
  GeodesicBall region_;
  Vector affine_slope_;
  double affine_offset_ = 0.0;
  CertifiedConstant modulus_k_;
  double lipschitz_l_ = 0.0;
};

// |grad_- f|(x) together with the unit-direction descent vector of -f.
struct GradientInfo {
  double absolute_gradient = 0.0;
  TangentVector descent_direction;  // magnitude == absolute_gradient
};

double directional_derivative(const FunctionalSpec& f, const TangentVector& v);

// Gradient vector of -f at x (lower-bound spaces only). At a p=1 anchor the
// minimal-norm descent direction over the finitely many anchors is returned.
GradientInfo gradient_of_minus_f(const FunctionalSpec& f, const Point& x);

// A finitely supported probability measure on K-convex functionals sharing
// one region G. The common modulus is the minimum over the support; it must
// be certified and positive.
class MeasureSpec {
 public:
  MeasureSpec(std::vector<FunctionalSpec> support, std::vector<double> weights);

  const std::vector<FunctionalSpec>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  const GeodesicBall& region() const { return support_[0].region(); }
  double common_k() const { return common_k_; }
  double common_l() const { return common_l_; }

  // The weighted-average functional g = sum_i w_i f_i (atom-level merge).
  FunctionalSpec mean_functional() const;

  // Draw an index from the weights using one uniform variate.
  std::size_t draw(double u) const;

  bool all_squared_distance() const;

 private:
  std::vector<FunctionalSpec> support_;
  std::vector<double> weights_;
  double common_k_ = 0.0;
  double common_l_ = 0.0;
};

// Empirical near-maximal K for functionals without a proved constant:
// minimizes the midpoint-inequality defect over sampled geodesics.
CertifiedConstant sampled_modulus(const FunctionalSpec& f, int samples,
                                  std::uint64_t seed);

}  // namespace gradflow

#endif
