#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rootflow {

/// Closed-form rotationally invariant measures. Parameters not used by a
/// kind are ignored.
struct FamilyTag {
  enum class Kind {
    UnitCircle,
    TaylorDisk,
    CircularBrown,
    HaarSum,            // k > 1
    CompressedUnitary,  // lambda in (0,1)
    KacDerivative,      // t in (0,1)
    Stable,             // alpha in (0,2], theta > 0
    CommutatorCirculars,
    EllipticLimit,      // w >= 0
  };

  Kind kind = Kind::UnitCircle;
  double k = 2.0;
  double lambda = 0.5;
  double t = 0.5;
  double alpha = 2.0;
  double theta = 1.0;
  double w = 0.0;

  static FamilyTag unit_circle() { return {Kind::UnitCircle}; }
  static FamilyTag taylor_disk() { return {Kind::TaylorDisk}; }
  static FamilyTag circular_brown() { return {Kind::CircularBrown}; }
  static FamilyTag haar_sum(double k) {
    FamilyTag f{Kind::HaarSum};
    f.k = k;
    return f;
  }
  static FamilyTag compressed_unitary(double lambda) {
    FamilyTag f{Kind::CompressedUnitary};
    f.lambda = lambda;
    return f;
  }
  static FamilyTag kac_derivative(double t) {
    FamilyTag f{Kind::KacDerivative};
    f.t = t;
    return f;
  }
  static FamilyTag stable(double alpha, double theta = 1.0) {
    FamilyTag f{Kind::Stable};
    f.alpha = alpha;
    f.theta = theta;
    return f;
  }
  static FamilyTag commutator_circulars() { return {Kind::CommutatorCirculars}; }
  static FamilyTag elliptic_limit(double w) {
    FamilyTag f{Kind::EllipticLimit};
    f.w = w;
    return f;
  }

  /// Canonical text form, e.g. "haar-sum:k=2" or "stable:alpha=1,theta=1".
  std::string to_string() const;

  /// Parses the canonical form. `params` may also be given separately as
  /// "k=2" or positional "2" values.
  static FamilyTag parse(std::string_view name, std::string_view params = {});

  bool operator==(const FamilyTag&) const = default;
};

/// Names accepted by FamilyTag::parse, in catalog order.
std::vector<std::string> family_names();

}  // namespace rootflow
