#pragma once

#include <memory>
#include <numbers>
#include <vector>

#include "maglab/domain.hpp"
#include "maglab/group.hpp"

namespace maglab {

/// Largest bump radius accepted by field constructors; below half the systole,
/// so each bump meets finitely many (and precomputed) translates of the domain.
inline constexpr double kMaxBumpRadius = 1.0;

/// The closed genus-2 surface: group, fundamental domain and the cached
/// neighbourhood of group elements needed to evaluate invariant fields.
class Surface {
 public:
  explicit Surface(DomainOptions domain_opts = {}) : group_(standard_group()), domain_(domain_opts) {
    const double reach = 2.0 * domain_.circumradius() + kMaxBumpRadius + 0.05;
    neighborhood_ = enumerate_group(group_, reach);
  }

  const FuchsianGroup& group() const { return group_; }
  const FundamentalDomain& domain() const { return domain_; }
  const std::vector<GroupElement>& neighborhood() const { return neighborhood_; }

  std::pair<Point, MobiusTransform> normalize(Point z) const { return group_.normalize(z); }

  /// Every translate g c that lies within `radius` of some point of the
  /// (slightly enlarged) octagon.
  std::vector<Point> translates_near_domain(Point center, double radius) const {
    require_in_disk(center, "translates_near_domain");
    const Point c0 = normalize(center).first;
    const double limit = domain_.circumradius() + radius + 0.02;
    std::vector<Point> out;
    for (const auto& g : neighborhood_) {
      const Point t = g.matrix.apply_unchecked(c0);
      if (hyperbolic_distance(0.0, t) <= limit) out.push_back(t);
    }
    return out;
  }

 private:
  FuchsianGroup group_;
  FundamentalDomain domain_;
  std::vector<GroupElement> neighborhood_;
};

using SurfacePtr = std::shared_ptr<const Surface>;

inline SurfacePtr make_surface(DomainOptions opts = {}) { return std::make_shared<const Surface>(opts); }

}  // namespace maglab
