#pragma once

#include <vector>

#include "rootflow/family.hpp"
#include "rootflow/measure.hpp"

namespace rootflow::catalog {

/// Closed-form quantile of a family, evaluated at p in (0,1).
double family_quantile(const FamilyTag& tag, double p);
/// Same, with pc = 1 - p given separately (kept accurate near p = 1).
double family_quantile(const FamilyTag& tag, double p, double pc);

/// Closed-form radial CDF of a family (the formulas the quantiles invert).
double family_cdf(const FamilyTag& tag, double r);

/// Throws ErrorCode::domain when a parameter is out of range.
void validate(const FamilyTag& tag);

RadialQuantile make(const FamilyTag& tag, std::vector<double> grid);
RadialQuantile make(const FamilyTag& tag);

/// Root measure with a pure power-law tail, Q(p) = (1-p)^-(2/alpha - 1).
/// Not a catalog family; used as the heavy-tailed input of the limit theorems.
RadialQuantile pareto_tail(double alpha, std::vector<double> grid);
RadialQuantile pareto_tail(double alpha);

}  // namespace rootflow::catalog
