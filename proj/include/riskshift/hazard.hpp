#pragma once

// Common interface for anything that can answer "hazard of event E at step k
// for covariates x in arm a" — fitted grids and exact DGPs both implement it,
// so risk and effect computations run unchanged on either.

#include <span>

#include "riskshift/data.hpp"

namespace riskshift {

class HazardSource {
public:
    virtual ~HazardSource() = default;
    virtual double hazard(EventType event, int k, std::span<const double> x,
                          int a) const = 0;
};

// A DGP additionally knows the treatment assignment mechanism; true
// importance weights need the propensity and the competing hazard.
class TrueDgp : public HazardSource {
public:
    virtual double propensity(std::span<const double> x) const = 0;
};

}  // namespace riskshift
