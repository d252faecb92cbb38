#pragma once

#include <string>
#include <vector>

#include "sdr/config.hpp"

namespace sdr {

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Invariant suites: unitary-limit trace preservation, trace monotonicity,
// projector algebra, total-m conservation, steady-state residuals and
// closed forms, integrator step-halving, seeded-rerun determinism, ensemble
// convergence and echo exactness.
std::vector<SuiteResult> run_selfcheck(const Config& cfg);

}  // namespace sdr
