#pragma once

// The acceptance suite: thirteen criteria, each a deterministic run with its
// thresholds fixed here. Shared by the acceptance test binary and the CLI.

#include "vpatch/report.hpp"

#include <string>

namespace vpatch {

inline constexpr int kAcceptanceCriteria = 13;

/// Scenario name of criterion id (1-based), e.g. "acceptance_05_angle_rigidity".
std::string acceptance_name(int id);

/// Inverse of acceptance_name; 0 for any other string.
int acceptance_id(const std::string& name);

/// Runs criterion id. Numerical failures are caught and reported as failed runs.
RunReport run_acceptance(int id);

}  // namespace vpatch
