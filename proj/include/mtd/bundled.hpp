#pragma once

#include "mtd/scenario.hpp"

#include <string>
#include <vector>

namespace mtd::bundled {

/// Fixed sublayer 1 under a persistent three-link attack (one selfloop
/// included); expected to diverge.
scenario::Scenario fig3();

/// Fast round-robin mutation of all five sublayers under the rolling
/// sublayer-5..1 attack timeline plus the permanent high-risk blocks;
/// expected ISS-bounded.
scenario::Scenario fig4();

/// Disturbance-free, attack-free switching run for the exponential envelope.
scenario::Scenario decay();

/// One switch per integration step, disturbances on, no attack.
scenario::Scenario fast_switching();

std::vector<std::string> names();
scenario::Scenario by_name(const std::string& name);

}  // namespace mtd::bundled
