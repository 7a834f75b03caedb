// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cad {

struct SelftestCase {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Quick identity and oracle checks against dense reference computations.
std::vector<SelftestCase> run_selftest(std::uint64_t seed = 7);

}  // namespace cad
