// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cad/network.hpp"

namespace cad {

struct DetectionError {
    double miss = 0;         // fraction of active devices declared inactive
    double false_alarm = 0;  // fraction of inactive devices declared active
    double aer() const { return miss + false_alarm; }
};

DetectionError detection_error(const ActivityPattern& truth, const ActivityPattern& estimate);
double compute_aer(const ActivityPattern& truth, const ActivityPattern& estimate);

}  // namespace cad
