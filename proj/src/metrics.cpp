// SPDX-License-Identifier: Apache-2.0
#include "cad/metrics.hpp"

namespace cad {

DetectionError detection_error(const ActivityPattern& truth, const ActivityPattern& estimate) {
    if (truth.indicators.size() != estimate.indicators.size())
        throw DomainError("activity patterns differ in length");
    long act = 0, inact = 0, miss = 0, fa = 0;
    for (std::size_t n = 0; n < truth.indicators.size(); ++n) {
        if (truth.indicators[n]) {
            ++act;
            if (!estimate.indicators[n]) ++miss;
        } else {
            ++inact;
            if (estimate.indicators[n]) ++fa;
        }
    }
    DetectionError e;
    // a vacuous probability contributes nothing
    if (act) e.miss = static_cast<double>(miss) / static_cast<double>(act);
    if (inact) e.false_alarm = static_cast<double>(fa) / static_cast<double>(inact);
    return e;
}

double compute_aer(const ActivityPattern& truth, const ActivityPattern& estimate) {
    return detection_error(truth, estimate).aer();
}

}  // namespace cad
