#pragma once

#include <string>
#include <vector>

#include "fatnode/node.hpp"
#include "fatnode/workload.hpp"

namespace fatnode {

struct CalibrationObservation {
    InstanceConfig config;
    double total_rate_epm = 0.0;
};

struct CalibrationResult {
    ApplicationProfile profile;
    double rms_relative_residual = 0.0;
    double max_relative_residual = 0.0;
};

// Free parameter names accepted by calibrate():
//   "single_thread_rate_epm", "mp_overhead", "ht_scaling[t]" with t >= 2.
//
// Fits the named parameters of `base` so that configuration_throughput
// reproduces the observed rates, minimizing the sum of squared relative
// errors (rates span very different magnitudes across node classes).
// Throws UnderdeterminedError when there are fewer observations than free
// parameters, and ValidationError when a name is unknown or the fitted
// profile violates its own invariants.
CalibrationResult calibrate(const NodeSpec& spec,
                            const ApplicationProfile& base,
                            const std::vector<std::string>& free_params,
                            const std::vector<CalibrationObservation>& observations);

}  // namespace fatnode
