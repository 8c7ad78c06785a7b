#pragma once

#include <string>
#include <vector>

#include "fatnode/node.hpp"

namespace fatnode {

// Memory and throughput parameters of one application on one node class.
struct ApplicationProfile {
    // Resident memory of a single-process instance.
    double sp_footprint_mib = 0.0;
    // Fraction of sp_footprint shared among forked workers via copy-on-write.
    double shared_fraction = 0.3;
    // Extra residency of the multi-process master.
    double master_overhead_mib = 0.0;
    // Fractional throughput loss of an MP instance relative to SP.
    double mp_overhead = 0.0;
    // Events per minute of one worker on an otherwise idle physical core.
    double single_thread_rate_epm = 0.0;
    // Per-core speedup sigma(t) for t busy threads on one core, indexed from
    // t=1. sigma(1) must be 1. Queries past the end clamp to the last entry.
    std::vector<double> ht_scaling{1.0};

    double sigma(int threads_per_core) const;
    void validate() const;  // throws ValidationError
};

struct InstanceConfig {
    int instances = 1;            // parallel application instances
    int workers_per_instance = 1; // 1 = SP, >1 = MP with that many workers

    int total_threads() const { return instances * workers_per_instance; }
};

enum class Infeasibility {
    none,
    exceeds_nproc,      // threads > logical processors
    exceeds_thread_cap, // more threads per core than the stability cap
    exceeds_memory,     // peak memory > usable memory
};

std::string infeasibility_reason(Infeasibility reason, const NodeSpec& spec);

struct ThroughputEstimate {
    double total_rate_epm = 0.0;
    double per_thread_rate_epm = 0.0;
    double peak_memory_mib = 0.0;
    bool feasible = false;
    Infeasibility reason = Infeasibility::none;
};

// Resident memory of one instance. workers == 1 is the plain SP footprint;
// otherwise the master plus one shared copy-on-write block plus per-worker
// private pages.
double instance_memory_mib(const ApplicationProfile& profile, int workers);

// instances x (instance memory + the node's per-instance overhead).
double configuration_memory_mib(const ApplicationProfile& profile,
                                const InstanceConfig& config,
                                const NodeSpec& spec);

// Steady-state node throughput with threads placed core-major (every core
// gets one thread before any core gets two). Infeasible configurations still
// carry the modeled rate; callers read `feasible` and `reason`.
ThroughputEstimate configuration_throughput(const ApplicationProfile& profile,
                                            const InstanceConfig& config,
                                            const NodeSpec& spec);

}  // namespace fatnode
