#include "fatnode/workload.hpp"

#include <string>

#include "fatnode/errors.hpp"

namespace fatnode {

double ApplicationProfile::sigma(int threads_per_core) const {
    if (threads_per_core < 1)
        throw ValidationError("sigma: threads_per_core must be >= 1, got " +
                              std::to_string(threads_per_core));
    const std::size_t idx = static_cast<std::size_t>(threads_per_core) - 1;
    if (idx >= ht_scaling.size()) return ht_scaling.back();
    return ht_scaling[idx];
}

void ApplicationProfile::validate() const {
    if (!(sp_footprint_mib > 0.0))
        throw ValidationError("profile.sp_footprint_mib: must be > 0, got " +
                              std::to_string(sp_footprint_mib));
    if (shared_fraction < 0.0 || shared_fraction > 1.0)
        throw ValidationError("profile.shared_fraction: must be in [0, 1], got " +
                              std::to_string(shared_fraction));
    if (master_overhead_mib < 0.0)
        throw ValidationError("profile.master_overhead_mib: must be >= 0, got " +
                              std::to_string(master_overhead_mib));
    if (mp_overhead < 0.0 || mp_overhead >= 1.0)
        throw ValidationError("profile.mp_overhead: must be in [0, 1), got " +
                              std::to_string(mp_overhead));
    if (single_thread_rate_epm < 0.0)
        throw ValidationError("profile.single_thread_rate_epm: must be >= 0, got " +
                              std::to_string(single_thread_rate_epm));
    if (ht_scaling.empty())
        throw ValidationError("profile.ht_scaling: must have at least one entry");
    if (ht_scaling.front() != 1.0)
        throw ValidationError("profile.ht_scaling: sigma(1) must be 1, got " +
                              std::to_string(ht_scaling.front()));
    for (std::size_t i = 0; i < ht_scaling.size(); ++i) {
        if (!(ht_scaling[i] > 0.0))
            throw ValidationError("profile.ht_scaling[" + std::to_string(i + 1) +
                                  "]: must be > 0");
        if (i > 0) {
            if (ht_scaling[i] < ht_scaling[i - 1])
                throw ValidationError("profile.ht_scaling: sigma must be non-decreasing");
            // efficiency sigma(t)/t must never improve with more threads
            if (ht_scaling[i] / static_cast<double>(i + 1) >
                ht_scaling[i - 1] / static_cast<double>(i) + 1e-12)
                throw ValidationError(
                    "profile.ht_scaling: sigma(t)/t must be non-increasing");
        }
    }
}

double instance_memory_mib(const ApplicationProfile& profile, int workers) {
    if (workers < 1)
        throw ValidationError("workers: must be >= 1, got " + std::to_string(workers));
    if (workers == 1) return profile.sp_footprint_mib;
    const double shared = profile.shared_fraction * profile.sp_footprint_mib;
    const double private_per_worker =
        (1.0 - profile.shared_fraction) * profile.sp_footprint_mib;
    return profile.master_overhead_mib + shared + workers * private_per_worker;
}

double configuration_memory_mib(const ApplicationProfile& profile,
                                const InstanceConfig& config, const NodeSpec& spec) {
    const double per_instance =
        instance_memory_mib(profile, config.workers_per_instance) +
        static_cast<double>(spec.per_instance_overhead_mib);
    return config.instances * per_instance;
}

std::string infeasibility_reason(Infeasibility reason, const NodeSpec& spec) {
    switch (reason) {
        case Infeasibility::none:
            return "";
        case Infeasibility::exceeds_nproc:
            return "threads exceed logical processors";
        case Infeasibility::exceeds_thread_cap:
            return "threads per core exceed stability cap " +
                   std::to_string(spec.unstable_beyond_threads_per_core.value_or(0));
        case Infeasibility::exceeds_memory:
            return "peak memory exceeds usable memory";
    }
    return "";
}

ThroughputEstimate configuration_throughput(const ApplicationProfile& profile,
                                            const InstanceConfig& config,
                                            const NodeSpec& spec) {
    if (config.instances < 1 || config.workers_per_instance < 1)
        throw ValidationError("configuration: instances and workers must be >= 1");

    const int cores = spec.physical_cores;
    const int nproc = logical_processors(spec);
    const int threads = config.total_threads();

    // Core-major placement: thread slot s covers IDs [s*cores, (s+1)*cores),
    // so T threads give the first T % cores cores one extra thread.
    const int base = threads / cores;
    const int extra_cores = threads % cores;

    double per_core_sum = 0.0;
    for (int c = 0; c < cores; ++c) {
        const int t = base + (c < extra_cores ? 1 : 0);
        if (t >= 1) per_core_sum += profile.sigma(t);
    }

    double total = profile.single_thread_rate_epm * per_core_sum;
    if (config.workers_per_instance > 1) total *= (1.0 - profile.mp_overhead);

    ThroughputEstimate estimate;
    estimate.total_rate_epm = total;
    estimate.per_thread_rate_epm = total / threads;
    estimate.peak_memory_mib = configuration_memory_mib(profile, config, spec);

    const int max_threads_per_core = base + (extra_cores > 0 ? 1 : 0);
    if (threads > nproc) {
        estimate.reason = Infeasibility::exceeds_nproc;
    } else if (spec.unstable_beyond_threads_per_core &&
               max_threads_per_core > *spec.unstable_beyond_threads_per_core) {
        estimate.reason = Infeasibility::exceeds_thread_cap;
    } else if (estimate.peak_memory_mib >
               static_cast<double>(usable_memory_mib(spec))) {
        estimate.reason = Infeasibility::exceeds_memory;
    }
    estimate.feasible = estimate.reason == Infeasibility::none;
    return estimate;
}

}  // namespace fatnode
