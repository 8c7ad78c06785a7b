#pragma once

#include <cstdint>
#include <optional>

namespace fatnode {

// Hardware description of one worker node. All memory figures are MiB.
struct NodeSpec {
    int physical_cores = 1;
    int hyperthread_ways = 1;
    std::int64_t total_ram_mib = 0;
    std::int64_t os_reserve_mib = 0;
    // Unmodeled per-process residency charged on top of each application
    // instance. 136 makes exactly 85 instances of a 900 MiB application fit
    // in 88064 MiB: floor(88064 / (900 + 136)) = 85.
    std::int64_t per_instance_overhead_mib = 136;
    // Configurations stacking more than this many threads on one core are
    // marked infeasible. Unset means no cap.
    std::optional<int> unstable_beyond_threads_per_core;

    void validate() const;  // throws ValidationError
};

// physical_cores x hyperthread_ways (the node's nproc).
int logical_processors(const NodeSpec& spec);

// total_ram - os_reserve.
std::int64_t usable_memory_mib(const NodeSpec& spec);

// usable memory split evenly over threads_used. Rejects threads_used outside
// [1, nproc].
double memory_per_thread_mib(const NodeSpec& spec, int threads_used);

// Logical processor IDs are core-major: IDs {c, c + cores, c + 2*cores, ...}
// share physical core c, so allocating ascending IDs fills one thread on
// every core before any core gets a second.
inline int core_of(const NodeSpec& spec, int processor_id) {
    return processor_id % spec.physical_cores;
}

inline int thread_slot_of(const NodeSpec& spec, int processor_id) {
    return processor_id / spec.physical_cores;
}

}  // namespace fatnode
