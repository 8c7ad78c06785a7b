#include "fatnode/node.hpp"

#include <string>

#include "fatnode/errors.hpp"

namespace fatnode {

void NodeSpec::validate() const {
    if (physical_cores < 1)
        throw ValidationError("node.physical_cores: must be >= 1, got " +
                              std::to_string(physical_cores));
    if (hyperthread_ways < 1)
        throw ValidationError("node.hyperthread_ways: must be >= 1, got " +
                              std::to_string(hyperthread_ways));
    if (total_ram_mib <= 0)
        throw ValidationError("node.total_ram_mib: must be > 0, got " +
                              std::to_string(total_ram_mib));
    if (os_reserve_mib < 0)
        throw ValidationError("node.os_reserve_mib: must be >= 0, got " +
                              std::to_string(os_reserve_mib));
    if (os_reserve_mib >= total_ram_mib)
        throw ValidationError("node.os_reserve_mib: must be < total_ram_mib (" +
                              std::to_string(os_reserve_mib) + " >= " +
                              std::to_string(total_ram_mib) + ")");
    if (per_instance_overhead_mib < 0)
        throw ValidationError("node.per_instance_overhead_mib: must be >= 0, got " +
                              std::to_string(per_instance_overhead_mib));
    if (unstable_beyond_threads_per_core && *unstable_beyond_threads_per_core < 1)
        throw ValidationError("node.unstable_beyond_threads_per_core: must be >= 1, got " +
                              std::to_string(*unstable_beyond_threads_per_core));
}

int logical_processors(const NodeSpec& spec) {
    return spec.physical_cores * spec.hyperthread_ways;
}

std::int64_t usable_memory_mib(const NodeSpec& spec) {
    return spec.total_ram_mib - spec.os_reserve_mib;
}

double memory_per_thread_mib(const NodeSpec& spec, int threads_used) {
    const int nproc = logical_processors(spec);
    if (threads_used < 1 || threads_used > nproc)
        throw ValidationError("threads_used: must be in [1, " + std::to_string(nproc) +
                              "], got " + std::to_string(threads_used));
    return static_cast<double>(usable_memory_mib(spec)) / threads_used;
}

}  // namespace fatnode
