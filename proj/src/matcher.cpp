#include "fatnode/matcher.hpp"

#include <algorithm>
#include <stdexcept>

#include "fatnode/errors.hpp"

namespace fatnode {

std::string to_string(JobMode mode) {
    switch (mode) {
        case JobMode::single_only: return "single_only";
        case JobMode::multi_only: return "multi_only";
        case JobMode::flexible: return "flexible";
    }
    return "?";
}

JobMode job_mode_from_string(const std::string& name) {
    if (name == "single_only") return JobMode::single_only;
    if (name == "multi_only") return JobMode::multi_only;
    if (name == "flexible") return JobMode::flexible;
    throw ValidationError("job.mode: unknown mode '" + name +
                          "' (expected single_only, multi_only, or flexible)");
}

void JobDescriptor::validate() const {
    if (job_id.empty()) throw ValidationError("job.job_id: must not be empty");
    if (exact_processors && max_processors)
        throw ValidationError("job '" + job_id +
                              "': exact_processors and max_processors cannot both be set");
    if (exact_processors && *exact_processors < 1)
        throw ValidationError("job '" + job_id + "': exact_processors must be >= 1");
    if (max_processors && *max_processors < 1)
        throw ValidationError("job '" + job_id + "': max_processors must be >= 1");
    if (memory_hint_mib && *memory_hint_mib < 0)
        throw ValidationError("job '" + job_id + "': memory_hint_mib must be >= 0");
    if (mode == JobMode::single_only) {
        if (exact_processors && *exact_processors != 1)
            throw ValidationError("job '" + job_id +
                                  "': single_only jobs may only request exactly 1 processor");
        if (whole_node)
            throw ValidationError("job '" + job_id +
                                  "': single_only jobs cannot be whole-node");
    }
    if (mode == JobMode::multi_only) {
        if (exact_processors && *exact_processors < 2)
            throw ValidationError("job '" + job_id +
                                  "': multi_only jobs need at least 2 processors");
        if (max_processors && *max_processors < 2)
            throw ValidationError("job '" + job_id +
                                  "': multi_only jobs need at least 2 processors");
    }
}

void QueueDescriptor::validate() const {
    if (!allow_single && !allow_multi)
        throw ValidationError("queue: must allow single or multi processor jobs");
    if (whole_node_only && !allow_multi)
        throw ValidationError("queue: whole_node_only requires allow_multi");
    if (slot_processors < 1)
        throw ValidationError("queue.slot_processors: must be >= 1, got " +
                              std::to_string(slot_processors));
    if (max_concurrent_jobs && *max_concurrent_jobs < 1)
        throw ValidationError("queue.max_concurrent_jobs: must be >= 1");
}

MatchVerdict can_match(const JobDescriptor& job, const QueueDescriptor& queue,
                       int free_processors) {
    // Rules are checked in a fixed order; the reason names the first failure.
    if (job.mode == JobMode::single_only && !queue.allow_single)
        return {false, "single-processor jobs not allowed"};
    if (job.mode == JobMode::multi_only && !queue.allow_multi)
        return {false, "multi-processor jobs not allowed"};
    if (queue.require_job_type_tag && job.mode == JobMode::flexible)
        return {false, "job type tag required"};
    if (queue.require_exact_count && !job.exact_processors)
        return {false, "exact processor count required"};
    if (queue.whole_node_only && !job.whole_node)
        return {false, "whole-node jobs only"};
    if (job.whole_node && free_processors != queue.slot_processors)
        return {false, "node not empty"};

    int needed = 1;
    if (job.whole_node)
        needed = queue.slot_processors;
    else if (job.exact_processors)
        needed = *job.exact_processors;
    else if (job.mode == JobMode::multi_only)
        needed = 2;
    else if (job.mode == JobMode::flexible && !queue.allow_single) {
        // Must run as a multi-processor job here; a cap below 2 means it
        // could only ever execute single-processor.
        if (job.max_processors && *job.max_processors < 2)
            return {false, "single-processor jobs not allowed"};
        needed = 2;
    }
    if (needed > free_processors) {
        if (free_processors == 0) return {false, "no free processors"};
        return {false, "insufficient free processors"};
    }
    return {true, ""};
}

int allocation_size(const JobDescriptor& job, const QueueDescriptor& queue,
                    int free_processors) {
    const MatchVerdict verdict = can_match(job, queue, free_processors);
    if (!verdict.ok)
        throw std::logic_error("allocation_size precondition violated: " + verdict.reason);
    if (job.whole_node) return queue.slot_processors;
    if (job.exact_processors) return *job.exact_processors;
    if (job.mode == JobMode::single_only) return 1;
    // Flexible and unsized multi jobs take as much as the queue permits.
    if (!queue.allow_multi) return 1;
    return std::min(free_processors, job.max_processors.value_or(free_processors));
}

Allocation Allocation::empty_node(const NodeSpec& spec) {
    spec.validate();
    Allocation a;
    a.nproc = logical_processors(spec);
    a.free = ProcessorSet::full(a.nproc);
    return a;
}

double Allocation::hinted_total_mib() const {
    double total = 0.0;
    for (const auto& [id, mib] : hinted_mib) total += mib;
    return total;
}

void Allocation::check_invariants() const {
    ProcessorSet seen(nproc);
    for (const auto& [id, procs] : by_job) {
        if (procs.count() == 0)
            throw std::logic_error("allocation invariant: job '" + id + "' holds no processors");
        if (!seen.disjoint_with(procs))
            throw std::logic_error("allocation invariant: overlapping processor sets");
        seen.unite(procs);
    }
    if (!seen.disjoint_with(free))
        throw std::logic_error("allocation invariant: free set overlaps an allocation");
    seen.unite(free);
    if (!(seen == ProcessorSet::full(nproc)))
        throw std::logic_error("allocation invariant: allocations plus free do not cover the node");
}

AdmitResult try_admit(Allocation& allocation, const JobDescriptor& job,
                      const QueueDescriptor& queue, const NodeSpec& spec,
                      const std::optional<ApplicationProfile>& profile) {
    if (allocation.by_job.count(job.job_id))
        return {false, "duplicate job id", ProcessorSet(allocation.nproc)};
    if (queue.max_concurrent_jobs &&
        static_cast<int>(allocation.by_job.size()) >= *queue.max_concurrent_jobs)
        return {false, "concurrency cap", ProcessorSet(allocation.nproc)};
    const MatchVerdict verdict = can_match(job, queue, allocation.free.count());
    if (!verdict.ok) return {false, verdict.reason, ProcessorSet(allocation.nproc)};
    if (profile && job.memory_hint_mib) {
        const double budget = static_cast<double>(usable_memory_mib(spec));
        if (allocation.hinted_total_mib() + *job.memory_hint_mib > budget)
            return {false, "memory budget exceeded", ProcessorSet(allocation.nproc)};
    }
    const int size = allocation_size(job, queue, allocation.free.count());
    ProcessorSet granted = allocation.free.take_lowest(size);
    allocation.by_job.emplace(job.job_id, granted);
    if (profile && job.memory_hint_mib)
        allocation.hinted_mib.emplace(job.job_id, *job.memory_hint_mib);
    return {true, "", granted};
}

MatchOutcome pool_match(const std::vector<JobDescriptor>& jobs,
                        const QueueDescriptor& queue, const NodeSpec& spec,
                        const std::optional<ApplicationProfile>& profile,
                        const Allocation* base) {
    spec.validate();
    queue.validate();
    for (const auto& job : jobs) job.validate();
    if (profile) profile->validate();

    MatchOutcome outcome;
    outcome.allocation = base ? *base : Allocation::empty_node(spec);
    if (outcome.allocation.nproc != logical_processors(spec))
        throw ValidationError("pool_match: base allocation does not match the node");

    for (const auto& job : jobs) {
        const AdmitResult result = try_admit(outcome.allocation, job, queue, spec, profile);
        if (!result.admitted) outcome.rejections.push_back({job.job_id, result.reason});
    }
    return outcome;
}

Allocation release(const Allocation& allocation, const std::string& job_id) {
    const auto it = allocation.by_job.find(job_id);
    if (it == allocation.by_job.end())
        throw ValidationError("release: unknown job id '" + job_id + "'");
    Allocation next = allocation;
    next.free.unite(next.by_job.at(job_id));
    next.by_job.erase(job_id);
    next.hinted_mib.erase(job_id);
    return next;
}

}  // namespace fatnode
