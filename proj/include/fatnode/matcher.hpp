#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fatnode/node.hpp"
#include "fatnode/processor_set.hpp"
#include "fatnode/workload.hpp"

namespace fatnode {

enum class JobMode { single_only, multi_only, flexible };

std::string to_string(JobMode mode);
JobMode job_mode_from_string(const std::string& name);  // throws ValidationError

// One job's processor requirements, as the pilot sees them.
struct JobDescriptor {
    std::string job_id;
    JobMode mode = JobMode::flexible;
    std::optional<int> exact_processors;
    std::optional<int> max_processors;
    bool whole_node = false;
    // Expected peak residency; enables the optional memory admission gate.
    std::optional<double> memory_hint_mib;

    void validate() const;  // throws ValidationError
};

// What the resource provider's queue accepts and exposes.
struct QueueDescriptor {
    bool allow_single = true;
    bool allow_multi = false;
    bool require_job_type_tag = false;  // flexible jobs are refused
    bool require_exact_count = false;   // jobs must state exact_processors
    bool whole_node_only = false;
    int slot_processors = 0;  // nproc exposed per slot
    std::optional<int> max_concurrent_jobs;

    void validate() const;  // throws ValidationError
};

struct MatchVerdict {
    bool ok = false;
    std::string reason;  // names the first failed rule; empty when ok
};

// Pure rule check: can this job run on this queue given `free_processors`
// currently unallocated logical processors?
MatchVerdict can_match(const JobDescriptor& job, const QueueDescriptor& queue,
                       int free_processors);

// Number of processors the job receives once matched. Precondition:
// can_match(...) is ok; violations throw std::logic_error.
int allocation_size(const JobDescriptor& job, const QueueDescriptor& queue,
                    int free_processors);

// Disjoint assignment of processor sets to jobs on one node.
struct Allocation {
    int nproc = 0;
    std::map<std::string, ProcessorSet> by_job;
    ProcessorSet free;
    // Memory-gated admissions: job id -> admitted memory hint.
    std::map<std::string, double> hinted_mib;

    static Allocation empty_node(const NodeSpec& spec);

    double hinted_total_mib() const;
    // Pairwise disjointness, union = full node set, sizes > 0.
    void check_invariants() const;  // throws std::logic_error
};

struct Rejection {
    std::string job_id;
    std::string reason;
};

struct MatchOutcome {
    Allocation allocation;
    std::vector<Rejection> rejections;
};

// Admit one job onto an existing allocation, applying the concurrency cap,
// can_match, and (when a profile is supplied and the job carries a hint) the
// memory gate. Grants the allocation_size lowest free processor IDs.
struct AdmitResult {
    bool admitted = false;
    std::string reason;
    ProcessorSet granted;
};
AdmitResult try_admit(Allocation& allocation, const JobDescriptor& job,
                      const QueueDescriptor& queue, const NodeSpec& spec,
                      const std::optional<ApplicationProfile>& profile);

// Greedy FIFO admission over the whole queue. Deterministic: identical
// inputs yield identical allocations. Rejections are data, not errors.
MatchOutcome pool_match(const std::vector<JobDescriptor>& jobs,
                        const QueueDescriptor& queue, const NodeSpec& spec,
                        const std::optional<ApplicationProfile>& profile = {},
                        const Allocation* base = nullptr);

// Returns the job's processors to the free set. Unknown id throws
// ValidationError.
Allocation release(const Allocation& allocation, const std::string& job_id);

}  // namespace fatnode
