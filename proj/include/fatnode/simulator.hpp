#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fatnode/matcher.hpp"
#include "fatnode/node.hpp"
#include "fatnode/workload.hpp"

namespace fatnode {

enum class OomPolicy { kill_largest, kill_newest };

std::string to_string(OomPolicy policy);
OomPolicy oom_policy_from_string(const std::string& name);  // throws ValidationError

struct SimJob {
    JobDescriptor descriptor;
    ApplicationProfile profile;
    std::int64_t events_requested = 1;
};

struct SimConfig {
    NodeSpec node;
    QueueDescriptor queue;
    std::vector<SimJob> jobs;  // queue order
    std::uint64_t seed = 0;
    OomPolicy oom_policy = OomPolicy::kill_largest;
    double horizon_minutes = 0.0;
    // > 0 scatters arrivals uniformly over [0, jitter] using the seed;
    // 0 starts every job at t = 0 and leaves the seed unused.
    double arrival_jitter_minutes = 0.0;

    void validate() const;  // throws ValidationError
};

enum class SimEventKind {
    job_started,
    events_completed,
    oom_kill,
    job_finished,
    job_rejected,
};

std::string to_string(SimEventKind kind);

struct SimEvent {
    double t_min = 0.0;
    SimEventKind kind = SimEventKind::job_started;
    std::string job_id;
    // Payload; which fields are meaningful depends on kind.
    std::int64_t completed = 0;   // events_completed (cumulative), job_finished (total)
    std::string reason;           // job_rejected, oom_kill
    std::vector<int> processors;  // job_started
    int workers = 0;              // job_started
};

enum class JobFate { finished, oom_killed, rejected, running_at_horizon, never_started };

std::string to_string(JobFate fate);

struct JobOutcome {
    std::string job_id;
    JobFate fate = JobFate::never_started;
    std::int64_t events_completed = 0;
};

struct SimReport {
    std::int64_t total_events = 0;
    double span_min = 0.0;
    double throughput_epm = 0.0;  // total_events / span (0 when span is 0)
    double peak_memory_mib = 0.0; // after OOM resolution
    std::vector<JobOutcome> jobs;
};

struct SimResult {
    std::vector<SimEvent> trace;
    SimReport report;
};

// Deterministic discrete-event run of one pilot on one node: admission via
// the matcher, piecewise-constant event rates recomputed at every occupancy
// change, OOM kills whenever resident memory exceeds the usable budget.
// Identical configs produce byte-identical traces.
SimResult run(const SimConfig& config);

// Runs the config twice and compares traces element-wise.
bool replay_check(const SimConfig& config);

// One JSON object per line, keys t_min / kind / job_id / detail.
std::string trace_to_jsonl(const std::vector<SimEvent>& trace);

}  // namespace fatnode
