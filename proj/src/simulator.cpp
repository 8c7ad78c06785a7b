#include "fatnode/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "fatnode/errors.hpp"

namespace fatnode {

namespace {
constexpr double kInfinity = std::numeric_limits<double>::infinity();
}

std::string to_string(OomPolicy policy) {
    return policy == OomPolicy::kill_largest ? "kill_largest" : "kill_newest";
}

OomPolicy oom_policy_from_string(const std::string& name) {
    if (name == "kill_largest") return OomPolicy::kill_largest;
    if (name == "kill_newest") return OomPolicy::kill_newest;
    throw ValidationError("oom_policy: unknown policy '" + name +
                          "' (expected kill_largest or kill_newest)");
}

std::string to_string(SimEventKind kind) {
    switch (kind) {
        case SimEventKind::job_started: return "job_started";
        case SimEventKind::events_completed: return "events_completed";
        case SimEventKind::oom_kill: return "oom_kill";
        case SimEventKind::job_finished: return "job_finished";
        case SimEventKind::job_rejected: return "job_rejected";
    }
    return "?";
}

std::string to_string(JobFate fate) {
    switch (fate) {
        case JobFate::finished: return "finished";
        case JobFate::oom_killed: return "oom_killed";
        case JobFate::rejected: return "rejected";
        case JobFate::running_at_horizon: return "running_at_horizon";
        case JobFate::never_started: return "never_started";
    }
    return "?";
}

void SimConfig::validate() const {
    node.validate();
    queue.validate();
    if (!(horizon_minutes > 0.0))
        throw ValidationError("horizon_minutes: must be > 0, got " +
                              std::to_string(horizon_minutes));
    if (arrival_jitter_minutes < 0.0)
        throw ValidationError("arrival_jitter_minutes: must be >= 0");
    for (const auto& job : jobs) {
        job.descriptor.validate();
        job.profile.validate();
        if (job.events_requested < 1)
            throw ValidationError("job '" + job.descriptor.job_id +
                                  "': events_requested must be >= 1");
    }
}

namespace {

struct LiveJob {
    std::size_t index = 0;  // queue position
    double arrival_min = 0.0;
    bool running = false;
    std::int64_t completed = 0;
    double event_fraction = 0.0;   // progress into the current event, [0, 1)
    double rate_epm = 0.0;
    double completion_at = kInfinity;  // absolute time of the next event completion
    double residency_mib = 0.0;
    int workers = 0;
    ProcessorSet procs;
    JobFate fate = JobFate::never_started;
};

class Simulation {
public:
    explicit Simulation(const SimConfig& config)
        : config_(config),
          nproc_(logical_processors(config.node)),
          usable_mib_(static_cast<double>(usable_memory_mib(config.node))),
          allocation_(Allocation::empty_node(config.node)) {}

    SimResult run() {
        init_arrivals();

        double now = 0.0;
        if (process_arrivals_at(now)) {
            resolve_oom(now);
            recompute_rates(now);
        }

        while (true) {
            const double next_arrival = earliest_pending_arrival();
            const double next_completion = earliest_completion();
            const double next = std::min(next_arrival, next_completion);
            if (next == kInfinity || next > config_.horizon_minutes) break;

            advance_to(now, next);
            now = next;
            bool occupancy_changed = complete_events_at(now);
            if (next_arrival == now)
                occupancy_changed = process_arrivals_at(now) || occupancy_changed;
            if (occupancy_changed) {
                resolve_oom(now);
                recompute_rates(now);
            }
        }

        return finalize();
    }

private:
    void init_arrivals() {
        jobs_.resize(config_.jobs.size());
        std::mt19937_64 rng(config_.seed);
        for (std::size_t i = 0; i < config_.jobs.size(); ++i) {
            jobs_[i].index = i;
            jobs_[i].procs = ProcessorSet(nproc_);
            if (config_.arrival_jitter_minutes > 0.0) {
                // 53-bit uniform in [0, 1); bit-reproducible for a given
                // seed, unlike std::uniform_real_distribution.
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                jobs_[i].arrival_min = u * config_.arrival_jitter_minutes;
            }
        }
        pending_.resize(jobs_.size());
        for (std::size_t i = 0; i < jobs_.size(); ++i) pending_[i] = i;
        std::stable_sort(pending_.begin(), pending_.end(),
                         [&](std::size_t a, std::size_t b) {
                             return jobs_[a].arrival_min < jobs_[b].arrival_min;
                         });
    }

    double earliest_pending_arrival() const {
        if (pending_.empty()) return kInfinity;
        return jobs_[pending_.front()].arrival_min;
    }

    double earliest_completion() const {
        double best = kInfinity;
        for (std::size_t i : running_) best = std::min(best, jobs_[i].completion_at);
        return best;
    }

    void advance_to(double now, double next) {
        const double dt = next - now;
        if (dt <= 0.0) return;
        for (std::size_t i : running_) {
            LiveJob& job = jobs_[i];
            if (job.completion_at > next)  // jobs completing at `next` reset below
                job.event_fraction = std::min(job.event_fraction + job.rate_epm * dt,
                                              1.0 - 1e-15);
        }
    }

    // Completes one event on every running job scheduled exactly at `now`
    // (identical jobs complete in the same instant). Returns whether any job
    // finished and freed its processors.
    bool complete_events_at(double now) {
        std::vector<std::size_t> finished;
        for (std::size_t i : running_) {
            LiveJob& job = jobs_[i];
            if (job.completion_at != now) continue;
            job.event_fraction = 0.0;
            job.completed += 1;
            emit_completion(now, i);
            if (job.completed >= config_.jobs[i].events_requested) {
                finished.push_back(i);
            } else {
                job.completion_at = now + 1.0 / job.rate_epm;
            }
        }
        for (std::size_t i : finished) {
            LiveJob& job = jobs_[i];
            job.running = false;
            job.fate = JobFate::finished;
            SimEvent ev;
            ev.t_min = now;
            ev.kind = SimEventKind::job_finished;
            ev.job_id = config_.jobs[i].descriptor.job_id;
            ev.completed = job.completed;
            trace_.push_back(std::move(ev));
            allocation_ = release(allocation_, config_.jobs[i].descriptor.job_id);
            running_.erase(std::remove(running_.begin(), running_.end(), i),
                           running_.end());
        }
        return !finished.empty();
    }

    bool process_arrivals_at(double now) {
        bool admitted_any = false;
        while (!pending_.empty() && jobs_[pending_.front()].arrival_min <= now) {
            const std::size_t i = pending_.front();
            pending_.erase(pending_.begin());
            const SimJob& sim_job = config_.jobs[i];
            const AdmitResult result = try_admit(allocation_, sim_job.descriptor,
                                                 config_.queue, config_.node,
                                                 sim_job.profile);
            LiveJob& job = jobs_[i];
            SimEvent ev;
            ev.t_min = now;
            ev.job_id = sim_job.descriptor.job_id;
            if (!result.admitted) {
                job.fate = JobFate::rejected;
                ev.kind = SimEventKind::job_rejected;
                ev.reason = result.reason;
                trace_.push_back(std::move(ev));
                continue;
            }
            job.running = true;
            job.procs = result.granted;
            job.workers = result.granted.count();
            job.residency_mib =
                instance_memory_mib(sim_job.profile, job.workers) +
                static_cast<double>(config_.node.per_instance_overhead_mib);
            running_.push_back(i);
            ev.kind = SimEventKind::job_started;
            ev.processors = result.granted.to_vector();
            ev.workers = job.workers;
            trace_.push_back(std::move(ev));
            admitted_any = true;
        }
        return admitted_any;
    }

    double resident_total() const {
        double total = 0.0;
        for (std::size_t i : running_) total += jobs_[i].residency_mib;
        return total;
    }

    void resolve_oom(double now) {
        double total = resident_total();
        while (total > usable_mib_ && !running_.empty()) {
            const std::size_t victim = pick_victim();
            LiveJob& job = jobs_[victim];
            job.running = false;
            job.fate = JobFate::oom_killed;
            SimEvent ev;
            ev.t_min = now;
            ev.kind = SimEventKind::oom_kill;
            ev.job_id = config_.jobs[victim].descriptor.job_id;
            ev.reason = "resident memory over budget";
            ev.completed = job.completed;
            trace_.push_back(std::move(ev));
            allocation_ = release(allocation_, config_.jobs[victim].descriptor.job_id);
            running_.erase(std::remove(running_.begin(), running_.end(), victim),
                           running_.end());
            total -= job.residency_mib;
        }
        peak_memory_mib_ = std::max(peak_memory_mib_, total);
    }

    // kill_largest: biggest resident instance; kill_newest: latest arrival.
    // Ties fall to the job admitted last (highest queue index among equals).
    std::size_t pick_victim() const {
        std::size_t victim = running_.front();
        for (std::size_t i : running_) {
            const LiveJob& a = jobs_[i];
            const LiveJob& b = jobs_[victim];
            bool worse;
            if (config_.oom_policy == OomPolicy::kill_largest) {
                worse = a.residency_mib > b.residency_mib ||
                        (a.residency_mib == b.residency_mib &&
                         (a.arrival_min > b.arrival_min ||
                          (a.arrival_min == b.arrival_min && a.index > b.index)));
            } else {
                worse = a.arrival_min > b.arrival_min ||
                        (a.arrival_min == b.arrival_min && a.index > b.index);
            }
            if (worse) victim = i;
        }
        return victim;
    }

    // Every thread on a core with t busy threads runs at sigma(t)/t of the
    // single-thread rate; a job's rate is the sum over the threads it owns.
    void recompute_rates(double now) {
        std::vector<int> core_threads(config_.node.physical_cores, 0);
        for (std::size_t i : running_)
            for (int p : jobs_[i].procs.to_vector())
                core_threads[core_of(config_.node, p)] += 1;
        for (std::size_t i : running_) {
            LiveJob& job = jobs_[i];
            const ApplicationProfile& profile = config_.jobs[i].profile;
            double rate = 0.0;
            for (int p : job.procs.to_vector()) {
                const int t = core_threads[core_of(config_.node, p)];
                rate += profile.single_thread_rate_epm * profile.sigma(t) / t;
            }
            if (job.workers > 1) rate *= (1.0 - profile.mp_overhead);
            job.rate_epm = rate;
            job.completion_at = rate > 0.0
                                    ? now + (1.0 - job.event_fraction) / rate
                                    : kInfinity;
        }
    }

    void emit_completion(double t, std::size_t index) {
        SimEvent ev;
        ev.t_min = t;
        ev.kind = SimEventKind::events_completed;
        ev.job_id = config_.jobs[index].descriptor.job_id;
        ev.completed = jobs_[index].completed;
        trace_.push_back(std::move(ev));
    }

    SimResult finalize() {
        SimResult result;
        result.trace = std::move(trace_);

        SimReport& report = result.report;
        const bool truncated = !running_.empty() || !pending_.empty();
        double span = 0.0;
        if (truncated) {
            span = config_.horizon_minutes;
        } else {
            for (const SimEvent& ev : result.trace) span = std::max(span, ev.t_min);
        }

        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            LiveJob& job = jobs_[i];
            if (job.running) job.fate = JobFate::running_at_horizon;
            report.total_events += job.completed;
            report.jobs.push_back(
                {config_.jobs[i].descriptor.job_id, job.fate, job.completed});
        }
        report.span_min = span;
        report.throughput_epm = span > 0.0 ? report.total_events / span : 0.0;
        report.peak_memory_mib = peak_memory_mib_;
        return result;
    }

    const SimConfig& config_;
    int nproc_;
    double usable_mib_;
    Allocation allocation_;
    std::vector<LiveJob> jobs_;
    std::vector<std::size_t> pending_;  // sorted by (arrival, queue order)
    std::vector<std::size_t> running_;  // admission order
    std::vector<SimEvent> trace_;
    double peak_memory_mib_ = 0.0;
};

}  // namespace

SimResult run(const SimConfig& config) {
    config.validate();
    Simulation sim(config);
    return sim.run();
}

bool replay_check(const SimConfig& config) {
    const SimResult first = run(config);
    const SimResult second = run(config);
    return trace_to_jsonl(first.trace) == trace_to_jsonl(second.trace);
}

std::string trace_to_jsonl(const std::vector<SimEvent>& trace) {
    std::string out;
    for (const SimEvent& ev : trace) {
        nlohmann::ordered_json line;
        line["t_min"] = ev.t_min;
        line["kind"] = to_string(ev.kind);
        line["job_id"] = ev.job_id;
        nlohmann::ordered_json detail = nlohmann::ordered_json::object();
        switch (ev.kind) {
            case SimEventKind::job_started:
                detail["processors"] = ev.processors;
                detail["workers"] = ev.workers;
                break;
            case SimEventKind::events_completed:
                detail["completed"] = ev.completed;
                break;
            case SimEventKind::oom_kill:
                detail["reason"] = ev.reason;
                detail["completed"] = ev.completed;
                break;
            case SimEventKind::job_finished:
                detail["total_events"] = ev.completed;
                break;
            case SimEventKind::job_rejected:
                detail["reason"] = ev.reason;
                break;
        }
        line["detail"] = detail;
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace fatnode
