#include "fatnode/json_io.hpp"

#include <fstream>
#include <sstream>
#include <type_traits>

#include "fatnode/errors.hpp"

namespace fatnode {

namespace {

[[noreturn]] void missing_key(const std::string& at, const std::string& key) {
    throw ValidationError(at + "." + key + ": missing required key");
}

const json& require(const json& j, const std::string& at, const std::string& key) {
    if (!j.is_object()) throw ValidationError(at + ": expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) missing_key(at, key);
    return *it;
}

template <typename T>
void check_number(const json& v, const std::string& at, const std::string& key) {
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer())
            throw ValidationError(at + "." + key + ": expected an integer number");
    } else {
        if (!v.is_number())
            throw ValidationError(at + "." + key + ": expected a number");
    }
}

template <typename T>
T get_number(const json& j, const std::string& at, const std::string& key) {
    const json& v = require(j, at, key);
    check_number<T>(v, at, key);
    return v.get<T>();
}

template <typename T>
T get_number_or(const json& j, const std::string& at, const std::string& key, T fallback) {
    if (!j.is_object()) throw ValidationError(at + ": expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    check_number<T>(*it, at, key);
    return it->get<T>();
}

bool get_bool_or(const json& j, const std::string& at, const std::string& key, bool fallback) {
    if (!j.is_object()) throw ValidationError(at + ": expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_boolean())
        throw ValidationError(at + "." + key + ": expected a boolean");
    return it->get<bool>();
}

std::string get_string(const json& j, const std::string& at, const std::string& key) {
    const json& v = require(j, at, key);
    if (!v.is_string())
        throw ValidationError(at + "." + key + ": expected a string");
    return v.get<std::string>();
}

template <typename T>
std::optional<T> get_optional_number(const json& j, const std::string& at,
                                     const std::string& key) {
    if (!j.is_object()) throw ValidationError(at + ": expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    check_number<T>(*it, at, key);
    return it->get<T>();
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << contents;
    if (!out) throw ValidationError("short write to file: " + path);
}

json parse_json_file(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

NodeSpec node_from_json(const json& j, const std::string& at) {
    NodeSpec spec;
    spec.physical_cores = get_number<int>(j, at, "physical_cores");
    spec.hyperthread_ways = get_number<int>(j, at, "hyperthread_ways");
    spec.total_ram_mib = get_number<std::int64_t>(j, at, "total_ram_mib");
    spec.os_reserve_mib = get_number_or<std::int64_t>(j, at, "os_reserve_mib", 0);
    spec.per_instance_overhead_mib =
        get_number_or<std::int64_t>(j, at, "per_instance_overhead_mib", 136);
    spec.unstable_beyond_threads_per_core =
        get_optional_number<int>(j, at, "unstable_beyond_threads_per_core");
    spec.validate();
    return spec;
}

ApplicationProfile profile_from_json(const json& j, const std::string& at) {
    ApplicationProfile profile;
    profile.sp_footprint_mib = get_number<double>(j, at, "sp_footprint_mib");
    profile.shared_fraction = get_number_or<double>(j, at, "shared_fraction", 0.3);
    profile.master_overhead_mib = get_number_or<double>(j, at, "master_overhead_mib", 0.0);
    profile.mp_overhead = get_number_or<double>(j, at, "mp_overhead", 0.0);
    profile.single_thread_rate_epm =
        get_number_or<double>(j, at, "single_thread_rate_epm", 0.0);
    if (j.is_object() && j.contains("ht_scaling")) {
        const json& arr = j.at("ht_scaling");
        if (!arr.is_array() || arr.empty())
            throw ValidationError(at + ".ht_scaling: expected a non-empty array");
        profile.ht_scaling.clear();
        for (const auto& v : arr) {
            if (!v.is_number())
                throw ValidationError(at + ".ht_scaling: expected numbers");
            profile.ht_scaling.push_back(v.get<double>());
        }
    }
    profile.validate();
    return profile;
}

QueueDescriptor queue_from_json(const json& j, const std::string& at) {
    QueueDescriptor queue;
    queue.allow_single = get_bool_or(j, at, "allow_single", true);
    queue.allow_multi = get_bool_or(j, at, "allow_multi", false);
    queue.require_job_type_tag = get_bool_or(j, at, "require_job_type_tag", false);
    queue.require_exact_count = get_bool_or(j, at, "require_exact_count", false);
    queue.whole_node_only = get_bool_or(j, at, "whole_node_only", false);
    queue.slot_processors = get_number<int>(j, at, "slot_processors");
    queue.max_concurrent_jobs = get_optional_number<int>(j, at, "max_concurrent_jobs");
    queue.validate();
    return queue;
}

JobDescriptor job_from_json(const json& j, const std::string& at) {
    JobDescriptor job;
    job.job_id = get_string(j, at, "job_id");
    job.mode = job_mode_from_string(get_string(j, at, "mode"));
    job.exact_processors = get_optional_number<int>(j, at, "exact_processors");
    job.max_processors = get_optional_number<int>(j, at, "max_processors");
    job.whole_node = get_bool_or(j, at, "whole_node", false);
    job.memory_hint_mib = get_optional_number<double>(j, at, "memory_hint_mib");
    job.validate();
    return job;
}

json to_json(const NodeSpec& spec) {
    json j;
    j["physical_cores"] = spec.physical_cores;
    j["hyperthread_ways"] = spec.hyperthread_ways;
    j["total_ram_mib"] = spec.total_ram_mib;
    j["os_reserve_mib"] = spec.os_reserve_mib;
    j["per_instance_overhead_mib"] = spec.per_instance_overhead_mib;
    if (spec.unstable_beyond_threads_per_core)
        j["unstable_beyond_threads_per_core"] = *spec.unstable_beyond_threads_per_core;
    return j;
}

json to_json(const ApplicationProfile& profile) {
    json j;
    j["sp_footprint_mib"] = profile.sp_footprint_mib;
    j["shared_fraction"] = profile.shared_fraction;
    j["master_overhead_mib"] = profile.master_overhead_mib;
    j["mp_overhead"] = profile.mp_overhead;
    j["single_thread_rate_epm"] = profile.single_thread_rate_epm;
    j["ht_scaling"] = profile.ht_scaling;
    return j;
}

json to_json(const QueueDescriptor& queue) {
    json j;
    j["allow_single"] = queue.allow_single;
    j["allow_multi"] = queue.allow_multi;
    j["require_job_type_tag"] = queue.require_job_type_tag;
    j["require_exact_count"] = queue.require_exact_count;
    j["whole_node_only"] = queue.whole_node_only;
    j["slot_processors"] = queue.slot_processors;
    if (queue.max_concurrent_jobs) j["max_concurrent_jobs"] = *queue.max_concurrent_jobs;
    return j;
}

json to_json(const JobDescriptor& job) {
    json j;
    j["job_id"] = job.job_id;
    j["mode"] = to_string(job.mode);
    if (job.exact_processors) j["exact_processors"] = *job.exact_processors;
    if (job.max_processors) j["max_processors"] = *job.max_processors;
    j["whole_node"] = job.whole_node;
    if (job.memory_hint_mib) j["memory_hint_mib"] = *job.memory_hint_mib;
    return j;
}

json to_json(const Allocation& allocation) {
    json by_job = json::object();
    for (const auto& [id, procs] : allocation.by_job) by_job[id] = procs.to_vector();
    json j;
    j["nproc"] = allocation.nproc;
    j["jobs"] = std::move(by_job);
    j["free"] = allocation.free.to_vector();
    return j;
}

json to_json(const MatchOutcome& outcome) {
    json rejections = json::array();
    for (const auto& r : outcome.rejections)
        rejections.push_back({{"job_id", r.job_id}, {"reason", r.reason}});
    json j;
    j["allocation"] = to_json(outcome.allocation);
    j["rejections"] = std::move(rejections);
    return j;
}

json to_json(const SimReport& report) {
    json jobs = json::array();
    for (const auto& outcome : report.jobs) {
        json o;
        o["job_id"] = outcome.job_id;
        o["fate"] = to_string(outcome.fate);
        o["events_completed"] = outcome.events_completed;
        jobs.push_back(std::move(o));
    }
    json j;
    j["total_events"] = report.total_events;
    j["span_min"] = report.span_min;
    j["throughput_epm"] = report.throughput_epm;
    j["peak_memory_mib"] = report.peak_memory_mib;
    j["jobs"] = std::move(jobs);
    return j;
}

json to_json(const CalibrationResult& result) {
    json j;
    j["profile"] = to_json(result.profile);
    j["residual"] = {{"rms_relative", result.rms_relative_residual},
                     {"max_relative", result.max_relative_residual}};
    return j;
}

MatchConfig match_config_from_json(const json& root) {
    MatchConfig config;
    config.node = node_from_json(require(root, "config", "node"), "node");
    config.queue = queue_from_json(require(root, "config", "queue"), "queue");
    const json& jobs = require(root, "config", "jobs");
    if (!jobs.is_array()) throw ValidationError("jobs: expected an array");
    for (std::size_t i = 0; i < jobs.size(); ++i)
        config.jobs.push_back(job_from_json(jobs[i], "jobs[" + std::to_string(i) + "]"));
    if (root.contains("profile") && !root.at("profile").is_null())
        config.profile = profile_from_json(root.at("profile"), "profile");
    return config;
}

SweepConfig sweep_config_from_json(const json& root) {
    SweepConfig config;
    config.node = node_from_json(require(root, "config", "node"), "node");
    config.profile = profile_from_json(require(root, "config", "profile"), "profile");
    if (root.contains("grid") && !root.at("grid").is_null()) {
        const json& grid = root.at("grid");
        config.grid.min_instances = get_number_or<int>(grid, "grid", "min_instances", 1);
        config.grid.max_instances = get_number_or<int>(grid, "grid", "max_instances", 0);
        config.grid.min_workers = get_number_or<int>(grid, "grid", "min_workers", 1);
        config.grid.max_workers = get_number_or<int>(grid, "grid", "max_workers", 0);
    }
    return config;
}

SimConfig sim_config_from_json(const json& root) {
    SimConfig config;
    config.node = node_from_json(require(root, "config", "node"), "node");
    config.queue = queue_from_json(require(root, "config", "queue"), "queue");

    std::optional<ApplicationProfile> default_profile;
    if (root.contains("profile") && !root.at("profile").is_null())
        default_profile = profile_from_json(root.at("profile"), "profile");

    const json& jobs = require(root, "config", "jobs");
    if (!jobs.is_array()) throw ValidationError("jobs: expected an array");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string at = "jobs[" + std::to_string(i) + "]";
        SimJob job;
        job.descriptor = job_from_json(jobs[i], at);
        if (jobs[i].contains("profile") && !jobs[i].at("profile").is_null())
            job.profile = profile_from_json(jobs[i].at("profile"), at + ".profile");
        else if (default_profile)
            job.profile = *default_profile;
        else
            throw ValidationError(at + ".profile: missing (no top-level profile either)");
        job.events_requested = get_number<std::int64_t>(jobs[i], at, "events_requested");
        config.jobs.push_back(std::move(job));
    }

    config.seed = get_number_or<std::uint64_t>(root, "config", "seed", 0);
    if (root.contains("oom_policy"))
        config.oom_policy = oom_policy_from_string(get_string(root, "config", "oom_policy"));
    config.horizon_minutes = get_number<double>(root, "config", "horizon_minutes");
    config.arrival_jitter_minutes =
        get_number_or<double>(root, "config", "arrival_jitter_minutes", 0.0);
    config.validate();
    return config;
}

CalibrationConfig calibration_config_from_json(const json& root) {
    CalibrationConfig config;
    config.node = node_from_json(require(root, "config", "node"), "node");
    config.profile = profile_from_json(require(root, "config", "profile"), "profile");

    const json& free = require(root, "config", "free");
    if (!free.is_array()) throw ValidationError("free: expected an array of parameter names");
    for (const auto& v : free) {
        if (!v.is_string()) throw ValidationError("free: expected strings");
        config.free_params.push_back(v.get<std::string>());
    }

    const json& obs = require(root, "config", "observations");
    if (!obs.is_array()) throw ValidationError("observations: expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const std::string at = "observations[" + std::to_string(i) + "]";
        CalibrationObservation o;
        o.config.instances = get_number<int>(obs[i], at, "instances");
        o.config.workers_per_instance = get_number<int>(obs[i], at, "workers");
        o.total_rate_epm = get_number<double>(obs[i], at, "total_rate_epm");
        config.observations.push_back(o);
    }
    return config;
}

}  // namespace fatnode
