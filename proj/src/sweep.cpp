#include "fatnode/sweep.hpp"

#include <algorithm>
#include <string>

#include <json.hpp>

#include "fatnode/errors.hpp"

namespace fatnode {

namespace {

// Shortest round-trip formatting, shared with the JSON output so the same
// value prints identically in both table formats.
std::string format_double(double value) {
    return nlohmann::json(value).dump();
}

SweepRow evaluate_row(const NodeSpec& spec, const ApplicationProfile& profile,
                      int instances, int workers) {
    const InstanceConfig config{instances, workers};
    const ThroughputEstimate estimate = configuration_throughput(profile, config, spec);
    SweepRow row;
    row.instances = instances;
    row.workers = workers;
    row.threads = config.total_threads();
    row.peak_memory_mib = estimate.peak_memory_mib;
    row.total_rate_epm = estimate.total_rate_epm;
    row.per_thread_rate_epm = estimate.per_thread_rate_epm;
    row.feasible = estimate.feasible;
    row.reason = infeasibility_reason(estimate.reason, spec);
    return row;
}

// Highest rate; ties prefer fewer threads, then more instances (more, smaller
// jobs at equal cost).
bool better_row(const SweepRow& a, const SweepRow& b) {
    if (a.total_rate_epm != b.total_rate_epm) return a.total_rate_epm > b.total_rate_epm;
    if (a.threads != b.threads) return a.threads < b.threads;
    return a.instances > b.instances;
}

}  // namespace

SweepResult run_sweep(const NodeSpec& spec, const ApplicationProfile& profile,
                      const SweepGrid& grid, SweepExecution execution) {
    spec.validate();
    profile.validate();

    const int nproc = logical_processors(spec);
    const int max_instances = grid.max_instances > 0 ? grid.max_instances : nproc;
    const int max_workers = grid.max_workers > 0 ? grid.max_workers : nproc;
    if (grid.min_instances < 1 || grid.min_workers < 1)
        throw ValidationError("sweep grid: bounds must be >= 1");

    std::vector<std::pair<int, int>> points;
    for (int instances = grid.min_instances; instances <= max_instances; ++instances)
        for (int workers = grid.min_workers; workers <= max_workers; ++workers)
            if (static_cast<std::int64_t>(instances) * workers <= nproc)
                points.emplace_back(instances, workers);
    if (points.empty())
        throw ValidationError("sweep grid: empty after pruning to instances x workers <= " +
                              std::to_string(nproc));

    SweepResult result;
    result.rows.resize(points.size());

    // Grid points are independent pure evaluations; each lands in its own
    // slot, so the parallel schedule cannot change the result.
    if (execution == SweepExecution::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i)
            result.rows[i] = evaluate_row(spec, profile, points[i].first, points[i].second);
    } else {
        for (std::size_t i = 0; i < points.size(); ++i)
            result.rows[i] = evaluate_row(spec, profile, points[i].first, points[i].second);
    }

    std::sort(result.rows.begin(), result.rows.end(),
              [](const SweepRow& a, const SweepRow& b) {
                  if (a.threads != b.threads) return a.threads < b.threads;
                  return a.instances < b.instances;
              });

    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        if (!result.rows[i].feasible) continue;
        if (!result.best_index || better_row(result.rows[i], result.rows[*result.best_index]))
            result.best_index = i;
    }
    return result;
}

const SweepRow& best_configuration(const SweepResult& result) {
    if (!result.best_index)
        throw InfeasibleError("no feasible configuration in the sweep "
                              "(application does not fit on this node)");
    return result.rows[*result.best_index];
}

std::string format_row_csv(const SweepRow& row) {
    std::string line;
    line += std::to_string(row.instances);
    line += ',';
    line += std::to_string(row.workers);
    line += ',';
    line += std::to_string(row.threads);
    line += ',';
    line += format_double(row.peak_memory_mib);
    line += ',';
    line += format_double(row.total_rate_epm);
    line += ',';
    line += format_double(row.per_thread_rate_epm);
    line += ',';
    line += row.feasible ? "true" : "false";
    line += ',';
    line += row.reason;
    return line;
}

std::string emit_csv(const SweepResult& result) {
    std::string out =
        "instances,workers,threads,peak_memory_mib,total_rate_epm,"
        "per_thread_rate_epm,feasible,reason\n";
    for (const SweepRow& row : result.rows) {
        out += format_row_csv(row);
        out += '\n';
    }
    return out;
}

std::string emit_json(const SweepResult& result) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const SweepRow& row : result.rows) {
        nlohmann::ordered_json r;
        r["instances"] = row.instances;
        r["workers"] = row.workers;
        r["threads"] = row.threads;
        r["peak_memory_mib"] = row.peak_memory_mib;
        r["total_rate_epm"] = row.total_rate_epm;
        r["per_thread_rate_epm"] = row.per_thread_rate_epm;
        r["feasible"] = row.feasible;
        r["reason"] = row.reason;
        rows.push_back(std::move(r));
    }
    return rows.dump(2) + "\n";
}

}  // namespace fatnode
