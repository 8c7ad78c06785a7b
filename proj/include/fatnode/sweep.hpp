#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fatnode/node.hpp"
#include "fatnode/workload.hpp"

namespace fatnode {

// Inclusive bounds; 0 means "up to nproc". The grid is every (instances,
// workers) pair in range with instances * workers <= nproc.
struct SweepGrid {
    int min_instances = 1;
    int max_instances = 0;
    int min_workers = 1;
    int max_workers = 0;
};

struct SweepRow {
    int instances = 0;
    int workers = 0;
    int threads = 0;
    double peak_memory_mib = 0.0;
    double total_rate_epm = 0.0;
    double per_thread_rate_epm = 0.0;
    bool feasible = false;
    std::string reason;  // empty when feasible
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (threads, instances)
    std::optional<std::size_t> best_index;
};

enum class SweepExecution { serial, parallel };

// Evaluates every grid point. Grid points are independent pure evaluations;
// the parallel path must produce byte-identical results to the serial one.
// Best row: highest total rate among feasible rows, ties broken by fewest
// threads, then most instances. Throws ValidationError on an empty grid.
SweepResult run_sweep(const NodeSpec& spec, const ApplicationProfile& profile,
                      const SweepGrid& grid = {},
                      SweepExecution execution = SweepExecution::parallel);

// Throws InfeasibleError when no row is feasible.
const SweepRow& best_configuration(const SweepResult& result);

// CSV columns: instances,workers,threads,peak_memory_mib,total_rate_epm,
// per_thread_rate_epm,feasible,reason. Rows in (threads, instances) order.
std::string emit_csv(const SweepResult& result);

// Array of row objects, same ordering as the CSV.
std::string emit_json(const SweepResult& result);

// The best row formatted as one CSV line (no header).
std::string format_row_csv(const SweepRow& row);

}  // namespace fatnode
