#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fatnode/calibrate.hpp"
#include "fatnode/matcher.hpp"
#include "fatnode/node.hpp"
#include "fatnode/simulator.hpp"
#include "fatnode/sweep.hpp"
#include "fatnode/workload.hpp"

namespace fatnode {

using json = nlohmann::ordered_json;

// Parses a whole file; parse failures become ValidationError with the
// parser's line/byte diagnostic.
json parse_json_file(const std::string& path);
std::string read_file(const std::string& path);  // throws ValidationError
void write_file(const std::string& path, const std::string& contents);

// Loaders validate the result. `at` is the field path used in error
// messages, e.g. "queue.slot_processors: missing required key".
NodeSpec node_from_json(const json& j, const std::string& at = "node");
ApplicationProfile profile_from_json(const json& j, const std::string& at = "profile");
QueueDescriptor queue_from_json(const json& j, const std::string& at = "queue");
JobDescriptor job_from_json(const json& j, const std::string& at = "job");

json to_json(const NodeSpec& spec);
json to_json(const ApplicationProfile& profile);
json to_json(const QueueDescriptor& queue);
json to_json(const JobDescriptor& job);
json to_json(const Allocation& allocation);
json to_json(const MatchOutcome& outcome);
json to_json(const SimReport& report);
json to_json(const CalibrationResult& result);

// Top-level config documents.
struct MatchConfig {
    NodeSpec node;
    QueueDescriptor queue;
    std::vector<JobDescriptor> jobs;
    std::optional<ApplicationProfile> profile;  // enables the memory gate
};
MatchConfig match_config_from_json(const json& root);

struct SweepConfig {
    NodeSpec node;
    ApplicationProfile profile;
    SweepGrid grid;
};
SweepConfig sweep_config_from_json(const json& root);

SimConfig sim_config_from_json(const json& root);

struct CalibrationConfig {
    NodeSpec node;
    ApplicationProfile profile;
    std::vector<std::string> free_params;
    std::vector<CalibrationObservation> observations;
};
CalibrationConfig calibration_config_from_json(const json& root);

}  // namespace fatnode
