#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fatnode/json_io.hpp"

namespace fatnode {

inline constexpr std::string_view kToolVersion = "fatnode 0.1.0";

// FNV-1a over raw bytes, reported as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Stamped into every output for reproducibility: rerunning a command on
// identical inputs must reproduce the same hash and the same outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> input_paths;
    std::vector<std::string> output_paths;
    std::string tool_version{kToolVersion};
    std::string input_hash;  // hash of the concatenated input file bytes
};

RunManifest make_manifest(const std::string& command,
                          const std::vector<std::string>& input_paths,
                          const std::vector<std::string>& output_paths);

json to_json(const RunManifest& manifest);

}  // namespace fatnode
