#include "fatnode/manifest.hpp"

#include <cstdio>

namespace fatnode {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

RunManifest make_manifest(const std::string& command,
                          const std::vector<std::string>& input_paths,
                          const std::vector<std::string>& output_paths) {
    RunManifest manifest;
    manifest.command = command;
    manifest.input_paths = input_paths;
    manifest.output_paths = output_paths;
    std::string all_bytes;
    for (const auto& path : input_paths) all_bytes += read_file(path);
    manifest.input_hash = fnv1a64_hex(all_bytes);
    return manifest;
}

json to_json(const RunManifest& manifest) {
    json j;
    j["command"] = manifest.command;
    j["inputs"] = manifest.input_paths;
    j["outputs"] = manifest.output_paths;
    j["tool_version"] = manifest.tool_version;
    j["input_hash"] = manifest.input_hash;
    return j;
}

}  // namespace fatnode
