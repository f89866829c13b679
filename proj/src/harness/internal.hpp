#pragma once

#include "qphase/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <string>
#include <vector>

namespace qphase::harness::detail {

using json = nlohmann::json;

std::string utc_timestamp(std::chrono::system_clock::time_point t);

struct ManifestInfo {
    std::string command;
    std::string run_id;
    const Config* config = nullptr;
    std::vector<std::string> outputs;  // file names relative to the run directory
    json convergence = json::object();
    std::chrono::system_clock::time_point started;
    std::chrono::system_clock::time_point finished;
    int exit_code = 0;
    std::string message;
};

json config_json(const Config& cfg);
void write_manifest(const std::filesystem::path& dir, const ManifestInfo& info);
std::string dump(const json& j);
json complex_json(cplx z);

// Prepares <root>/<run_id>, removing stale files from an earlier run of the same config.
std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& run_id);

} // namespace qphase::harness::detail
