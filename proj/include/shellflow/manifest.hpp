#pragma once

#include "shellflow/integrator.hpp"
#include "shellflow/shell_state.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace shellflow {

inline constexpr int manifest_schema_version = 1;

struct OutputDigest {
    std::string path;
    std::string sha256;

    friend bool operator==(const OutputDigest&, const OutputDigest&) = default;
};

/// Everything needed to reproduce one CLI run.
struct RunManifest {
    int schema_version = manifest_schema_version;
    std::string subcommand;
    ModelConfig model;
    SolverSettings solver;
    std::uint64_t seed = 0;
    nlohmann::json parameters = nlohmann::json::object();
    std::string tool_version;
    std::string timestamp;  ///< ISO 8601 UTC
    std::string brownian_convention = "E|beta_n(t)|^2 = t";
    std::vector<OutputDigest> outputs;

    friend bool operator==(const RunManifest& a, const RunManifest& b);
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string emit_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);

/// Lowercase hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Current UTC time as YYYY-MM-DDThh:mm:ssZ.
std::string utc_timestamp();

}  // namespace shellflow
