#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qfound::cli {

/// A file produced by a scenario, held in memory until written.
struct Artifact {
    std::string path;    // relative to the output directory
    std::string format;  // csv, json or svg
    std::string content;
};

/// Failure to create or write the output directory (exit status 2).
struct OutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string &data);

/// Pretty-printed JSON with a trailing newline.
std::string json_text(const nlohmann::json &j);

/// Manifest listing every artifact with its size and SHA-256 digest.
nlohmann::json manifest(const std::string &scenario, const nlohmann::json &config,
                        const std::vector<Artifact> &files);

/// Writes the artifacts and `manifest.json` into `dir`, creating it if needed.
void write_artifacts(const std::string &dir, const std::vector<Artifact> &files, const nlohmann::json &manifest);

}  // namespace qfound::cli
