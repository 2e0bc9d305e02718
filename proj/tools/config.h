#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace qfound::cli {

/// Usage and configuration problems (exit status 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A validated scenario configuration: defaults, then the config file, then
/// command-line flags.
class ScenarioConfig {
   public:
    /// `file` and `flags` are JSON objects; `file_name` is used in diagnostics.
    static ScenarioConfig resolve(const nlohmann::json &file, const nlohmann::json &flags,
                                  const std::string &file_name = "config");
    /// Parses a JSON config document; syntax errors report line and column.
    static nlohmann::json parse_file(const std::string &path);

    const std::string &scenario() const { return scenario_; }
    bool analytic() const;
    std::uint64_t seed() const;
    unsigned workers() const;
    const std::string &out() const { return out_; }
    bool wants(const std::string &format) const { return formats_.count(format) > 0; }

    bool has(const std::string &key) const { return values_.contains(key); }
    double number(const std::string &key, double fallback) const;
    std::size_t count(const std::string &key, std::size_t fallback) const;
    bool flag(const std::string &key, bool fallback) const;
    std::string text(const std::string &key, const std::string &fallback) const;

    /// The effective settings, without the output directory and worker count
    /// (neither changes the results).
    nlohmann::json echo() const;

   private:
    nlohmann::json values_;
    std::string scenario_;
    std::string out_;
    std::set<std::string> formats_;
};

/// Field names accepted in config files and as flags.
const std::set<std::string> &config_fields();

/// Converts a command-line value to the JSON type of field `key`.
nlohmann::json flag_value(const std::string &key, const std::string &raw);

}  // namespace qfound::cli
