#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "config.h"
#include "emit.h"

#include "qfound/inference.h"

namespace qfound::cli {

struct RunOutput {
    std::vector<Artifact> files;
    /// Claims whose verdict differs from the expected one.
    std::size_t mismatches = 0;
};

/// Runs the configured scenario and returns its artifacts (not yet written).
RunOutput run_scenario(const ScenarioConfig &config);

/// One entry of the claims suite.
struct Claim {
    std::string id;
    int criterion;
    inference::Verdict expected;
    inference::TestReport report;

    bool matches() const { return report.verdict == expected; }
    nlohmann::json to_json() const;
};

struct SuiteOptions {
    std::uint64_t seed = 7;
    unsigned workers = 1;
};

struct SuiteResult {
    std::vector<Claim> claims;
    /// Left-arm record pairs that change with the right setting.
    nlohmann::json setting_dependence;
    std::vector<circuit::RecordPair> example_pairs;
    /// Double-slit trajectories as CSV.
    std::string double_slit_csv;
    /// Wall-clock seconds per acceptance criterion (not part of any output).
    std::map<int, double> seconds;
};

SuiteResult claims_suite(const SuiteOptions &options);

}  // namespace qfound::cli
