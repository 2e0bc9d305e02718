#pragma once

#include <array>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfound/circuit.h"

namespace qfound::cli {

/// Malformed plot input; the message names the offending row or record.
struct PlotInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrajectorySample {
    double time;
    std::array<double, 2> q;
};

struct Trajectory {
    long id;
    std::vector<TrajectorySample> samples;
};

struct TrajectoryTable {
    std::size_t dims = 1;
    std::vector<Trajectory> trajectories;  // in order of first appearance
};

/// Reads `trajectory_id,time,q1[,q2]`. An empty input is an empty table.
TrajectoryTable read_trajectory_csv(std::istream &in, const std::string &name);

/// One polyline per trajectory: q1 against time in 1D, q2 against q1 in 2D.
std::string trajectories_svg(const TrajectoryTable &table);

/// Groups path records by hidden configuration into (right interference,
/// right whichpath) pairs. A record without a partner is paired with itself.
std::vector<circuit::RecordPair> read_record_pairs(const nlohmann::json &records, bool &right_acts_first);

/// Dispatches on the file extension (.csv or .json) and returns the SVG.
std::string plot_file(const std::string &path);

}  // namespace qfound::cli
