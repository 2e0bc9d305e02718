#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfound/circuit.h"
#include "qfound/exact.h"
#include "qfound/hilbert.h"

/// Verdicts on simulated records: Local Causality, Measurement Independence,
/// no-signaling, repeatability, branch/collapse equivalence and CHSH.
namespace qfound::inference {

enum class Mode { analytic, montecarlo };
enum class Verdict { violated, satisfied, inconclusive };

std::string to_string(Mode m);
std::string to_string(Verdict v);

struct Settings {
    circuit::Setting left;
    circuit::Setting right;
    circuit::Setting of(circuit::Arm a) const { return a == circuit::Arm::left ? left : right; }
    auto operator<=>(const Settings &) const = default;
};

/// Initial configuration and per-arm path records (labels only, no detection).
struct HiddenRecord {
    std::array<int, 2> initial{0, 0};
    std::array<double, 2> coords{0, 0};
    std::array<circuit::Record, 2> record;
};

struct RunRecord {
    Settings settings;
    circuit::DetectorOutcome outcome;
    std::optional<HiddenRecord> hidden;
    /// Everything fixed before the settings act: state id, geometry, seed.
    std::string context;
};

template <class W>
struct Weighted {
    RunRecord record;
    W weight;
};

/// Exact model probabilities.
using ExactRecords = std::vector<Weighted<ExactReal>>;
/// Branch weights from hilbert::branch (no sampled collapse).
using BranchRecords = std::vector<Weighted<double>>;
/// Sampled runs, weight one each.
using SampledRecords = std::vector<RunRecord>;

struct TestReport {
    std::string test;
    double statistic;
    /// Exact statistic when the analytic route is exact.
    std::optional<std::string> statistic_exact;
    double threshold;
    Verdict verdict;
    std::size_t n;
    Mode mode;
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const;
};

struct InferenceError : std::domain_error {
    using std::domain_error::domain_error;
};

/// An outcome on one arm, e.g. {right, 1} is R1.
struct Event {
    circuit::Arm arm;
    int outcome;
    std::string name() const;
    bool operator()(const circuit::DetectorOutcome &o) const;
};

/// Monte-Carlo verdicts compare a 99% interval with a margin: violated iff the
/// lower end exceeds it, satisfied iff the upper end is below it.
struct MonteCarloPolicy {
    double confidence = 0.99;
    double margin = 0.02;
};

/// Wilson score interval for k successes in n trials.
std::array<double, 2> wilson_interval(std::size_t k, std::size_t n, double confidence);

/// Tolerance deciding zero/nonzero for floating branch-weight statistics.
inline constexpr double kBranchTolerance = 1e-12;

// Record builders ---------------------------------------------------------------

ExactRecords exact_records(const circuit::OpticalCircuit &c, const std::string &context);
/// MWI mode: one record per branch of hilbert::branch, weighted.
BranchRecords branch_records(const circuit::OpticalCircuit &c, const std::string &context);
/// Collapse runs, trial i on stream (seed, i).
SampledRecords copenhagen_records(const circuit::OpticalCircuit &c, std::size_t n, std::uint64_t seed,
                                  const std::string &context, unsigned workers = 1);
/// Bohmian runs with hidden records, trial i on stream (seed, i).
SampledRecords bohmian_records(const circuit::OpticalCircuit &c, std::size_t n, std::uint64_t seed,
                               const std::string &context, unsigned workers = 1);
/// Exact Bohmian outcome measure by enumeration.
ExactRecords bohmian_exact_records(const circuit::OpticalCircuit &c, const std::string &context);

// Local Causality ----------------------------------------------------------------

/// |P(A|S,B) - P(A|S)|. Records must share one context S.
TestReport local_causality_test(const ExactRecords &records, const Event &a, const Event &b);
TestReport local_causality_test(const BranchRecords &records, const Event &a, const Event &b);
TestReport local_causality_test(const SampledRecords &records, const Event &a, const Event &b,
                                const MonteCarloPolicy &policy = {});

// Measurement Independence -------------------------------------------------------

/// Which part of the hidden record enters lambda.
enum class HiddenStage { initial, pre_detection };

struct SettingEnumeration {
    Settings settings;
    circuit::Enumeration enumeration;
};

/// Largest pairwise total variation distance between lambda distributions.
/// Lambda = initial labels and coordinates, plus (pre_detection) the path
/// records of every arm whose setting is shared by all groups.
TestReport measurement_independence_test(const std::vector<SettingEnumeration> &groups,
                                         HiddenStage stage = HiddenStage::pre_detection);
/// Monte-Carlo version: coordinates binned into `bins` cells per axis; the
/// interval comes from the Bretagnolle-Huber-Carol bound.
TestReport measurement_independence_test(const SampledRecords &records,
                                         HiddenStage stage = HiddenStage::pre_detection, std::size_t bins = 2,
                                         const MonteCarloPolicy &policy = {});

// No-signaling -------------------------------------------------------------------

/// max over local outcomes of |P(a|remote x1) - P(a|remote x2)|, records grouped
/// by the remote arm's setting.
TestReport no_signaling_test(const ExactRecords &records, circuit::Arm local);
TestReport no_signaling_test(const BranchRecords &records, circuit::Arm local);
TestReport no_signaling_test(const SampledRecords &records, circuit::Arm local, const MonteCarloPolicy &policy = {});

// CHSH -----------------------------------------------------------------------------

/// E(theta, phi) with outcome values +1 for detector 1 and -1 for detector 2.
double correlator(double theta, double phi);
ExactReal correlator_exact(int theta_pi8, int phi_pi8);

/// S = E(t1,p1) + E(t1,p2) + E(t2,p1) - E(t2,p2).
double chsh_value(const std::array<double, 4> &angles);
ExactReal chsh_value_exact(const std::array<int, 4> &pi8);

struct ChshOptimum {
    double s_max;
    std::array<double, 4> angles;  // theta1, theta2, phi1, phi2
    std::optional<std::array<int, 4>> pi8;
    std::optional<ExactReal> s_exact;
    std::size_t evaluations;
};

/// Grid over [0, pi/2] with `divisions` steps per angle, then a shrinking
/// pattern search around the best grid point.
ChshOptimum optimize_chsh(int divisions = 16);

/// A local deterministic model: the correlator it produces for setting
/// indices (i, j) at angles (theta, phi).
struct LocalModel {
    std::string name;
    std::function<double(int i, double theta, int j, double phi)> correlator;
};

std::vector<LocalModel> local_model_family();
/// Largest S of `m` over the grid (all four angles on the grid).
double local_model_max_chsh(const LocalModel &m, int divisions = 16);

/// S from sampled records at fixed angles; the interval is the sum of the four
/// Wilson intervals (rescaled to [-1, 1]).
TestReport chsh_monte_carlo(const std::array<double, 4> &angles, std::size_t n, std::uint64_t seed,
                            const MonteCarloPolicy &policy = {});

// Repeatability and branching --------------------------------------------------------

/// Measures twice in a row per trial; statistic = fraction of differing pairs.
/// With `collapse` off, the second measurement uses the unmodified state.
TestReport repeatability_test(std::size_t n, const hilbert::StateVector &state, const hilbert::Observable &obs,
                              std::uint64_t seed, bool collapse = true);

/// Branch weights against Born probabilities and sampled collapse frequencies
/// (n trials) against the weights.
TestReport branch_equivalence_test(const hilbert::StateVector &state, const hilbert::Observable &obs, std::size_t n,
                                   std::uint64_t seed);

struct MeasurementCase {
    hilbert::StateVector state;
    hilbert::Observable observable;
};

/// `count` random (state, observable) pairs of dimension 2..max_dim. States
/// have Gaussian amplitudes; observables a Haar-like random eigenbasis with
/// integer eigenvalues drawn from 1..dim, so degenerate eigenspaces occur.
/// Case i uses stream (seed, i).
std::vector<MeasurementCase> random_measurement_family(std::size_t count, std::size_t max_dim, std::uint64_t seed);

}  // namespace qfound::inference
