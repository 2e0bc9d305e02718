#pragma once

#include <array>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfound/exact.h"
#include "qfound/hilbert.h"
#include "qfound/rng.h"

/// Two-arm path-entangled eraser: a time-layered optical circuit acting on the
/// joint path state (|1>|1> + |2>|2>)/sqrt2, its Copenhagen detector
/// statistics, and a deterministic discrete Bohmian path transport.
namespace qfound::circuit {

enum class Setting { interference, whichpath };
enum class Arm { left = 0, right = 1 };
enum class ElementKind { beam_splitter, which_path_detector, erasure_detector };

std::string to_string(Setting s);
std::string to_string(Arm a);
Setting parse_setting(const std::string &s);

/// An angle with an optional exact representation as k*pi/8.
struct Angle {
    double radians = 0;
    std::optional<int> pi8;

    static Angle pi8_multiple(int k);
    /// Recognizes multiples of pi/8 to within 1e-12.
    static Angle from_radians(double r);
    bool exact() const { return pi8.has_value(); }
};

/// |1> -> cos t |1'> + sin t |2'>,  |2> -> e^{i phase} (sin t |1'> - cos t |2'>).
struct Element {
    int layer;
    Arm arm;
    ElementKind kind;
    Angle theta{};
    Angle phase{};
};

/// Top-to-bottom order of the two label indices, before and after the beam
/// splitter. The default puts path 1 on top and, after the splitter, the port
/// feeding detector 1.
struct ArmGeometry {
    std::array<int, 2> path_order{0, 1};
    std::array<int, 2> port_order{1, 0};
};

struct CircuitError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OpticalCircuit {
    Setting left;
    Setting right;
    std::vector<Element> elements;
    std::array<ArmGeometry, 2> geometry{};

    /// Layers strictly increasing and positive, at most one beam splitter per
    /// arm, exactly one detector per arm and it is the arm's last element,
    /// theta in [0, pi/2].
    void validate() const;
    Setting setting(Arm a) const { return a == Arm::left ? left : right; }
    /// Elements acting on `a`, in layer order.
    std::vector<Element> arm_elements(Arm a) const;
    bool exact() const;
};

/// The arm acting first gets layers 1 (splitter, if any) and 2 (detector); the
/// other arm layers 3 and 4. Whichpath arms have no splitter.
OpticalCircuit build_eraser(Setting left, Setting right, bool right_acts_first = false,
                            Angle theta = Angle::pi8_multiple(2));
OpticalCircuit build_eraser(Setting left, Setting right, bool right_acts_first, Angle theta_left, Angle theta_right);

/// Outcome numbers: 1/2 for erasure-basis detectors (1 <-> port 2'), 3/4 for
/// which-path detectors (3 <-> label index 0).
struct DetectorOutcome {
    int left;
    int right;

    std::string left_name() const { return "L" + std::to_string(left); }
    std::string right_name() const { return "R" + std::to_string(right); }
    auto operator<=>(const DetectorOutcome &) const = default;
};

/// Outcomes a detector on arm `a` of `c` can produce.
std::vector<int> outcome_set(const OpticalCircuit &c, Arm a);
std::string label_name(int index, bool after_splitter);

/// Amplitudes over (left, right) label indices, index [l][r].
template <class Amp>
using JointAmplitudes = std::array<std::array<Amp, 2>, 2>;

/// Eq. (3) on the ordered joint basis (1,1),(1,2),(2,1),(2,2).
hilbert::StateVector initial_state();
JointAmplitudes<ExactReal> initial_amplitudes_exact();

using ExactTable = std::map<DetectorOutcome, ExactReal>;
using Table = std::map<DetectorOutcome, double>;

/// Evolves the joint state with hilbert unitaries and reads the joint detector
/// observable's Born table. Works for any angle and phase.
Table copenhagen_joint_distribution(const OpticalCircuit &c);
/// Exact version: angles must be multiples of pi/8 and phases 0 or pi.
ExactTable copenhagen_joint_distribution_exact(const OpticalCircuit &c);

struct RecordEntry {
    int layer;
    std::string label;
    auto operator<=>(const RecordEntry &) const = default;
};
using Record = std::vector<RecordEntry>;

struct PathConfiguration {
    std::array<int, 2> actual{0, 0};
    std::array<double, 2> coords{0, 0};
    std::array<Record, 2> record;
};

struct TransportError : std::logic_error {
    using std::logic_error::logic_error;
};

struct TransportResult {
    DetectorOutcome outcome;
    PathConfiguration final;
};

/// Floating-point transport of one initial configuration. At each element the
/// acted particle's global coordinate c = CDF(label) + x p(label), computed
/// from its conditional given the other particle's current label, picks the
/// output label whose conditional CDF interval contains c.
TransportResult bohmian_transport(const OpticalCircuit &c, const PathConfiguration &initial);

/// The same transport with the layer states precomputed once per circuit.
class BohmianTransport {
   public:
    explicit BohmianTransport(OpticalCircuit c);
    TransportResult operator()(const PathConfiguration &initial) const;
    const OpticalCircuit &circuit() const { return circuit_; }

   private:
    OpticalCircuit circuit_;
    std::vector<JointAmplitudes<std::complex<double>>> before_;  // state before each element
};

/// Initial configuration drawn from |psi_0|^2 with uniform coordinates.
PathConfiguration sample_configuration(RngStream &rng);

/// One Copenhagen run: detectors fire in layer order, each through
/// hilbert::measure with collapse.
DetectorOutcome sample_copenhagen(const OpticalCircuit &c, RngStream &rng);

class CopenhagenSampler {
   public:
    explicit CopenhagenSampler(const OpticalCircuit &c);
    DetectorOutcome operator()(RngStream &rng) const;

   private:
    struct Step {
        std::optional<hilbert::UnitaryMap> unitary;
        std::optional<hilbert::Observable> detector;
        Arm arm;
    };
    std::vector<Step> steps_;
};

// Exact enumeration ----------------------------------------------------------

struct Interval {
    ExactReal lo;
    ExactReal hi;
    ExactReal length() const { return hi - lo; }
};

/// A product rectangle of initial coordinates sharing one initial joint label.
/// All points of the cell have the same labels, records and outcome.
struct Cell {
    std::array<int, 2> initial{0, 0};
    std::array<Interval, 2> box;
    ExactReal weight;  // Born weight of the initial joint label
    std::array<int, 2> actual{0, 0};
    std::array<Record, 2> record;
    std::array<std::optional<int>, 2> outcome;

    ExactReal measure() const { return weight * box[0].length() * box[1].length(); }
};

/// Outcome history and current joint label at one layer.
struct LayerKey {
    std::array<std::optional<int>, 2> outcome;
    std::array<int, 2> label;
    auto operator<=>(const LayerKey &) const = default;
};

struct LayerComparison {
    int layer;
    std::map<LayerKey, std::pair<ExactReal, ExactReal>> measures;  // (transport, Born)
    bool equal;
};

struct Enumeration {
    std::vector<Cell> cells;
    std::vector<LayerComparison> layers;
    /// c_out == c_in for every split (the transport is order preserving).
    bool monotone = true;

    bool equivariant() const;
    ExactTable outcome_distribution() const;
};

/// Splits the initial coordinate square at every transport threshold and
/// compares the transported measure with the Born measure after each layer.
Enumeration enumerate_transport(const OpticalCircuit &c);

/// Measure of initial configurations on which cells of `a` and `b` covering
/// the same point satisfy `differ`. Both enumerations partition the same
/// initial measure.
ExactReal differing_measure(const Enumeration &a, const Enumeration &b,
                            const std::function<bool(const Cell &, const Cell &)> &differ);

// Setting dependence ----------------------------------------------------------

struct RecordPair {
    PathConfiguration initial;
    TransportResult interference;
    TransportResult whichpath;
};

struct SettingDependenceReport {
    std::size_t samples;
    std::size_t changed;
    double changed_fraction;
    std::vector<RecordPair> examples;
    /// Measure of initial configurations whose left record changes, by
    /// enumeration (present when the angles are exact).
    std::optional<ExactReal> exact_changed_measure;
};

/// Left fixed to interference; the right arm switches between interference and
/// whichpath. Compares left-arm records per hidden value.
SettingDependenceReport trajectory_setting_dependence(const std::vector<PathConfiguration> &seeds,
                                                      bool right_acts_first = true,
                                                      Angle theta = Angle::pi8_multiple(2),
                                                      std::size_t max_examples = 8);

// Export ----------------------------------------------------------------------

nlohmann::json record_json(const OpticalCircuit &c, const PathConfiguration &initial, const TransportResult &r);
/// Schematic of the circuit with the records drawn along the geometric order;
/// left-arm segments that differ between the two settings of a pair carry the
/// "changed" class.
std::string records_svg(const std::vector<RecordPair> &pairs, bool right_acts_first = true);

}  // namespace qfound::circuit
