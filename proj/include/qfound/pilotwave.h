#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <stdexcept>
#include <variant>
#include <vector>

#include "qfound/rng.h"

/// Continuum de Broglie-Bohm dynamics on a uniform periodic grid (hbar = 1).
///
/// The wavefunction follows the configuration-space Schroedinger equation
/// through a Strang split-operator scheme with a spectral kinetic step; the
/// configuration follows the guiding equation m_k dQ_k/dt = Im(psi* d_k psi)/|psi|^2.
namespace qfound::pilotwave {

using Complex = std::complex<double>;
/// A configuration-space point; only the first dims() entries are used.
using Point = std::array<double, 2>;

inline constexpr double kNormTolerance = 1e-10;
/// Density floor relative to max |psi|^2 used by the guiding equation.
inline constexpr double kNodeFloor = 1e-12;

struct Axis {
    double min;
    double max;
    std::size_t points;

    double spacing() const { return (max - min) / static_cast<double>(points); }
    double node(std::size_t j) const { return min + spacing() * static_cast<double>(j); }
};

/// Uniform periodic grid: node j of an axis sits at min + j*spacing and the
/// node after the last one wraps to min. One or two axes; every axis has a
/// power-of-two point count of at least 64.
class GridSpec {
   public:
    explicit GridSpec(std::vector<Axis> axes);

    std::size_t dims() const { return axes_.size(); }
    const Axis &axis(std::size_t k) const { return axes_.at(k); }
    const std::vector<Axis> &axes() const { return axes_; }
    std::size_t size() const;
    double cell_volume() const;
    /// Row-major: the last axis varies fastest.
    std::size_t flat_index(std::size_t i, std::size_t j = 0) const { return dims() == 1 ? i : i * axes_[1].points + j; }
    Point node(std::size_t flat) const;
    bool contains(const Point &q) const;

   private:
    std::vector<Axis> axes_;
};

struct GridWavefunction {
    GridSpec grid;
    std::vector<Complex> values;
    double time = 0;

    /// Validates size, finiteness and unit norm within kNormTolerance.
    GridWavefunction(GridSpec grid, std::vector<Complex> values, double time = 0);
    /// Rescales to unit discrete norm.
    static GridWavefunction normalized(GridSpec grid, std::vector<Complex> values, double time = 0);

    double norm() const;
    std::vector<double> density() const;
};

double discrete_norm(const GridSpec &grid, const std::vector<Complex> &values);

struct FreePotential {};
/// V = sum_k m_k omega_k^2 (q_k - center_k)^2 / 2.
struct HarmonicPotential {
    std::vector<double> omega;
    std::vector<double> center;
};
/// A wall of height `height` across axis 1 at `wall` (thickness `thickness`)
/// with two openings of width `slit_width` centred at +-separation/2 on axis 0.
/// Needs a two-axis grid.
struct DoubleSlitPotential {
    double height;
    double wall;
    double thickness;
    double separation;
    double slit_width;
};

using Potential = std::variant<FreePotential, HarmonicPotential, DoubleSlitPotential>;

struct PhysicsParams {
    std::vector<double> masses;
    Potential potential = FreePotential{};

    /// Throws when masses are not positive or do not match the grid.
    void validate(const GridSpec &grid) const;
    double potential_at(const Point &q, std::size_t dims) const;
};

/// (2 pi sigma^2)^(-1/4) exp(-(q - c)^2 / (4 sigma^2) + i p q) per axis.
struct GaussianProfile {
    std::vector<double> center;
    std::vector<double> width;
    std::vector<double> momentum;
};

/// weight_first * first + weight_second * e^{i phase} * second, normalized.
struct TwoGaussianProfile {
    GaussianProfile first;
    GaussianProfile second;
    double weight_first = 1;
    double weight_second = 1;
    double relative_phase = 0;
};

using Profile = std::variant<GaussianProfile, TwoGaussianProfile>;

/// Rejects profiles whose continuum probability outside the grid exceeds 1e-6.
GridWavefunction init_wavefunction(const GridSpec &grid, const Profile &profile);

/// Upper bound on dt: 0.25 m dx^2 on every axis and 0.1 / max|V| on the grid.
double max_stable_dt(const GridSpec &grid, const PhysicsParams &params);

/// Strang split-operator propagator, bound to one grid, potential and step.
class SplitOperator {
   public:
    SplitOperator(const GridSpec &grid, const PhysicsParams &params, double dt);
    ~SplitOperator();
    SplitOperator(SplitOperator &&) noexcept;
    SplitOperator &operator=(SplitOperator &&) noexcept;

    double dt() const { return dt_; }
    /// Half potential kick, full kinetic step in Fourier space, half kick.
    void step(std::vector<Complex> &values) const;
    GridWavefunction step(const GridWavefunction &psi) const;

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    double dt_;
};

GridWavefunction step_schrodinger(const GridWavefunction &psi, const PhysicsParams &params, double dt);

/// Density and probability-current numerators Im(psi* d_k psi) tabulated on
/// the grid (spectral gradient), interpolated bilinearly at arbitrary points.
class VelocityField {
   public:
    VelocityField(const GridWavefunction &psi, const PhysicsParams &params);

    Point at(const Point &q) const;
    double density_floor() const { return floor_; }

   private:
    GridSpec grid_;
    std::vector<double> masses_;
    std::vector<double> density_;
    std::array<std::vector<double>, 2> current_;
    double floor_;
};

std::vector<Point> velocity_field(const GridWavefunction &psi, const PhysicsParams &params,
                                  const std::vector<Point> &positions);

struct BohmianEnsemble {
    std::size_t dims = 1;
    std::vector<Point> positions;
    std::vector<double> times;
    /// history[t][i]: position of trajectory i at saved time t.
    std::vector<std::vector<Point>> history;
    /// First saved-time index at which trajectory i was absorbed, or -1.
    std::vector<long> absorbed_at;

    std::size_t size() const { return positions.size(); }
    std::size_t absorbed_count() const;
};

/// Independent draws from the cell distribution |psi_j|^2 dV (inverse CDF
/// over cells, uniform jitter inside the cell centred on node j).
BohmianEnsemble sample_equilibrium(const GridWavefunction &psi, std::size_t n, RngStream &rng);

struct IntegrationOptions {
    double dt;
    std::size_t steps;
    std::size_t save_every = 1;
    /// Trajectories closer than this many cells to the grid edge are absorbed.
    double margin_cells = 2;
    unsigned workers = 1;
    bool keep_snapshots = false;
};

struct IntegrationResult {
    GridWavefunction final_state;
    BohmianEnsemble ensemble;
    /// Wavefunction at every saved time (when keep_snapshots is set).
    std::vector<GridWavefunction> snapshots;
    std::vector<std::size_t> snapshot_steps;
    double max_norm_drift = 0;
};

/// Co-evolves the wavefunction and every trajectory with classical RK4; the
/// velocity field at t + dt/2 comes from an explicit half step of psi.
IntegrationResult integrate_trajectories(const GridWavefunction &psi0, const PhysicsParams &params,
                                         BohmianEnsemble ensemble, const IntegrationOptions &options);

enum class Verdict { pass, fail, invalid };

struct EquivarianceReport {
    double ks;
    double threshold;
    Verdict verdict;
    std::size_t samples;
    std::size_t absorbed;
};

/// 99% Kolmogorov-Smirnov critical value 1.63/sqrt(n).
double ks_threshold_99(std::size_t n);

/// Kolmogorov-Smirnov distance between the final positions of the ensemble and
/// the cell distribution of |psi_t|^2 (maximum over axis marginals in 2D).
/// More than 1% absorbed trajectories makes the verdict invalid.
EquivarianceReport check_equivariance(const BohmianEnsemble &ensemble, const GridWavefunction &psi_t,
                                      double threshold = -1);
/// Same, at saved time index `t`.
EquivarianceReport check_equivariance_at(const BohmianEnsemble &ensemble, std::size_t t,
                                         const GridWavefunction &psi_t, double threshold = -1);

/// Number of (pair, consecutive-save interval) events where two 1D
/// trajectories strictly swap order. Absorbed trajectories are skipped from
/// the interval where they were absorbed onward.
std::size_t check_noncrossing(const BohmianEnsemble &ensemble);

struct NodeConditioning : std::domain_error {
    using std::domain_error::domain_error;
};

/// Slice of a two-axis wavefunction at axis `fixed_axis` = `value` (linear
/// interpolation between grid lines), renormalized on the remaining axis.
GridWavefunction conditional_wavefunction(const GridWavefunction &psi, std::size_t fixed_axis, double value);

// Export -------------------------------------------------------------------

/// Header `trajectory_id,time,q1[,q2]`, one row per trajectory and saved time.
/// Rows of absorbed trajectories stop before the save where they were absorbed.
void write_trajectories_csv(std::ostream &out, const BohmianEnsemble &ensemble);
/// Header `q1[,q2],re,im`, one row per grid node.
void write_snapshot_csv(std::ostream &out, const GridWavefunction &psi);
/// `snapshot_<step>.csv` with the step zero-padded to the width of `last_step`.
std::string snapshot_file_name(std::size_t step, std::size_t last_step);

}  // namespace qfound::pilotwave
