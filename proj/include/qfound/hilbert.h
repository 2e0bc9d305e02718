#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qfound/rng.h"

/// Finite-dimensional quantum mechanics: states, observables, unitary
/// evolution, projective measurement with state update, Born probabilities,
/// tensor products, density matrices, and a branching (no-collapse) mode.
namespace qfound::hilbert {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kEigenMergeTolerance = 1e-9;
inline constexpr double kMinOutcomeProbability = 1e-14;

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when collapsing onto an outcome the state assigns (numerically) zero
/// probability. Conditioning on an impossible event has no meaning.
struct ZeroProbabilityOutcome : std::domain_error {
    using std::domain_error::domain_error;
};

struct BasisLabel {
    std::string name;
    std::size_t index;
};

/// Ordered orthonormal basis, possibly a tensor product of factor spaces.
/// Composite labels join the factor labels with ','; the first factor is the
/// most significant digit of the composite index. Immutable once built.
class Space {
   public:
    explicit Space(std::vector<std::string> labels);
    static Space product(const Space &a, const Space &b);

    std::size_t dim() const { return labels_.size(); }
    std::size_t num_factors() const { return factors_.size(); }
    std::size_t factor_dim(std::size_t f) const { return factors_.at(f).size(); }
    const std::vector<std::string> &factor_labels(std::size_t f) const { return factors_.at(f); }
    const std::vector<BasisLabel> &labels() const { return labels_; }
    std::size_t index_of(std::string_view name) const;
    /// Sub-space spanned by the listed factors, in ascending factor order.
    Space subspace(const std::vector<std::size_t> &factors) const;

    friend bool operator==(const Space &a, const Space &b) { return a.factors_ == b.factors_; }

   private:
    Space() = default;
    void rebuild_labels();

    std::vector<std::vector<std::string>> factors_;
    std::vector<BasisLabel> labels_;
};

class StateVector {
   public:
    /// Requires unit norm within kNormTolerance.
    StateVector(Space space, Vector amplitudes);
    static StateVector normalized(Space space, Vector amplitudes);
    static StateVector basis(Space space, std::string_view label);

    const Space &space() const { return space_; }
    const Vector &amplitudes() const { return amps_; }
    std::size_t dim() const { return space_.dim(); }
    Complex amplitude(std::string_view label) const { return amps_(space_.index_of(label)); }

   private:
    Space space_;
    Vector amps_;
};

/// One eigenspace of an observable: eigenvalue, display label, projector.
struct Eigenspace {
    double value;
    std::string label;
    Matrix projector;
};

class Observable {
   public:
    /// Eigendecomposes a Hermitian matrix; eigenvalues within kEigenMergeTolerance
    /// (relative) share one eigenspace.
    Observable(Space space, Matrix matrix);
    /// Explicit spectral form. Projectors must be Hermitian, idempotent,
    /// mutually orthogonal and sum to the identity.
    static Observable from_spectrum(Space space, std::vector<Eigenspace> spectrum);
    /// Diagonal in the space's basis: one eigenspace per basis label, eigenvalue
    /// = 1-based position, label = basis label name.
    static Observable basis_measurement(const Space &space);
    /// obs acting on factor `factor` of `composite`, identity elsewhere. Labels
    /// are kept.
    static Observable local(const Space &composite, std::size_t factor, const Observable &obs);

    const Space &space() const { return space_; }
    const Matrix &matrix() const { return matrix_; }
    const std::vector<Eigenspace> &spectrum() const { return spectrum_; }
    std::size_t num_outcomes() const { return spectrum_.size(); }
    std::size_t find(std::string_view label) const;
    std::size_t find_value(double value) const;

   private:
    Observable() = default;
    Space space_{std::vector<std::string>{"0"}};
    Matrix matrix_;
    std::vector<Eigenspace> spectrum_;
};

class UnitaryMap {
   public:
    enum class Provenance { gate, hamiltonian };

    /// Requires U^dagger U = 1 within kNormTolerance.
    explicit UnitaryMap(Matrix matrix, Provenance provenance = Provenance::gate);
    /// exp(-i H t) via eigendecomposition of the Hermitian H.
    static UnitaryMap from_hamiltonian(const Matrix &hamiltonian, double t);
    static UnitaryMap identity(std::size_t dim);
    /// [[cos t, e^{i phi} sin t], [sin t, -e^{i phi} cos t]]; t = pi/4 sends |1>
    /// to (|1> + |2>)/sqrt 2.
    static UnitaryMap beam_splitter(double theta, double phase = 0.0);
    /// CNOT on two qubits, control = first factor.
    static UnitaryMap controlled_not();
    static UnitaryMap kron(const UnitaryMap &a, const UnitaryMap &b);
    /// u acting on factor `factor` of `composite`, identity elsewhere.
    static UnitaryMap local(const Space &composite, std::size_t factor, const UnitaryMap &u);

    const Matrix &matrix() const { return matrix_; }
    Provenance provenance() const { return provenance_; }
    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    UnitaryMap adjoint() const { return UnitaryMap(matrix_.adjoint(), provenance_); }

   private:
    Matrix matrix_;
    Provenance provenance_;
};

struct OutcomeProbability {
    std::size_t outcome;
    double value;
    std::string label;
    double probability;
};

using BornTable = std::vector<OutcomeProbability>;

struct Measurement {
    std::size_t outcome;
    std::string label;
    StateVector post;
};

struct Branch {
    double weight;
    std::size_t outcome;
    std::string label;
    StateVector state;
};

using BranchSet = std::vector<Branch>;

StateVector tensor(const StateVector &a, const StateVector &b);
StateVector evolve(const StateVector &state, const UnitaryMap &u);
BornTable born_distribution(const StateVector &state, const Observable &obs);
double outcome_probability(const StateVector &state, const Observable &obs, std::size_t outcome);
/// Lueders update: project onto the outcome's eigenspace and renormalize.
StateVector collapse(const StateVector &state, const Observable &obs, std::size_t outcome);
Measurement measure(const StateVector &state, const Observable &obs, RngStream &rng);
/// Every nonzero-probability outcome, weighted by its Born probability.
BranchSet branch(const StateVector &state, const Observable &obs);

class DensityMatrix {
   public:
    /// Requires Hermitian, unit trace, eigenvalues >= -1e-10.
    DensityMatrix(Space space, Matrix matrix);
    static DensityMatrix pure(const StateVector &state);

    const Space &space() const { return space_; }
    const Matrix &matrix() const { return matrix_; }

   private:
    Space space_;
    Matrix matrix_;
};

/// U rho U^dagger.
DensityMatrix conjugate(const DensityMatrix &rho, const UnitaryMap &u);
/// Trace out every factor not listed in `keep`.
DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<std::size_t> &keep);
double purity(const DensityMatrix &rho);

}  // namespace qfound::hilbert
