#include "qfound/hilbert.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_set>

namespace qfound::hilbert {

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void require_dim(std::size_t got, std::size_t want, const char *what) {
    if (got != want) {
        throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(got) + " does not match " +
                                std::to_string(want));
    }
}

bool near_identity(const Matrix &m, double tol) {
    return (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

// Factor digits of a composite index, most significant first.
std::vector<std::size_t> digits(std::size_t index, const std::vector<std::size_t> &dims) {
    std::vector<std::size_t> out(dims.size());
    for (std::size_t f = dims.size(); f-- > 0;) {
        out[f] = index % dims[f];
        index /= dims[f];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Space

Space::Space(std::vector<std::string> labels) {
    if (labels.empty()) throw std::invalid_argument("Space: empty basis");
    std::unordered_set<std::string> seen;
    for (const auto &l : labels) {
        if (l.empty()) throw std::invalid_argument("Space: empty label");
        if (l.find(',') != std::string::npos) throw std::invalid_argument("Space: ',' is reserved in labels: " + l);
        if (!seen.insert(l).second) throw std::invalid_argument("Space: duplicate label " + l);
    }
    factors_.push_back(std::move(labels));
    rebuild_labels();
}

Space Space::product(const Space &a, const Space &b) {
    Space s;
    s.factors_ = a.factors_;
    s.factors_.insert(s.factors_.end(), b.factors_.begin(), b.factors_.end());
    s.rebuild_labels();
    return s;
}

void Space::rebuild_labels() {
    std::vector<std::size_t> dims;
    std::size_t total = 1;
    for (const auto &f : factors_) {
        dims.push_back(f.size());
        total *= f.size();
    }
    labels_.clear();
    labels_.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto d = digits(i, dims);
        std::string name;
        for (std::size_t f = 0; f < d.size(); ++f) {
            if (f) name += ',';
            name += factors_[f][d[f]];
        }
        labels_.push_back({std::move(name), i});
    }
}

std::size_t Space::index_of(std::string_view name) const {
    for (const auto &l : labels_) {
        if (l.name == name) return l.index;
    }
    throw std::out_of_range("Space: unknown label " + std::string(name));
}

Space Space::subspace(const std::vector<std::size_t> &factors) const {
    if (factors.empty()) throw std::invalid_argument("Space::subspace: no factors");
    std::set<std::size_t> sorted(factors.begin(), factors.end());
    if (sorted.size() != factors.size()) throw std::invalid_argument("Space::subspace: repeated factor");
    Space s;
    for (std::size_t f : sorted) {
        if (f >= factors_.size()) throw std::invalid_argument("Space::subspace: factor out of range");
        s.factors_.push_back(factors_[f]);
    }
    s.rebuild_labels();
    return s;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(Space space, Vector amplitudes) : space_(std::move(space)), amps_(std::move(amplitudes)) {
    require_dim(static_cast<std::size_t>(amps_.size()), space_.dim(), "StateVector");
    if (std::abs(amps_.norm() - 1.0) > kNormTolerance) {
        throw std::invalid_argument("StateVector: norm " + format_value(amps_.norm()) + " is not 1");
    }
}

StateVector StateVector::normalized(Space space, Vector amplitudes) {
    double n = amplitudes.norm();
    if (!(n > 0) || !std::isfinite(n)) throw std::invalid_argument("StateVector: cannot normalize zero vector");
    return StateVector(std::move(space), amplitudes / n);
}

StateVector StateVector::basis(Space space, std::string_view label) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    v(static_cast<Eigen::Index>(space.index_of(label))) = 1.0;
    return StateVector(std::move(space), std::move(v));
}

// ---------------------------------------------------------------------------
// Observable

Observable::Observable(Space space, Matrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
    require_dim(static_cast<std::size_t>(matrix_.rows()), space_.dim(), "Observable");
    require_dim(static_cast<std::size_t>(matrix_.cols()), space_.dim(), "Observable");
    if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance) {
        throw std::invalid_argument("Observable: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_);
    const auto &vals = solver.eigenvalues();
    const auto &vecs = solver.eigenvectors();
    const Eigen::Index n = vals.size();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n &&
               std::abs(vals(end) - vals(start)) <= kEigenMergeTolerance * std::max(1.0, std::abs(vals(start)))) {
            ++end;
        }
        Matrix proj = Matrix::Zero(n, n);
        double mean = 0;
        for (Eigen::Index k = start; k < end; ++k) {
            proj += vecs.col(k) * vecs.col(k).adjoint();
            mean += vals(k);
        }
        mean /= static_cast<double>(end - start);
        spectrum_.push_back({mean, format_value(mean), std::move(proj)});
        start = end;
    }
}

Observable Observable::from_spectrum(Space space, std::vector<Eigenspace> spectrum) {
    const auto n = static_cast<Eigen::Index>(space.dim());
    if (spectrum.empty()) throw std::invalid_argument("Observable: empty spectrum");
    Matrix sum = Matrix::Zero(n, n);
    Matrix m = Matrix::Zero(n, n);
    std::unordered_set<std::string> labels;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const Matrix &p = spectrum[i].projector;
        require_dim(static_cast<std::size_t>(p.rows()), space.dim(), "Observable projector");
        require_dim(static_cast<std::size_t>(p.cols()), space.dim(), "Observable projector");
        if ((p - p.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance ||
            (p * p - p).cwiseAbs().maxCoeff() > kNormTolerance) {
            throw std::invalid_argument("Observable: projector " + spectrum[i].label + " is not an orthogonal projector");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if ((p * spectrum[j].projector).cwiseAbs().maxCoeff() > kNormTolerance) {
                throw std::invalid_argument("Observable: projectors " + spectrum[j].label + " and " +
                                            spectrum[i].label + " overlap");
            }
            if (std::abs(spectrum[i].value - spectrum[j].value) <= kEigenMergeTolerance) {
                throw std::invalid_argument("Observable: repeated eigenvalue");
            }
        }
        if (!labels.insert(spectrum[i].label).second) {
            throw std::invalid_argument("Observable: duplicate outcome label " + spectrum[i].label);
        }
        sum += p;
        m += spectrum[i].value * p;
    }
    if (!near_identity(sum, kNormTolerance)) throw std::invalid_argument("Observable: projectors do not sum to 1");
    Observable obs;
    obs.space_ = std::move(space);
    obs.matrix_ = std::move(m);
    obs.spectrum_ = std::move(spectrum);
    return obs;
}

Observable Observable::basis_measurement(const Space &space) {
    std::vector<Eigenspace> spectrum;
    const auto n = static_cast<Eigen::Index>(space.dim());
    for (const auto &l : space.labels()) {
        Matrix p = Matrix::Zero(n, n);
        p(static_cast<Eigen::Index>(l.index), static_cast<Eigen::Index>(l.index)) = 1.0;
        spectrum.push_back({static_cast<double>(l.index + 1), l.name, std::move(p)});
    }
    return from_spectrum(space, std::move(spectrum));
}

Observable Observable::local(const Space &composite, std::size_t factor, const Observable &obs) {
    if (factor >= composite.num_factors()) throw std::invalid_argument("Observable::local: factor out of range");
    if (!(composite.subspace({factor}) == obs.space())) {
        throw DimensionMismatch("Observable::local: factor space does not match observable space");
    }
    std::vector<Eigenspace> spectrum;
    for (const auto &e : obs.spectrum()) {
        Matrix p = Matrix::Identity(1, 1);
        for (std::size_t f = 0; f < composite.num_factors(); ++f) {
            const auto d = static_cast<Eigen::Index>(composite.factor_dim(f));
            Matrix block = f == factor ? e.projector : Matrix(Matrix::Identity(d, d));
            Matrix next = Matrix::Zero(p.rows() * block.rows(), p.cols() * block.cols());
            for (Eigen::Index i = 0; i < p.rows(); ++i)
                for (Eigen::Index j = 0; j < p.cols(); ++j)
                    next.block(i * block.rows(), j * block.cols(), block.rows(), block.cols()) = p(i, j) * block;
            p = std::move(next);
        }
        spectrum.push_back({e.value, e.label, std::move(p)});
    }
    return from_spectrum(composite, std::move(spectrum));
}

std::size_t Observable::find(std::string_view label) const {
    for (std::size_t i = 0; i < spectrum_.size(); ++i) {
        if (spectrum_[i].label == label) return i;
    }
    throw std::out_of_range("Observable: unknown outcome " + std::string(label));
}

std::size_t Observable::find_value(double value) const {
    for (std::size_t i = 0; i < spectrum_.size(); ++i) {
        if (std::abs(spectrum_[i].value - value) <= kEigenMergeTolerance * std::max(1.0, std::abs(value))) return i;
    }
    throw std::out_of_range("Observable: no eigenvalue " + format_value(value));
}

// ---------------------------------------------------------------------------
// UnitaryMap

UnitaryMap::UnitaryMap(Matrix matrix, Provenance provenance) : matrix_(std::move(matrix)), provenance_(provenance) {
    if (matrix_.rows() != matrix_.cols()) throw DimensionMismatch("UnitaryMap: matrix is not square");
    if (!near_identity(matrix_.adjoint() * matrix_, kNormTolerance)) {
        throw std::invalid_argument("UnitaryMap: matrix is not unitary");
    }
}

UnitaryMap UnitaryMap::from_hamiltonian(const Matrix &h, double t) {
    if (h.rows() != h.cols()) throw DimensionMismatch("UnitaryMap::from_hamiltonian: matrix is not square");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance) {
        throw std::invalid_argument("UnitaryMap::from_hamiltonian: Hamiltonian is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    Vector phases = (solver.eigenvalues().cast<Complex>() * Complex(0, -t)).array().exp();
    Matrix u = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
    return UnitaryMap(std::move(u), Provenance::hamiltonian);
}

UnitaryMap UnitaryMap::identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return UnitaryMap(Matrix::Identity(n, n));
}

UnitaryMap UnitaryMap::beam_splitter(double theta, double phase) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Complex e = std::polar(1.0, phase);
    Matrix m(2, 2);
    m << c, e * s, s, -e * c;
    return UnitaryMap(std::move(m));
}

UnitaryMap UnitaryMap::controlled_not() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
    return UnitaryMap(std::move(m));
}

UnitaryMap UnitaryMap::kron(const UnitaryMap &a, const UnitaryMap &b) {
    const Matrix &x = a.matrix(), &y = b.matrix();
    Matrix m(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) m.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return UnitaryMap(std::move(m));
}

UnitaryMap UnitaryMap::local(const Space &composite, std::size_t factor, const UnitaryMap &u) {
    if (factor >= composite.num_factors()) throw std::invalid_argument("UnitaryMap::local: factor out of range");
    require_dim(u.dim(), composite.factor_dim(factor), "UnitaryMap::local");
    UnitaryMap out = identity(1);
    for (std::size_t f = 0; f < composite.num_factors(); ++f) {
        out = kron(out, f == factor ? u : identity(composite.factor_dim(f)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Operations on states

StateVector tensor(const StateVector &a, const StateVector &b) {
    const Vector &x = a.amplitudes(), &y = b.amplitudes();
    Vector v(x.size() * y.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) v.segment(i * y.size(), y.size()) = x(i) * y;
    return StateVector(Space::product(a.space(), b.space()), std::move(v));
}

StateVector evolve(const StateVector &state, const UnitaryMap &u) {
    require_dim(u.dim(), state.dim(), "evolve");
    return StateVector(state.space(), u.matrix() * state.amplitudes());
}

double outcome_probability(const StateVector &state, const Observable &obs, std::size_t outcome) {
    require_dim(obs.space().dim(), state.dim(), "outcome_probability");
    const Matrix &p = obs.spectrum().at(outcome).projector;
    return (p * state.amplitudes()).squaredNorm();
}

BornTable born_distribution(const StateVector &state, const Observable &obs) {
    require_dim(obs.space().dim(), state.dim(), "born_distribution");
    BornTable table;
    double total = 0;
    for (std::size_t i = 0; i < obs.num_outcomes(); ++i) {
        const auto &e = obs.spectrum()[i];
        double p = (e.projector * state.amplitudes()).squaredNorm();
        table.push_back({i, e.value, e.label, p});
        total += p;
    }
    // Projectors sum to one, so the total only differs from 1 by rounding.
    for (auto &row : table) row.probability /= total;
    return table;
}

StateVector collapse(const StateVector &state, const Observable &obs, std::size_t outcome) {
    require_dim(obs.space().dim(), state.dim(), "collapse");
    const auto &e = obs.spectrum().at(outcome);
    Vector projected = e.projector * state.amplitudes();
    double p = projected.squaredNorm();
    if (p <= kMinOutcomeProbability) {
        throw ZeroProbabilityOutcome("collapse: outcome " + e.label + " has probability " + format_value(p));
    }
    return StateVector::normalized(state.space(), std::move(projected));
}

Measurement measure(const StateVector &state, const Observable &obs, RngStream &rng) {
    BornTable table = born_distribution(state, obs);
    double u = rng.uniform();
    std::size_t chosen = table.size();
    double cumulative = 0;
    for (const auto &row : table) {
        if (row.probability <= kMinOutcomeProbability) continue;
        cumulative += row.probability;
        chosen = row.outcome;
        if (u < cumulative) break;
    }
    return {chosen, obs.spectrum()[chosen].label, collapse(state, obs, chosen)};
}

BranchSet branch(const StateVector &state, const Observable &obs) {
    BranchSet out;
    for (const auto &row : born_distribution(state, obs)) {
        if (row.probability <= kMinOutcomeProbability) continue;
        out.push_back({row.probability, row.outcome, row.label, collapse(state, obs, row.outcome)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Density matrices

DensityMatrix::DensityMatrix(Space space, Matrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
    require_dim(static_cast<std::size_t>(matrix_.rows()), space_.dim(), "DensityMatrix");
    require_dim(static_cast<std::size_t>(matrix_.cols()), space_.dim(), "DensityMatrix");
    if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance) {
        throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex(1.0)) > kNormTolerance) {
        throw std::invalid_argument("DensityMatrix: trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
        throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
    }
}

DensityMatrix DensityMatrix::pure(const StateVector &state) {
    return DensityMatrix(state.space(), state.amplitudes() * state.amplitudes().adjoint());
}

DensityMatrix conjugate(const DensityMatrix &rho, const UnitaryMap &u) {
    require_dim(u.dim(), rho.space().dim(), "conjugate");
    Matrix m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    // Restore exact Hermiticity lost to rounding.
    m = (0.5 * (m + m.adjoint())).eval();
    return DensityMatrix(rho.space(), std::move(m));
}

DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<std::size_t> &keep) {
    const Space &space = rho.space();
    Space kept = space.subspace(keep);
    std::vector<bool> is_kept(space.num_factors(), false);
    for (std::size_t f : keep) is_kept[f] = true;

    std::vector<std::size_t> dims;
    for (std::size_t f = 0; f < space.num_factors(); ++f) dims.push_back(space.factor_dim(f));

    const auto n = static_cast<Eigen::Index>(kept.dim());
    Matrix out = Matrix::Zero(n, n);
    const std::size_t d = space.dim();
    std::vector<std::vector<std::size_t>> digit_cache(d);
    for (std::size_t i = 0; i < d; ++i) digit_cache[i] = digits(i, dims);

    auto split = [&](const std::vector<std::size_t> &dg, std::size_t &kept_index, std::size_t &traced_index) {
        kept_index = traced_index = 0;
        for (std::size_t f = 0; f < dg.size(); ++f) {
            if (is_kept[f]) {
                kept_index = kept_index * dims[f] + dg[f];
            } else {
                traced_index = traced_index * dims[f] + dg[f];
            }
        }
    };
    for (std::size_t i = 0; i < d; ++i) {
        std::size_t ki, ti;
        split(digit_cache[i], ki, ti);
        for (std::size_t j = 0; j < d; ++j) {
            std::size_t kj, tj;
            split(digit_cache[j], kj, tj);
            if (ti != tj) continue;
            out(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(kj)) +=
                rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return DensityMatrix(std::move(kept), std::move(out));
}

double purity(const DensityMatrix &rho) { return (rho.matrix() * rho.matrix()).trace().real(); }

}  // namespace qfound::hilbert
