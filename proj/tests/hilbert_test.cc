#include "qfound/hilbert.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace qfound;
using namespace qfound::hilbert;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Space paths() { return Space({"1", "2"}); }

StateVector plus() { return StateVector(paths(), Vector{{kInvSqrt2, kInvSqrt2}}); }
StateVector minus() { return StateVector(paths(), Vector{{kInvSqrt2, -kInvSqrt2}}); }

StateVector eraser_state() {
    Space s = Space::product(paths(), paths());
    return StateVector(s, Vector{{kInvSqrt2, 0, 0, kInvSqrt2}});
}

Matrix ket_bra(const Vector &v) { return v * v.adjoint(); }

// L1/L2 project onto |->/|+> (erasure basis) on one path factor.
Observable erasure_observable() {
    return Observable::from_spectrum(paths(), {{1, "1", ket_bra(minus().amplitudes())},
                                               {2, "2", ket_bra(plus().amplitudes())}});
}

Vector random_vector(RngStream &rng, Eigen::Index d) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
    return v;
}

Space numbered_space(std::size_t d) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < d; ++i) labels.push_back(std::to_string(i + 1));
    return Space(labels);
}

// Random Hermitian with a deliberately degenerate spectrum half the time.
Observable random_observable(RngStream &rng, std::size_t d) {
    auto n = static_cast<Eigen::Index>(d);
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) a.col(i) = random_vector(rng, n);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    Vector eig(n);
    bool degenerate = rng.uniform() < 0.5;
    for (Eigen::Index i = 0; i < n; ++i) {
        eig(i) = degenerate ? static_cast<double>(i / 2) : static_cast<double>(i) - 1.5;
    }
    Matrix h = q * eig.asDiagonal() * q.adjoint();
    h = (0.5 * (h + h.adjoint())).eval();
    return Observable(numbered_space(d), h);
}

}  // namespace

TEST(Space, product_labels_and_order) {
    Space s = Space::product(Space({"1", "2"}), Space({"a", "b", "c"}));
    ASSERT_EQ(s.dim(), 6u);
    EXPECT_EQ(s.labels()[0].name, "1,a");
    EXPECT_EQ(s.labels()[1].name, "1,b");
    EXPECT_EQ(s.labels()[3].name, "2,a");
    EXPECT_EQ(s.index_of("2,c"), 5u);
    EXPECT_THROW(Space({"x", "x"}), std::invalid_argument);
    EXPECT_THROW(s.index_of("3,a"), std::out_of_range);
}

TEST(StateVector, rejects_unnormalized) {
    EXPECT_THROW(StateVector(paths(), Vector{{1.0, 1.0}}), std::invalid_argument);
    EXPECT_THROW(StateVector(paths(), Vector{{1.0, 0.0, 0.0}}), DimensionMismatch);
}

TEST(Tensor, product_basis) {
    StateVector s = tensor(StateVector::basis(paths(), "1"), StateVector::basis(paths(), "2"));
    EXPECT_EQ(s.amplitude("1,2"), Complex(1.0));
    EXPECT_EQ(s.amplitudes().norm(), 1.0);
}

TEST(Tensor, linearity) {
    StateVector s = tensor(plus(), StateVector::basis(paths(), "1"));
    EXPECT_NEAR(std::abs(s.amplitude("1,1") - kInvSqrt2), 0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude("2,1") - kInvSqrt2), 0, 1e-15);
    EXPECT_EQ(s.amplitude("1,2"), Complex(0.0));
}

TEST(Tensor, dimension_product) {
    StateVector a = StateVector::basis(paths(), "1");
    StateVector b = StateVector::basis(Space({"x", "y", "z"}), "y");
    EXPECT_EQ(tensor(a, b).dim(), 6u);
}

TEST(Evolve, identity) {
    StateVector s = evolve(plus(), UnitaryMap::identity(2));
    EXPECT_EQ(s.amplitudes(), plus().amplitudes());
}

TEST(Evolve, beam_splitter_makes_plus) {
    StateVector s = evolve(StateVector::basis(paths(), "1"), UnitaryMap::beam_splitter(M_PI / 4));
    EXPECT_LT((s.amplitudes() - plus().amplitudes()).norm(), 1e-15);
}

TEST(Evolve, adjoint_undoes) {
    RngStream rng(1, 0);
    Matrix h = Matrix::Random(5, 5);
    h = (h + h.adjoint()).eval();
    UnitaryMap u = UnitaryMap::from_hamiltonian(h, 0.7);
    StateVector s = StateVector::normalized(numbered_space(5), random_vector(rng, 5));
    StateVector back = evolve(evolve(s, u), u.adjoint());
    EXPECT_LT((back.amplitudes() - s.amplitudes()).norm(), 1e-12);
}

TEST(Evolve, dimension_mismatch) {
    EXPECT_THROW(evolve(plus(), UnitaryMap::identity(3)), DimensionMismatch);
}

TEST(UnitaryMap, rejects_non_unitary) {
    EXPECT_THROW(UnitaryMap(Matrix::Ones(2, 2)), std::invalid_argument);
}

TEST(UnitaryMap, hamiltonian_evolution_matches_closed_form) {
    // H = sigma_x: exp(-i t sigma_x) = cos t - i sin t sigma_x.
    Matrix h(2, 2);
    h << 0, 1, 1, 0;
    UnitaryMap u = UnitaryMap::from_hamiltonian(h, 0.3);
    Matrix want(2, 2);
    want << std::cos(0.3), Complex(0, -std::sin(0.3)), Complex(0, -std::sin(0.3)), std::cos(0.3);
    EXPECT_LT((u.matrix() - want).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(u.provenance(), UnitaryMap::Provenance::hamiltonian);
}

TEST(Born, eigenstate) {
    Observable obs = Observable::basis_measurement(paths());
    BornTable t = born_distribution(StateVector::basis(paths(), "1"), obs);
    EXPECT_EQ(t[0].probability, 1.0);
    EXPECT_EQ(t[1].probability, 0.0);
}

TEST(Born, plus_on_path_observable) {
    BornTable t = born_distribution(plus(), Observable::basis_measurement(paths()));
    EXPECT_NEAR(t[0].probability, 0.5, 1e-15);
    EXPECT_NEAR(t[1].probability, 0.5, 1e-15);
}

TEST(Born, eraser_joint_detectors) {
    StateVector psi = eraser_state();
    Space s = psi.space();
    Matrix pm = ket_bra(minus().amplitudes()), pp = ket_bra(plus().amplitudes());
    auto kron = [](const Matrix &a, const Matrix &b) {
        Matrix m(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
        return m;
    };
    Observable joint = Observable::from_spectrum(s, {{1, "L1R1", kron(pm, pm)},
                                                     {2, "L1R2", kron(pm, pp)},
                                                     {3, "L2R1", kron(pp, pm)},
                                                     {4, "L2R2", kron(pp, pp)}});
    BornTable t = born_distribution(psi, joint);
    EXPECT_NEAR(t[joint.find("L1R1")].probability, 0.5, 1e-15);
    EXPECT_NEAR(t[joint.find("L2R2")].probability, 0.5, 1e-15);
    EXPECT_NEAR(t[joint.find("L1R2")].probability, 0.0, 1e-15);
    EXPECT_NEAR(t[joint.find("L2R1")].probability, 0.0, 1e-15);
}

TEST(Collapse, eigenstate_unchanged) {
    Observable obs = Observable::basis_measurement(paths());
    StateVector s = StateVector::basis(paths(), "2");
    EXPECT_EQ(collapse(s, obs, obs.find("2")).amplitudes(), s.amplitudes());
}

TEST(Collapse, plus_to_path_one) {
    Observable obs = Observable::basis_measurement(paths());
    StateVector s = collapse(plus(), obs, obs.find("1"));
    EXPECT_LT((s.amplitudes() - StateVector::basis(paths(), "1").amplitudes()).norm(), 1e-15);
}

TEST(Collapse, zero_probability_is_an_error) {
    Observable obs = Observable::basis_measurement(paths());
    EXPECT_THROW(collapse(StateVector::basis(paths(), "1"), obs, obs.find("2")), ZeroProbabilityOutcome);
}

TEST(Collapse, eraser_left_detection_fixes_right_conditional) {
    StateVector psi = eraser_state();
    Observable left = Observable::local(psi.space(), 0, erasure_observable());
    StateVector post = collapse(psi, left, left.find("1"));

    // Oracle: (<-|_L (x) 1) Psi = |->_R / sqrt 2, so post = |->_L |->_R.
    Vector m = minus().amplitudes();
    Vector want(4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) want(2 * i + j) = m(i) * m(j);
    EXPECT_LT((post.amplitudes() - want).norm(), 1e-15);

    Observable right = Observable::local(psi.space(), 1, erasure_observable());
    EXPECT_NEAR(outcome_probability(post, right, right.find("1")), 1.0, 1e-15);
}

TEST(Measure, eigenstate) {
    Observable obs = Observable::basis_measurement(paths());
    RngStream rng(3, 0);
    for (int i = 0; i < 20; ++i) {
        Measurement m = measure(StateVector::basis(paths(), "2"), obs, rng);
        EXPECT_EQ(m.label, "2");
        EXPECT_EQ(m.post.amplitudes(), StateVector::basis(paths(), "2").amplitudes());
    }
}

TEST(Measure, bernoulli_frequency) {
    Observable obs = Observable::basis_measurement(paths());
    RngStream rng(4, 0);
    const int n = 100000;
    int ones = 0;
    StateVector s = plus();
    for (int i = 0; i < n; ++i) ones += measure(s, obs, rng).label == "1";
    EXPECT_NEAR(static_cast<double>(ones) / n, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(Measure, immediate_repetition_repeats) {
    Observable obs = Observable::basis_measurement(paths());
    RngStream rng(5, 0);
    for (int i = 0; i < 1000; ++i) {
        Measurement first = measure(plus(), obs, rng);
        Measurement second = measure(first.post, obs, rng);
        ASSERT_EQ(first.outcome, second.outcome);
    }
}

TEST(Measure, deterministic_given_stream) {
    Observable obs = Observable::basis_measurement(paths());
    RngStream a(6, 9), b(6, 9);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(measure(plus(), obs, a).outcome, measure(plus(), obs, b).outcome);
}

TEST(Branch, eigenstate_single_branch) {
    BranchSet b = branch(StateVector::basis(paths(), "1"), Observable::basis_measurement(paths()));
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].weight, 1.0);
}

TEST(Branch, plus_two_branches) {
    BranchSet b = branch(plus(), Observable::basis_measurement(paths()));
    ASSERT_EQ(b.size(), 2u);
    EXPECT_NEAR(b[0].weight, 0.5, 1e-15);
    EXPECT_LT((b[0].state.amplitudes() - StateVector::basis(paths(), "1").amplitudes()).norm(), 1e-15);
    EXPECT_LT((b[1].state.amplitudes() - StateVector::basis(paths(), "2").amplitudes()).norm(), 1e-15);
}

TEST(Branch, eraser_left_branches) {
    StateVector psi = eraser_state();
    Observable left = Observable::local(psi.space(), 0, erasure_observable());
    BranchSet b = branch(psi, left);
    ASSERT_EQ(b.size(), 2u);
    Observable right = Observable::local(psi.space(), 1, erasure_observable());
    for (const auto &br : b) {
        EXPECT_NEAR(br.weight, 0.5, 1e-15);
        // L1 -> right conditional |->, L2 -> |+>.
        EXPECT_NEAR(outcome_probability(br.state, right, right.find(br.label)), 1.0, 1e-15);
    }
}

TEST(Observable, rejects_non_hermitian) {
    Matrix m(2, 2);
    m << 0, 1, 0, 0;
    EXPECT_THROW(Observable(paths(), m), std::invalid_argument);
}

TEST(Observable, degenerate_eigenvalues_merge) {
    Matrix m = Matrix::Identity(3, 3);
    m(2, 2) = 2;
    Observable obs(numbered_space(3), m);
    ASSERT_EQ(obs.num_outcomes(), 2u);
    EXPECT_NEAR(obs.spectrum()[0].projector.trace().real(), 2, 1e-12);
}

TEST(Observable, lueders_rule_on_degenerate_eigenspace) {
    Matrix m = Matrix::Identity(3, 3);
    m(2, 2) = 2;
    Observable obs(numbered_space(3), m);
    StateVector s(numbered_space(3), Vector{{0.6, 0.0, 0.8}});
    StateVector post = collapse(s, obs, obs.find_value(1.0));
    EXPECT_NEAR(std::abs(post.amplitudes()(0)), 1.0, 1e-12);
    // Repeatability holds for degenerate outcomes too.
    EXPECT_NEAR(outcome_probability(post, obs, obs.find_value(1.0)), 1.0, 1e-12);
}

TEST(Observable, spectrum_invariants) {
    RngStream rng(12, 0);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t d = 2 + trial % 6;
        Observable obs = random_observable(rng, d);
        auto n = static_cast<Eigen::Index>(d);
        Matrix sum = Matrix::Zero(n, n);
        for (std::size_t i = 0; i < obs.num_outcomes(); ++i) {
            const Matrix &p = obs.spectrum()[i].projector;
            EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
            for (std::size_t j = 0; j < i; ++j) EXPECT_LT((p * obs.spectrum()[j].projector).cwiseAbs().maxCoeff(), 1e-12);
            sum += p;
        }
        EXPECT_LT((sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

// Properties over random states and observables.
TEST(Properties, norm_born_and_repeatability) {
    RngStream rng(99, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t d = 2 + trial % 7;
        auto n = static_cast<Eigen::Index>(d);
        StateVector s = StateVector::normalized(numbered_space(d), random_vector(rng, n));
        Observable obs = random_observable(rng, d);
        Matrix h(n, n);
        for (Eigen::Index i = 0; i < n; ++i) h.col(i) = random_vector(rng, n);
        h = (h + h.adjoint()).eval();
        StateVector t = evolve(s, UnitaryMap::from_hamiltonian(h, rng.uniform() * 5));
        EXPECT_LT(std::abs(t.amplitudes().norm() - 1.0), 1e-12);

        double total = 0;
        for (const auto &row : born_distribution(t, obs)) total += row.probability;
        EXPECT_NEAR(total, 1.0, 1e-12);

        Measurement m = measure(t, obs, rng);
        EXPECT_NEAR(outcome_probability(m.post, obs, m.outcome), 1.0, 1e-12);
    }
}

TEST(Properties, collapse_necessity) {
    // Beam-splitter scenario: Born applied twice to the un-updated state vs.
    // the collapse pipeline. P(second finds path 1 | first found nothing on 1).
    Observable obs = Observable::basis_measurement(paths());
    StateVector s = plus();
    std::size_t one = obs.find("1"), two = obs.find("2");
    double without_update = outcome_probability(s, obs, one);
    double with_update = outcome_probability(collapse(s, obs, two), obs, one);
    EXPECT_NEAR(without_update, 0.5, 1e-15);
    EXPECT_EQ(with_update, 0.0);
    EXPECT_NE(without_update, with_update);
}

TEST(DensityMatrix, validation) {
    EXPECT_THROW(DensityMatrix(paths(), Matrix::Identity(2, 2)), std::invalid_argument);
    Matrix neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    EXPECT_THROW(DensityMatrix(paths(), neg), std::invalid_argument);
}

TEST(PartialTrace, product_state) {
    StateVector s = tensor(StateVector::basis(paths(), "1"), StateVector::basis(paths(), "2"));
    DensityMatrix r = partial_trace(DensityMatrix::pure(s), {0});
    EXPECT_LT((r.matrix() - ket_bra(StateVector::basis(paths(), "1").amplitudes())).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(purity(r), 1.0, 1e-15);
}

TEST(PartialTrace, eraser_state_is_maximally_mixed) {
    DensityMatrix r = partial_trace(DensityMatrix::pure(eraser_state()), {0});
    EXPECT_LT((r.matrix() - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(purity(r), 0.5, 1e-12);
    EXPECT_LT(purity(r), 1 - 1e-6);
}

TEST(PartialTrace, keep_everything) {
    DensityMatrix rho = DensityMatrix::pure(eraser_state());
    DensityMatrix r = partial_trace(rho, {0, 1});
    EXPECT_EQ(r.matrix(), rho.matrix());
}

TEST(PartialTrace, three_factors_keep_middle) {
    Space q({"0", "1"});
    StateVector a = StateVector::basis(q, "0");
    StateVector b(q, Vector{{0.6, 0.8}});
    StateVector c = StateVector::basis(q, "1");
    DensityMatrix r = partial_trace(DensityMatrix::pure(tensor(tensor(a, b), c)), {1});
    EXPECT_LT((r.matrix() - ket_bra(b.amplitudes())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PartialTrace, invalid_subset) {
    DensityMatrix rho = DensityMatrix::pure(eraser_state());
    EXPECT_THROW(partial_trace(rho, {}), std::invalid_argument);
    EXPECT_THROW(partial_trace(rho, {2}), std::invalid_argument);
    EXPECT_THROW(partial_trace(rho, {0, 0}), std::invalid_argument);
}

TEST(Purity, values) {
    EXPECT_NEAR(purity(DensityMatrix::pure(plus())), 1.0, 1e-15);
    EXPECT_NEAR(purity(DensityMatrix(paths(), 0.5 * Matrix::Identity(2, 2))), 0.5, 1e-15);
}

TEST(Purity, unitary_invariance_and_entangler) {
    StateVector product = tensor(plus(), StateVector::basis(paths(), "1"));
    DensityMatrix rho = DensityMatrix::pure(product);
    UnitaryMap cnot = UnitaryMap::controlled_not();
    DensityMatrix after = conjugate(rho, cnot);
    EXPECT_NEAR(purity(after), purity(rho), 1e-12);
    double reduced_before = purity(partial_trace(rho, {0}));
    double reduced_after = purity(partial_trace(after, {0}));
    EXPECT_NEAR(reduced_before, 1.0, 1e-12);
    EXPECT_LT(reduced_after, reduced_before - 1e-6);
}
