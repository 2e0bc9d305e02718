#include "qfound/pilotwave.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

using namespace qfound;
using namespace qfound::pilotwave;

namespace {

GridSpec line(double lo = -20, double hi = 20, std::size_t n = 512) { return GridSpec({{lo, hi, n}}); }

PhysicsParams free_particle(double m = 1) { return {{m}, FreePotential{}}; }

PhysicsParams harmonic(double omega = 1, double m = 1) { return {{m}, HarmonicPotential{{omega}, {0}}}; }

GaussianProfile gaussian(double c, double s, double p) { return {{c}, {s}, {p}}; }

double mean_position(const GridWavefunction &psi) {
    double s = 0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) s += psi.grid.node(i)[0] * std::norm(psi.values[i]);
    return s * psi.grid.cell_volume();
}

double width(const GridWavefunction &psi) {
    double m = mean_position(psi), s = 0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        double d = psi.grid.node(i)[0] - m;
        s += d * d * std::norm(psi.values[i]);
    }
    return std::sqrt(s * psi.grid.cell_volume());
}

// Closed-form freely spreading packet (centre 0, zero mean momentum).
std::vector<Complex> free_packet_values(const GridSpec &g, double sigma0, double m, double t) {
    const Complex a = Complex(1, t / (2 * m * sigma0 * sigma0));
    std::vector<Complex> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double q = g.node(i)[0];
        v[i] = std::pow(2 * M_PI * sigma0 * sigma0, -0.25) / std::sqrt(a) * std::exp(-q * q / (4 * sigma0 * sigma0 * a));
    }
    return v;
}

double free_sigma(double sigma0, double m, double t) {
    double tau = t / (2 * m * sigma0 * sigma0);
    return sigma0 * std::sqrt(1 + tau * tau);
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST(GridSpec, validation) {
    EXPECT_THROW(GridSpec({{0, 1, 32}}), std::invalid_argument);
    EXPECT_THROW(GridSpec({{0, 1, 100}}), std::invalid_argument);
    EXPECT_THROW(GridSpec({{1, 0, 64}}), std::invalid_argument);
    EXPECT_THROW(GridSpec({{0, 1, 64}, {0, 1, 64}, {0, 1, 64}}), std::invalid_argument);
    GridSpec g({{-1, 1, 64}, {0, 4, 128}});
    EXPECT_EQ(g.size(), 64u * 128u);
    EXPECT_DOUBLE_EQ(g.node(g.flat_index(3, 5))[1], 5 * 4.0 / 128);
}

TEST(InitWavefunction, gaussian_normalized) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
}

TEST(InitWavefunction, symmetric_two_gaussian_half_mass) {
    TwoGaussianProfile two{gaussian(-4, 1, 0), gaussian(4, 1, 0)};
    GridWavefunction psi = init_wavefunction(line(), two);
    double below = 0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        double q = psi.grid.node(i)[0];
        double w = q < 0 ? 1.0 : (q == 0 ? 0.5 : 0.0);
        below += w * std::norm(psi.values[i]) * psi.grid.cell_volume();
    }
    EXPECT_NEAR(below, 0.5, 1e-6);
}

TEST(InitWavefunction, momentum_expectation_by_direct_dft) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 2));
    // Direct O(n^2) DFT, independent of the FFT backend.
    const std::size_t n = psi.values.size();
    const double h = psi.grid.axis(0).spacing();
    double num = 0, den = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double k = 2 * M_PI / (n * h) * (j < n / 2 ? double(j) : double(j) - double(n));
        Complex c = 0;
        for (std::size_t x = 0; x < n; ++x) c += psi.values[x] * std::polar(1.0, -2 * M_PI * double(j * x % n) / double(n));
        num += k * std::norm(c);
        den += std::norm(c);
    }
    EXPECT_NEAR(num / den, 2.0, 1e-6);
}

TEST(InitWavefunction, rejects_leaky_profile) {
    EXPECT_THROW(init_wavefunction(line(), gaussian(0, 8, 0)), std::invalid_argument);
    EXPECT_THROW(init_wavefunction(line(), gaussian(19, 1, 0)), std::invalid_argument);
    EXPECT_THROW(init_wavefunction(line(), GaussianProfile{{0, 0}, {1, 1}, {0, 0}}), std::invalid_argument);
}

TEST(StepSchrodinger, free_spreading_matches_closed_form) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    SplitOperator op(psi.grid, free_particle(), 0.001);
    for (int i = 0; i < 2000; ++i) psi = op.step(psi);
    EXPECT_NEAR(psi.time, 2.0, 1e-12);
    double want = free_sigma(1, 1, 2.0);
    EXPECT_LT(std::abs(width(psi) - want) / want, 1e-3);
}

TEST(StepSchrodinger, coherent_state_oscillates_classically) {
    // Ground-state width 1/sqrt(2 m omega) displaced to q0 = 3.
    GridSpec g = line(-12, 12, 256);
    GridWavefunction psi = init_wavefunction(g, gaussian(3, 1 / std::sqrt(2.0), 0));
    const double period = 2 * M_PI;
    const int steps = 5000;
    SplitOperator op(g, harmonic(), period / steps);
    double worst = 0;
    for (int i = 1; i <= steps; ++i) {
        psi = op.step(psi);
        if (i % 250 == 0) worst = std::max(worst, std::abs(mean_position(psi) - 3 * std::cos(psi.time)));
    }
    EXPECT_LT(worst / 3, 1e-3);
}

TEST(StepSchrodinger, norm_preserved_over_many_steps) {
    GridSpec g = line(-12, 12, 256);
    GridWavefunction psi = init_wavefunction(g, TwoGaussianProfile{gaussian(-2, 0.7, 1), gaussian(2, 0.5, -1)});
    SplitOperator op(g, harmonic(), 1e-3);
    for (int i = 0; i < 1000; ++i) psi = op.step(psi);
    EXPECT_LT(std::abs(psi.norm() - 1), 1e-10);
}

TEST(StepSchrodinger, rejects_unstable_dt) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    double bound = max_stable_dt(psi.grid, free_particle());
    EXPECT_NEAR(bound, 0.25 * std::pow(40.0 / 512, 2), 1e-15);
    EXPECT_THROW(step_schrodinger(psi, free_particle(), 2 * bound), std::invalid_argument);
    EXPECT_THROW(step_schrodinger(psi, free_particle(), 0), std::invalid_argument);
    EXPECT_NO_THROW(step_schrodinger(psi, free_particle(), bound));
}

TEST(StepSchrodinger, second_order_convergence) {
    // A displaced packet in a harmonic well: kinetic and potential steps do not
    // commute, so the splitting error is visible. Reference: dt/64.
    GridSpec g = line(-12, 12, 256);
    GridWavefunction psi0 = init_wavefunction(g, gaussian(2, 0.6, 0.5));
    const double total = 0.5, dt = 0.00125;
    auto run = [&](double h) {
        SplitOperator op(g, harmonic(), h);
        std::vector<Complex> v = psi0.values;
        auto steps = static_cast<int>(std::lround(total / h));
        for (int i = 0; i < steps; ++i) op.step(v);
        return v;
    };
    auto distance = [&](const std::vector<Complex> &a, const std::vector<Complex> &b) {
        std::vector<Complex> d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
        return discrete_norm(g, d);
    };
    auto reference = run(dt / 64);
    double coarse = distance(run(dt), reference);
    double fine = distance(run(dt / 2), reference);
    double ratio = coarse / fine;
    EXPECT_GT(coarse, 1e-9);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(StepSchrodinger, two_axis_norm_and_separability) {
    GridSpec g({{-10, 10, 64}, {-10, 10, 64}});
    PhysicsParams p{{1, 2}, HarmonicPotential{{1, 0.5}, {0, 0}}};
    GridWavefunction psi = init_wavefunction(g, GaussianProfile{{1, -1}, {0.8, 1.2}, {0.5, 0}});
    SplitOperator op(g, p, 0.5 * max_stable_dt(g, p));
    for (int i = 0; i < 200; ++i) psi = op.step(psi);
    EXPECT_LT(std::abs(psi.norm() - 1), 1e-10);
}

TEST(VelocityField, real_wavefunction_is_stationary) {
    GridWavefunction psi = init_wavefunction(line(), TwoGaussianProfile{gaussian(-3, 1, 0), gaussian(3, 1.5, 0)});
    std::vector<Point> pts;
    for (double q = -18; q < 18; q += 0.0371) pts.push_back({q, 0});
    double worst = 0;
    for (const Point &v : velocity_field(psi, free_particle(), pts)) worst = std::max(worst, std::abs(v[0]));
    EXPECT_LT(worst, 1e-10);
}

TEST(VelocityField, plane_phase_gives_de_broglie_velocity) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 2));
    auto v = velocity_field(psi, free_particle(2.0), {{0.0, 0}});
    EXPECT_NEAR(v[0][0], 1.0, 1e-6);
}

TEST(VelocityField, free_packet_profile) {
    GridSpec g = line();
    const double t = 1.5, m = 1, s0 = 1;
    GridWavefunction psi(g, free_packet_values(g, s0, m, t), t);
    const double tau = t / (2 * m * s0 * s0);
    double worst = 0;
    for (double q = -4; q <= 4; q += 0.173) {
        double want = q * (t / (4 * m * m * std::pow(s0, 4))) / (1 + tau * tau);
        worst = std::max(worst, std::abs(velocity_field(psi, free_particle(m), {{q, 0}})[0][0] - want));
    }
    EXPECT_LT(worst, 1e-3);
}

TEST(VelocityField, two_axis_product_state) {
    GridSpec g({{-10, 10, 128}, {-10, 10, 128}});
    GridWavefunction psi = init_wavefunction(g, GaussianProfile{{0, 0}, {1, 1}, {1.5, -0.5}});
    PhysicsParams p{{1, 2}, FreePotential{}};
    auto v = velocity_field(psi, p, {{0.3, -0.2}});
    EXPECT_NEAR(v[0][0], 1.5, 1e-9);
    EXPECT_NEAR(v[0][1], -0.25, 1e-9);
}

TEST(VelocityField, node_is_regularized) {
    // Odd real-times-phase packet: exact node at q = 0.
    GridSpec g = line();
    std::vector<Complex> vals(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double q = g.node(i)[0];
        vals[i] = q * std::exp(Complex(-q * q / 4, 0.7 * q));
    }
    GridWavefunction psi = GridWavefunction::normalized(g, vals);
    auto v = velocity_field(psi, free_particle(), {{0.0, 0}});
    EXPECT_TRUE(std::isfinite(v[0][0]));
}

TEST(SampleEquilibrium, narrow_packet) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(1.0, 0.2, 0));
    RngStream rng(1, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 5000, rng);
    for (const Point &q : e.positions) ASSERT_LT(std::abs(q[0] - 1.0), 5 * 0.2);
}

TEST(SampleEquilibrium, symmetric_halves) {
    GridWavefunction psi = init_wavefunction(line(), TwoGaussianProfile{gaussian(-4, 1, 0), gaussian(4, 1, 0)});
    RngStream rng(2, 0);
    const std::size_t n = 20000;
    BohmianEnsemble e = sample_equilibrium(psi, n, rng);
    double below = 0;
    for (const Point &q : e.positions) below += q[0] < 0;
    EXPECT_NEAR(below / n, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(SampleEquilibrium, kolmogorov_smirnov_against_normal) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    RngStream rng(3, 0);
    const std::size_t n = 10000;
    BohmianEnsemble e = sample_equilibrium(psi, n, rng);
    std::vector<double> xs;
    for (const Point &q : e.positions) xs.push_back(q[0]);
    std::sort(xs.begin(), xs.end());
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = standard_normal_cdf(xs[i]);
        d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
    }
    EXPECT_LT(d, 1.63 / std::sqrt(double(n)));
}

TEST(SampleEquilibrium, deterministic) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    RngStream a(9, 1), b(9, 1);
    EXPECT_EQ(sample_equilibrium(psi, 100, a).positions, sample_equilibrium(psi, 100, b).positions);
}

TEST(IntegrateTrajectories, harmonic_ground_state_is_stationary) {
    GridSpec g = line(-12, 12, 256);
    GridWavefunction psi = init_wavefunction(g, gaussian(0, 1 / std::sqrt(2.0), 0));
    RngStream rng(4, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 200, rng);
    const int steps = 5000;
    IntegrationResult r = integrate_trajectories(psi, harmonic(), e, {2 * M_PI / steps, steps, 1000});
    double drift = 0;
    for (std::size_t i = 0; i < e.size(); ++i) drift = std::max(drift, std::abs(r.ensemble.positions[i][0] - e.positions[i][0]));
    EXPECT_LT(drift, 1e-6);
}

TEST(IntegrateTrajectories, free_packet_scaling_law) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    BohmianEnsemble e;
    e.dims = 1;
    for (double q0 : {-3.0, -1.7, -0.4, 0.25, 1.0, 2.2, 3.5}) e.positions.push_back({q0, 0});
    const double t_end = 2 * std::sqrt(3.0);  // sigma(t) = 2 sigma0
    const std::size_t steps = 3500;
    IntegrationResult r = integrate_trajectories(psi, free_particle(), e, {t_end / steps, steps, 500});
    double worst = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        double want = e.positions[i][0] * free_sigma(1, 1, t_end);
        worst = std::max(worst, std::abs(r.ensemble.positions[i][0] - want) / std::abs(want));
    }
    EXPECT_LT(worst, 1e-3);
    EXPECT_NEAR(r.final_state.time, t_end, 1e-9);
    EXPECT_LT(r.max_norm_drift, 1e-8);
}

TEST(IntegrateTrajectories, absorbed_trajectories_are_flagged) {
    GridSpec g = line(-10, 10, 256);
    GridWavefunction psi = init_wavefunction(g, gaussian(0, 1, 8));
    BohmianEnsemble e;
    e.dims = 1;
    e.positions = {{0.0, 0}, {-1.0, 0}};
    IntegrationResult r = integrate_trajectories(psi, free_particle(), e, {0.001, 1500, 100});
    EXPECT_EQ(r.ensemble.absorbed_count(), 2u);
    for (long a : r.ensemble.absorbed_at) EXPECT_GT(a, 0);
}

TEST(IntegrateTrajectories, worker_count_does_not_change_results) {
    GridWavefunction psi = init_wavefunction(line(), TwoGaussianProfile{gaussian(-3, 1, 0), gaussian(3, 1, 0)});
    RngStream rng(5, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 300, rng);
    IntegrationOptions opt{0.001, 300, 50};
    IntegrationResult one = integrate_trajectories(psi, free_particle(), e, opt);
    opt.workers = 4;
    IntegrationResult four = integrate_trajectories(psi, free_particle(), e, opt);
    EXPECT_EQ(one.ensemble.history, four.ensemble.history);
}

TEST(IntegrateTrajectories, double_slit_non_crossing) {
    GridWavefunction psi = init_wavefunction(line(), TwoGaussianProfile{gaussian(-3, 0.7, 0), gaussian(3, 0.7, 0)});
    RngStream rng(6, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 200, rng);
    IntegrationResult r = integrate_trajectories(psi, free_particle(), e, {0.001, 3000, 100});
    EXPECT_EQ(check_noncrossing(r.ensemble), 0u);
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e.positions[i][0] > 0) EXPECT_GT(r.ensemble.positions[i][0], 0);
        if (e.positions[i][0] < 0) EXPECT_LT(r.ensemble.positions[i][0], 0);
    }
}

TEST(CheckEquivariance, initial_ensemble_passes) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    RngStream rng(7, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 10000, rng);
    EquivarianceReport r = check_equivariance(e, psi);
    EXPECT_EQ(r.verdict, Verdict::pass);
    EXPECT_NEAR(r.threshold, 0.0163, 1e-12);
}

TEST(CheckEquivariance, shifted_ensemble_fails) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    RngStream rng(8, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 10000, rng);
    for (auto &q : e.history.back()) q[0] += 3;
    EXPECT_EQ(check_equivariance(e, psi).verdict, Verdict::fail);
}

TEST(CheckEquivariance, too_many_absorbed_is_invalid) {
    GridWavefunction psi = init_wavefunction(line(), gaussian(0, 1, 0));
    RngStream rng(9, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 1000, rng);
    for (int i = 0; i < 20; ++i) e.absorbed_at[i] = 0;
    EXPECT_EQ(check_equivariance(e, psi).verdict, Verdict::invalid);
}

TEST(CheckEquivariance, two_axis_marginals) {
    GridSpec g({{-10, 10, 128}, {-10, 10, 128}});
    GridWavefunction psi = init_wavefunction(g, GaussianProfile{{1, -1}, {1, 1.5}, {0, 0}});
    RngStream rng(10, 0);
    BohmianEnsemble e = sample_equilibrium(psi, 5000, rng);
    EXPECT_EQ(check_equivariance(e, psi).verdict, Verdict::pass);
    for (auto &q : e.history.back()) q[1] += 2;
    EXPECT_EQ(check_equivariance(e, psi).verdict, Verdict::fail);
}

TEST(CheckNoncrossing, swap_is_one_violation) {
    BohmianEnsemble e;
    e.dims = 1;
    e.positions = {{1, 0}, {2, 0}};
    e.times = {0, 1};
    e.history = {{{0, 0}, {1, 0}}, {{1, 0}, {0.5, 0}}};
    e.absorbed_at = {-1, -1};
    EXPECT_EQ(check_noncrossing(e), 1u);
}

TEST(CheckNoncrossing, single_trajectory) {
    BohmianEnsemble e;
    e.dims = 1;
    e.positions = {{0, 0}};
    e.times = {0, 1, 2};
    e.history = {{{0, 0}}, {{1, 0}}, {{-1, 0}}};
    e.absorbed_at = {-1};
    EXPECT_EQ(check_noncrossing(e), 0u);
}

TEST(CheckNoncrossing, counts_every_swapped_pair) {
    BohmianEnsemble e;
    e.dims = 1;
    e.times = {0, 1};
    e.history = {{{0, 0}, {1, 0}, {2, 0}, {3, 0}}, {{3, 0}, {2, 0}, {1, 0}, {0, 0}}};
    e.positions = e.history.back();
    e.absorbed_at.assign(4, -1);
    EXPECT_EQ(check_noncrossing(e), 6u);
    e.dims = 2;
    EXPECT_THROW(check_noncrossing(e), std::invalid_argument);
}

namespace {

GridWavefunction two_axis(const GridSpec &g, const std::function<Complex(double, double)> &f) {
    std::vector<Complex> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Point q = g.node(i);
        v[i] = f(q[0], q[1]);
    }
    return GridWavefunction::normalized(g, v);
}

double fidelity(const GridWavefunction &a, const std::vector<Complex> &b) {
    Complex overlap = 0;
    double nb = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        overlap += std::conj(a.values[i]) * b[i];
        nb += std::norm(b[i]);
    }
    return std::norm(overlap) / (nb * std::pow(a.norm(), 2) / a.grid.cell_volume());
}

}  // namespace

TEST(ConditionalWavefunction, product_state) {
    GridSpec g({{-10, 10, 128}, {-10, 10, 128}});
    auto f = [](double x) { return std::exp(Complex(-(x - 1) * (x - 1) / 2, 0.8 * x)); };
    auto h = [](double y) { return std::exp(Complex(-y * y / 3, -0.3 * y)); };
    GridWavefunction psi = two_axis(g, [&](double x, double y) { return f(x) * h(y); });
    GridWavefunction c = conditional_wavefunction(psi, 1, 0.77);
    std::vector<Complex> want;
    for (std::size_t j = 0; j < 128; ++j) want.push_back(f(g.axis(0).node(j)));
    EXPECT_GT(fidelity(c, want), 1 - 1e-9);
}

TEST(ConditionalWavefunction, disjoint_branches_select_one) {
    GridSpec g({{-10, 10, 128}, {-10, 10, 128}});
    auto f1 = [](double x) { return std::exp(Complex(-(x + 3) * (x + 3) / 2, 0.5 * x)); };
    auto f2 = [](double x) { return std::exp(Complex(-(x - 2) * (x - 2), 0)); };
    auto g1 = [](double y) { return std::exp(-(y - 5) * (y - 5) * 2); };
    auto g2 = [](double y) { return std::exp(-(y + 5) * (y + 5) * 2); };
    GridWavefunction psi = two_axis(g, [&](double x, double y) { return f1(x) * g1(y) + f2(x) * g2(y); });
    GridWavefunction c = conditional_wavefunction(psi, 1, 4.9);
    std::vector<Complex> want;
    for (std::size_t j = 0; j < 128; ++j) want.push_back(f1(g.axis(0).node(j)));
    EXPECT_GT(fidelity(c, want), 1 - 1e-6);
}

TEST(ConditionalWavefunction, node_is_rejected) {
    GridSpec g({{-10, 10, 128}, {-10, 10, 128}});
    GridWavefunction psi = two_axis(g, [](double x, double y) { return y * std::exp(-(x * x + y * y) / 2); });
    EXPECT_THROW(conditional_wavefunction(psi, 1, 0.0), NodeConditioning);
    EXPECT_NO_THROW(conditional_wavefunction(psi, 0, 0.0));
}

TEST(Export, trajectory_csv_rows) {
    BohmianEnsemble e;
    e.dims = 1;
    e.positions = {{0.5, 0}, {-1, 0}};
    e.times = {0, 0.25};
    e.history = {{{0.5, 0}, {-1, 0}}, {{0.75, 0}, {-1, 0}}};
    e.absorbed_at = {-1, 1};
    std::ostringstream s;
    write_trajectories_csv(s, e);
    EXPECT_EQ(s.str(), "trajectory_id,time,q1\n0,0,0.5\n0,0.25,0.75\n1,0,-1\n");
}

TEST(Export, trajectory_csv_two_axes) {
    BohmianEnsemble e;
    e.dims = 2;
    e.positions = {{1, 2}};
    e.times = {0};
    e.history = {{{1, 2}}};
    e.absorbed_at = {-1};
    std::ostringstream s;
    write_trajectories_csv(s, e);
    EXPECT_EQ(s.str(), "trajectory_id,time,q1,q2\n0,0,1,2\n");
}

TEST(Export, snapshot_csv_has_one_row_per_node) {
    GridWavefunction psi = init_wavefunction(GridSpec({{-8, 8, 64}}), gaussian(0, 1, 0));
    std::ostringstream s;
    write_snapshot_csv(s, psi);
    std::istringstream in(s.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "q1,re,im");
    std::size_t rows = 0;
    double first = 0;
    while (std::getline(in, line)) {
        if (rows == 0) first = std::stod(line.substr(0, line.find(',')));
        ++rows;
    }
    EXPECT_EQ(rows, 64u);
    EXPECT_EQ(first, -8);
}

TEST(Export, snapshot_names_are_zero_padded) {
    EXPECT_EQ(snapshot_file_name(7, 2000), "snapshot_0007.csv");
    EXPECT_EQ(snapshot_file_name(2000, 2000), "snapshot_2000.csv");
    EXPECT_EQ(snapshot_file_name(0, 5), "snapshot_0.csv");
}
