#include "scenarios.h"

#include <boost/math/distributions/normal.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "parallel.h"
#include "plot.h"
#include "qfound/circuit.h"
#include "qfound/hilbert.h"
#include "qfound/pilotwave.h"

namespace qfound::cli {

using nlohmann::json;
using circuit::Angle;
using circuit::Arm;
using circuit::OpticalCircuit;
using circuit::Setting;
using inference::Event;
using inference::Mode;
using inference::TestReport;
using inference::Verdict;

namespace {

constexpr Setting kI = Setting::interference;
constexpr Setting kW = Setting::whichpath;

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Seed for an independent sub-run of the scenario.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return RngStream(seed, 0).derive(k)(); }

TestReport report(std::string test, double statistic, double threshold, Verdict v, std::size_t n, Mode mode,
                  json details = json::object()) {
    TestReport r{std::move(test), statistic, std::nullopt, threshold, v, n, mode};
    r.details = std::move(details);
    return r;
}

Verdict holds(bool ok) { return ok ? Verdict::satisfied : Verdict::violated; }

json reports_json(const std::string &scenario, std::uint64_t seed, const std::vector<TestReport> &reports) {
    json list = json::array();
    for (const auto &r : reports) list.push_back(r.to_json());
    return {{"scenario", scenario}, {"seed", seed}, {"reports", list}};
}

std::string reports_csv(const std::vector<TestReport> &reports) {
    std::string s = "test,statistic,threshold,verdict,n,mode\n";
    for (const auto &r : reports) {
        s += r.test + "," + number(r.statistic) + "," + number(r.threshold) + "," + inference::to_string(r.verdict) +
             "," + std::to_string(r.n) + "," + inference::to_string(r.mode) + "\n";
    }
    return s;
}

void add(RunOutput &out, const ScenarioConfig &c, const std::string &path, const std::string &format,
         std::string content) {
    if (c.wants(format)) out.files.push_back({path, format, std::move(content)});
}

// Eraser ------------------------------------------------------------------------

using Counts = std::map<circuit::DetectorOutcome, std::size_t>;

Counts count_outcomes(const inference::SampledRecords &records) {
    Counts counts;
    for (const auto &r : records) counts[r.outcome]++;
    return counts;
}

/// Largest |f - p| / sigma over the cells of the outcome grid.
double max_z(const OpticalCircuit &c, const circuit::Table &p, const Counts &counts, std::size_t n) {
    double worst = 0;
    for (int l : circuit::outcome_set(c, Arm::left)) {
        for (int r : circuit::outcome_set(c, Arm::right)) {
            const circuit::DetectorOutcome o{l, r};
            const double q = p.count(o) ? p.at(o) : 0.0;
            const double f = counts.count(o) ? double(counts.at(o)) / double(n) : 0.0;
            const double sd = std::sqrt(q * (1 - q) / double(n));
            const double z = sd > 0 ? std::abs(f - q) / sd : (f == q ? 0.0 : std::numeric_limits<double>::max());
            worst = std::max(worst, z);
        }
    }
    return worst;
}

json distribution_entries(const OpticalCircuit &c, const circuit::Table &p, const circuit::ExactTable *exact,
                          const Counts *counts, std::size_t n) {
    json list = json::array();
    for (int l : circuit::outcome_set(c, Arm::left)) {
        for (int r : circuit::outcome_set(c, Arm::right)) {
            const circuit::DetectorOutcome o{l, r};
            json e{{"left", o.left_name()}, {"right", o.right_name()}, {"probability", p.count(o) ? p.at(o) : 0.0}};
            if (exact) e["exact"] = exact->count(o) ? exact->at(o).to_string() : "0";
            if (counts) {
                const std::size_t k = counts->count(o) ? counts->at(o) : 0;
                e["count"] = k;
                e["frequency"] = double(k) / double(n);
            }
            list.push_back(e);
        }
    }
    return list;
}

circuit::Table to_table(const circuit::ExactTable &t) {
    circuit::Table out;
    for (const auto &[k, v] : t) out[k] = v.to_double();
    return out;
}

RunOutput run_eraser(const ScenarioConfig &c) {
    RunOutput out;
    const Setting left = circuit::parse_setting(c.text("left", "interference"));
    const Setting right = circuit::parse_setting(c.text("right", "interference"));
    const bool raf = c.flag("right_acts_first", false);
    const Angle theta = Angle::from_radians(c.number("theta", M_PI / 4));
    const OpticalCircuit circ = circuit::build_eraser(left, right, raf, theta);
    const std::string ctx = "eraser";
    const Event a{Arm::right, circuit::outcome_set(circ, Arm::right)[0]};
    const Event b{Arm::left, circuit::outcome_set(circ, Arm::left)[0]};
    const Setting other_r = right == kI ? kW : kI, other_l = left == kI ? kW : kI;
    const OpticalCircuit flip_r = circuit::build_eraser(left, other_r, raf, theta);
    const OpticalCircuit flip_l = circuit::build_eraser(other_l, right, raf, theta);

    json dist{{"scenario", "eraser"},
              {"mode", c.analytic() ? "analytic" : "montecarlo"},
              {"settings", {{"left", circuit::to_string(left)}, {"right", circuit::to_string(right)}}},
              {"right_acts_first", raf},
              {"theta", theta.radians}};
    std::vector<TestReport> reports;
    circuit::Table table;
    if (c.analytic()) {
        if (circ.exact()) {
            const auto exact = circuit::copenhagen_joint_distribution_exact(circ);
            table = to_table(exact);
            dist["probabilities"] = distribution_entries(circ, table, &exact, nullptr, 0);
            const auto e = circuit::enumerate_transport(circ);
            const auto bohm = e.outcome_distribution();
            const auto bohm_table = to_table(bohm);
            dist["bohmian"] = distribution_entries(circ, bohm_table, &bohm, nullptr, 0);
            dist["bohmian_equivariant"] = e.equivariant();
            const auto recs = inference::exact_records(circ, ctx);
            reports.push_back(inference::local_causality_test(recs, a, b));
            auto with_r = recs, with_l = recs;
            for (auto &r : inference::exact_records(flip_r, ctx)) with_r.push_back(r);
            for (auto &r : inference::exact_records(flip_l, ctx)) with_l.push_back(r);
            reports.push_back(inference::no_signaling_test(with_r, Arm::left));
            reports.push_back(inference::no_signaling_test(with_l, Arm::right));
        } else {
            table = circuit::copenhagen_joint_distribution(circ);
            dist["probabilities"] = distribution_entries(circ, table, nullptr, nullptr, 0);
            const auto recs = inference::branch_records(circ, ctx);
            reports.push_back(inference::local_causality_test(recs, a, b));
            auto with_r = recs, with_l = recs;
            for (auto &r : inference::branch_records(flip_r, ctx)) with_r.push_back(r);
            for (auto &r : inference::branch_records(flip_l, ctx)) with_l.push_back(r);
            reports.push_back(inference::no_signaling_test(with_r, Arm::left));
            reports.push_back(inference::no_signaling_test(with_l, Arm::right));
        }
    } else {
        const std::size_t n = c.count("trials", 100000);
        table = circuit::copenhagen_joint_distribution(circ);
        const auto cop = inference::copenhagen_records(circ, n, c.seed(), ctx, c.workers());
        const auto bohm = inference::bohmian_records(circ, n, sub_seed(c.seed(), 1), ctx, c.workers());
        const Counts cc = count_outcomes(cop), bc = count_outcomes(bohm);
        dist["trials"] = n;
        dist["probabilities"] = distribution_entries(circ, table, nullptr, &cc, n);
        dist["bohmian"] = distribution_entries(circ, table, nullptr, &bc, n);
        dist["max_z"] = {{"copenhagen", max_z(circ, table, cc, n)}, {"bohmian", max_z(circ, table, bc, n)}};
        reports.push_back(inference::local_causality_test(cop, a, b));
        auto with_r = cop, with_l = cop;
        for (auto &r : inference::copenhagen_records(flip_r, n, sub_seed(c.seed(), 2), ctx, c.workers()))
            with_r.push_back(r);
        for (auto &r : inference::copenhagen_records(flip_l, n, sub_seed(c.seed(), 3), ctx, c.workers()))
            with_l.push_back(r);
        reports.push_back(inference::no_signaling_test(with_r, Arm::left));
        reports.push_back(inference::no_signaling_test(with_l, Arm::right));
    }
    add(out, c, "joint_distribution.json", "json", json_text(dist));
    std::string csv = "left,right,probability\n";
    for (const auto &e : dist["probabilities"]) {
        csv += e["left"].get<std::string>() + "," + e["right"].get<std::string>() + "," +
               number(e["probability"].get<double>()) + "\n";
    }
    add(out, c, "joint_distribution.csv", "csv", csv);
    add(out, c, "reports.json", "json", json_text(reports_json("eraser", c.seed(), reports)));
    add(out, c, "reports.csv", "csv", reports_csv(reports));

    // Path records of sampled hidden configurations, and the paired figure.
    const std::size_t nrec = c.count("records", 16);
    std::vector<circuit::PathConfiguration> configs;
    for (std::size_t i = 0; i < nrec; ++i) {
        RngStream rng(sub_seed(c.seed(), 4), i);
        configs.push_back(circuit::sample_configuration(rng));
    }
    const circuit::BohmianTransport transport(circ);
    json records = json::array();
    for (const auto &cfg : configs) records.push_back(circuit::record_json(circ, cfg, transport(cfg)));
    add(out, c, "path_records.json", "json", json_text(records));
    const auto dep = circuit::trajectory_setting_dependence(configs, raf, theta, nrec);
    std::vector<circuit::RecordPair> pairs = dep.examples;
    add(out, c, "records.svg", "svg", circuit::records_svg(pairs, raf));
    return out;
}

// Pilot wave -------------------------------------------------------------------

struct PilotRun {
    pilotwave::GridWavefunction psi0;
    pilotwave::BohmianEnsemble initial;
    pilotwave::IntegrationResult result;
};

PilotRun pilot_run(const pilotwave::GridWavefunction &psi0, const pilotwave::PhysicsParams &params, std::size_t n,
                   std::uint64_t seed, double dt, std::size_t steps, std::size_t save_every, unsigned workers,
                   bool snapshots) {
    RngStream rng(seed, 0);
    pilotwave::BohmianEnsemble e = pilotwave::sample_equilibrium(psi0, n, rng);
    pilotwave::IntegrationOptions opt{dt, steps, save_every};
    opt.workers = workers;
    opt.keep_snapshots = snapshots;
    auto r = pilotwave::integrate_trajectories(psi0, params, e, opt);
    return {psi0, std::move(e), std::move(r)};
}

pilotwave::BohmianEnsemble first_trajectories(const pilotwave::BohmianEnsemble &e, std::size_t k) {
    k = std::min(k, e.size());
    pilotwave::BohmianEnsemble s;
    s.dims = e.dims;
    s.positions.assign(e.positions.begin(), e.positions.begin() + static_cast<long>(k));
    s.times = e.times;
    for (const auto &h : e.history) s.history.emplace_back(h.begin(), h.begin() + static_cast<long>(k));
    s.absorbed_at.assign(e.absorbed_at.begin(), e.absorbed_at.begin() + static_cast<long>(k));
    return s;
}

std::string trajectory_csv(const pilotwave::BohmianEnsemble &e) {
    std::ostringstream s;
    pilotwave::write_trajectories_csv(s, e);
    return s.str();
}

std::string trajectory_svg(const std::string &csv) {
    std::istringstream in(csv);
    return trajectories_svg(read_trajectory_csv(in, "trajectories.csv"));
}

json equivariance_json(const pilotwave::EquivarianceReport &r) {
    const char *v = r.verdict == pilotwave::Verdict::pass ? "pass" : r.verdict == pilotwave::Verdict::fail ? "fail"
                                                                                                           : "invalid";
    return {{"ks", r.ks}, {"threshold", r.threshold}, {"verdict", v}, {"samples", r.samples}, {"absorbed", r.absorbed}};
}

double free_sigma(double sigma0, double m, double t) {
    const double s = t / (2 * m * sigma0 * sigma0);
    return sigma0 * std::sqrt(1 + s * s);
}

/// Largest relative deviation from Q(t) = c + p t / m + (Q0 - c) sigma(t) / sigma0
/// over trajectories starting at least 0.1 sigma0 from the centre.
std::pair<double, std::size_t> scaling_error(const pilotwave::BohmianEnsemble &initial,
                                             const pilotwave::BohmianEnsemble &final_, double c, double sigma0,
                                             double p, double m, double t) {
    double worst = 0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < initial.size(); ++i) {
        const double d0 = initial.positions[i][0] - c;
        if (std::abs(d0) < 0.1 * sigma0 || final_.absorbed_at[i] >= 0) continue;
        const double want = c + p * t / m + d0 * free_sigma(sigma0, m, t) / sigma0;
        worst = std::max(worst, std::abs(final_.positions[i][0] - want) / std::abs(want - c - p * t / m));
        ++checked;
    }
    return {worst, checked};
}

struct PilotSetup {
    pilotwave::GridSpec grid;
    double mass;
};

PilotSetup pilot_setup(const ScenarioConfig &c, double lo, double hi, std::size_t points) {
    return {pilotwave::GridSpec({{c.number("grid_min", lo), c.number("grid_max", hi), c.count("grid_points", points)}}),
            c.number("mass", 1)};
}

json grid_json(const pilotwave::GridSpec &g) {
    return {{"min", g.axis(0).min}, {"max", g.axis(0).max}, {"points", g.axis(0).points}};
}

void add_pilot_files(RunOutput &out, const ScenarioConfig &c, const PilotRun &run, std::size_t export_count,
                     const json &report) {
    const std::string csv = trajectory_csv(first_trajectories(run.result.ensemble, export_count));
    add(out, c, "trajectories.csv", "csv", csv);
    add(out, c, "report.json", "json", json_text(report));
    add(out, c, "trajectories.svg", "svg", trajectory_svg(csv));
    if (c.flag("snapshots", false) && c.wants("csv")) {
        const std::size_t last = run.result.snapshot_steps.empty() ? 0 : run.result.snapshot_steps.back();
        for (std::size_t k = 0; k < run.result.snapshots.size(); ++k) {
            std::ostringstream s;
            pilotwave::write_snapshot_csv(s, run.result.snapshots[k]);
            out.files.push_back(
                {"snapshots/" + pilotwave::snapshot_file_name(run.result.snapshot_steps[k], last), "csv", s.str()});
        }
    }
}

json pilot_report_base(const std::string &scenario, const PilotSetup &s, double dt, std::size_t steps,
                       const PilotRun &run) {
    const auto &e = run.result.ensemble;
    return {{"scenario", scenario},
            {"grid", grid_json(s.grid)},
            {"mass", s.mass},
            {"dt", dt},
            {"steps", steps},
            {"t_final", run.result.final_state.time},
            {"trajectories", e.size()},
            {"saved_times", e.times.size()},
            {"absorbed", e.absorbed_count()},
            {"max_norm_drift", run.result.max_norm_drift},
            {"equivariance", equivariance_json(pilotwave::check_equivariance(e, run.result.final_state))},
            {"noncrossing_violations", pilotwave::check_noncrossing(e)}};
}

RunOutput run_free_packet(const ScenarioConfig &c) {
    RunOutput out;
    const PilotSetup s = pilot_setup(c, -20, 20, 512);
    const double width = c.number("width", 1), centre = c.number("center", 0), p = c.number("momentum", 0);
    const std::size_t steps = c.count("steps", 3500);
    const double dt = c.number("dt", 2 * std::sqrt(3.0) / 3500);
    const pilotwave::PhysicsParams params{{s.mass}, pilotwave::FreePotential{}};
    const auto psi0 = pilotwave::init_wavefunction(s.grid, pilotwave::GaussianProfile{{centre}, {width}, {p}});
    const PilotRun run = pilot_run(psi0, params, c.count("trials", 10000), c.seed(), dt, steps,
                                   c.count("save_every", 50), c.workers(), c.flag("snapshots", false));
    json rep = pilot_report_base("free_packet", s, dt, steps, run);
    const double t = run.result.final_state.time;
    auto [err, checked] = scaling_error(run.initial, run.result.ensemble, centre, width, p, s.mass, t);
    rep["scaling"] = {{"max_relative_error", err},
                      {"trajectories_checked", checked},
                      {"sigma_ratio", free_sigma(width, s.mass, t) / width}};
    add_pilot_files(out, c, run, c.count("export_trajectories", 200), rep);
    return out;
}

RunOutput run_double_slit(const ScenarioConfig &c) {
    RunOutput out;
    const PilotSetup s = pilot_setup(c, -20, 20, 512);
    const double width = c.number("width", 0.7), sep = c.number("separation", 6), axis = c.number("center", 0);
    const double dt = c.number("dt", 0.001);
    const std::size_t steps = c.count("steps", 3000);
    const pilotwave::PhysicsParams params{{s.mass}, pilotwave::FreePotential{}};
    const pilotwave::GaussianProfile g1{{axis - sep / 2}, {width}, {0}}, g2{{axis + sep / 2}, {width}, {0}};
    const auto psi0 = pilotwave::init_wavefunction(s.grid, pilotwave::TwoGaussianProfile{g1, g2});
    const std::size_t n = c.count("trials", 200);
    const PilotRun run =
        pilot_run(psi0, params, n, c.seed(), dt, steps, c.count("save_every", 100), c.workers(), c.flag("snapshots", false));
    json rep = pilot_report_base("double_slit", s, dt, steps, run);
    std::size_t switched = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = run.initial.positions[i][0] - axis, b = run.result.ensemble.positions[i][0] - axis;
        switched += (a > 0) != (b > 0);
    }
    rep["symmetry_axis"] = axis;
    rep["side_switches"] = switched;
    add_pilot_files(out, c, run, c.count("export_trajectories", n), rep);
    return out;
}

RunOutput run_harmonic(const ScenarioConfig &c) {
    RunOutput out;
    const PilotSetup s = pilot_setup(c, -12, 12, 256);
    const double omega = c.number("omega", 1), centre = c.number("center", 2);
    const double coherent = 1 / std::sqrt(2 * s.mass * omega);
    const double width = c.number("width", coherent);
    const std::size_t steps = c.count("steps", 5000);
    const double dt = c.number("dt", 2 * M_PI / omega / 5000);
    const pilotwave::PhysicsParams params{{s.mass}, pilotwave::HarmonicPotential{{omega}, {0}}};
    const auto psi0 = pilotwave::init_wavefunction(s.grid, pilotwave::GaussianProfile{{centre}, {width}, {0}});
    const PilotRun run = pilot_run(psi0, params, c.count("trials", 1000), c.seed(), dt, steps,
                                   c.count("save_every", 250), c.workers(), c.flag("snapshots", false));
    json rep = pilot_report_base("harmonic", s, dt, steps, run);
    rep["omega"] = omega;
    if (width == coherent) {
        // A coherent state moves rigidly: Q(t) = Q0 + c (cos wt - 1).
        const double t = run.result.final_state.time, shift = centre * (std::cos(omega * t) - 1);
        double worst = 0;
        for (std::size_t i = 0; i < run.initial.size(); ++i) {
            if (run.result.ensemble.absorbed_at[i] >= 0) continue;
            worst = std::max(worst, std::abs(run.result.ensemble.positions[i][0] - run.initial.positions[i][0] - shift));
        }
        rep["rigid_shift_error"] = worst;
    } else {
        rep["rigid_shift_error"] = nullptr;
    }
    add_pilot_files(out, c, run, c.count("export_trajectories", 200), rep);
    return out;
}

// Repeatability, CHSH ------------------------------------------------------------

hilbert::StateVector plus_state() {
    hilbert::Space space({"1", "2"});
    return hilbert::StateVector::normalized(space, hilbert::Vector::Ones(2));
}

std::vector<TestReport> repeatability_reports(std::size_t n, std::uint64_t seed) {
    const auto psi = plus_state();
    const auto obs = hilbert::Observable::basis_measurement(psi.space());
    std::vector<TestReport> r{inference::repeatability_test(n, psi, obs, seed, true),
                              inference::repeatability_test(n, psi, obs, sub_seed(seed, 1), false)};
    r[0].test = "repeatability_with_collapse";
    r[1].test = "repeatability_without_collapse";
    return r;
}

RunOutput run_repeatability(const ScenarioConfig &c) {
    RunOutput out;
    const auto reports = repeatability_reports(c.count("trials", 10000), c.seed());
    add(out, c, "reports.json", "json", json_text(reports_json("repeatability", c.seed(), reports)));
    add(out, c, "reports.csv", "csv", reports_csv(reports));
    return out;
}

struct ChshSummary {
    inference::ChshOptimum opt;
    double local_max;
    json models;
};

ChshSummary chsh_summary(int divisions) {
    ChshSummary s{inference::optimize_chsh(divisions), -INFINITY, json::array()};
    for (const auto &m : inference::local_model_family()) {
        const double v = inference::local_model_max_chsh(m, divisions);
        s.local_max = std::max(s.local_max, v);
        s.models.push_back({{"name", m.name}, {"s_max", v}});
    }
    return s;
}

TestReport tsirelson_report(const inference::ChshOptimum &opt) {
    const double target = 2 * std::sqrt(2.0);
    TestReport r = report("chsh_tsirelson", std::abs(opt.s_max - target), 1e-9, Verdict::inconclusive,
                          opt.evaluations, Mode::analytic, {{"s_max", opt.s_max}, {"angles", opt.angles}});
    if (opt.s_exact) {
        const ExactReal d = abs(*opt.s_exact - ExactReal::sqrt2() * 2);
        r.statistic_exact = d.to_string();
        r.verdict = holds(d.sign() == 0);
        r.details["s_exact"] = opt.s_exact->to_string();
        r.details["pi8"] = *opt.pi8;
    } else {
        r.verdict = holds(r.statistic <= r.threshold);
    }
    return r;
}

TestReport quantum_bound_report(const inference::ChshOptimum &opt) {
    TestReport r = report("chsh_local_bound_quantum", opt.s_max, 2, holds(opt.s_max <= 2), opt.evaluations,
                          Mode::analytic);
    if (opt.s_exact) {
        r.statistic_exact = opt.s_exact->to_string();
        r.verdict = holds(*opt.s_exact <= ExactReal(2));
    }
    return r;
}

TestReport local_models_report(const ChshSummary &s) {
    return report("chsh_local_bound_models", s.local_max, 2, holds(s.local_max <= 2 + 1e-12), s.models.size(),
                  Mode::analytic, {{"models", s.models}, {"tolerance", 1e-12}});
}

RunOutput run_bell_chsh(const ScenarioConfig &c) {
    RunOutput out;
    const int divisions = static_cast<int>(c.count("divisions", 16));
    const ChshSummary s = chsh_summary(divisions);
    std::vector<TestReport> reports{tsirelson_report(s.opt), quantum_bound_report(s.opt), local_models_report(s)};
    if (!c.analytic()) {
        reports.push_back(inference::chsh_monte_carlo(s.opt.angles, c.count("trials", 100000), c.seed()));
    }
    json doc{{"s_max", s.opt.s_max},
             {"angles", s.opt.angles},
             {"evaluations", s.opt.evaluations},
             {"tsirelson", 2 * std::sqrt(2.0)},
             {"local_models", s.models}};
    if (s.opt.s_exact) doc["s_exact"] = s.opt.s_exact->to_string();
    add(out, c, "chsh.json", "json", json_text(doc));
    add(out, c, "reports.json", "json", json_text(reports_json("bell_chsh", c.seed(), reports)));
    add(out, c, "reports.csv", "csv", reports_csv(reports));
    std::string grid = "theta,phi,correlator\n";
    for (int i = 0; i <= divisions; ++i) {
        for (int j = 0; j <= divisions; ++j) {
            const double t = M_PI / 2 * i / divisions, p = M_PI / 2 * j / divisions;
            grid += number(t) + "," + number(p) + "," + number(inference::correlator(t, p)) + "\n";
        }
    }
    add(out, c, "chsh_grid.csv", "csv", grid);
    return out;
}

// Claims suite --------------------------------------------------------------------

void push(std::vector<Claim> &claims, std::string id, int criterion, Verdict expected, TestReport r) {
    claims.push_back({std::move(id), criterion, expected, std::move(r)});
}

TestReport exact_distribution_report(const OpticalCircuit &c, const std::map<circuit::DetectorOutcome, ExactReal> &target) {
    const auto got = circuit::copenhagen_joint_distribution_exact(c);
    ExactReal worst(0);
    for (int l : circuit::outcome_set(c, Arm::left)) {
        for (int r : circuit::outcome_set(c, Arm::right)) {
            const circuit::DetectorOutcome o{l, r};
            const ExactReal p = got.count(o) ? got.at(o) : ExactReal(0);
            const ExactReal q = target.count(o) ? target.at(o) : ExactReal(0);
            worst = std::max(worst, abs(p - q));
        }
    }
    TestReport rep = report("joint_distribution_exact", worst.to_double(), 0, holds(worst.sign() == 0), 1,
                            Mode::analytic, {{"probabilities", distribution_entries(c, to_table(got), &got, nullptr, 0)}});
    rep.statistic_exact = worst.to_string();
    return rep;
}

TestReport sampled_distribution_report(const std::string &test, const OpticalCircuit &c,
                                       const inference::SampledRecords &recs) {
    const auto table = circuit::copenhagen_joint_distribution(c);
    const Counts counts = count_outcomes(recs);
    const double z = max_z(c, table, counts, recs.size());
    return report(test, z, 3, holds(z <= 3), recs.size(), Mode::montecarlo,
                  {{"probabilities", distribution_entries(c, table, nullptr, &counts, recs.size())}});
}

void criterion_eraser_correlations(std::vector<Claim> &cl, const SuiteOptions &o) {
    const auto ii = circuit::build_eraser(kI, kI), iw = circuit::build_eraser(kI, kW);
    const ExactReal half = ExactReal(Rational(1, 2)), quarter = ExactReal(Rational(1, 4));
    push(cl, "eraser_interference_interference_exact", 1, Verdict::satisfied,
         exact_distribution_report(ii, {{{1, 1}, half}, {{2, 2}, half}}));
    push(cl, "eraser_interference_whichpath_exact", 1, Verdict::satisfied,
         exact_distribution_report(iw, {{{1, 3}, quarter}, {{1, 4}, quarter}, {{2, 3}, quarter}, {{2, 4}, quarter}}));
    const std::size_t n = 100000;
    int k = 10;
    for (const auto &[name, circ] : {std::pair{"interference_interference", ii}, std::pair{"interference_whichpath", iw}}) {
        push(cl, std::string("eraser_") + name + "_copenhagen_sampled", 1, Verdict::satisfied,
             sampled_distribution_report("joint_distribution_sampled", circ,
                                         inference::copenhagen_records(circ, n, sub_seed(o.seed, k++), "eraser", o.workers)));
        push(cl, std::string("eraser_") + name + "_bohmian_sampled", 1, Verdict::satisfied,
             sampled_distribution_report("joint_distribution_sampled", circ,
                                         inference::bohmian_records(circ, n, sub_seed(o.seed, k++), "eraser", o.workers)));
    }
}

void criterion_local_causality(std::vector<Claim> &cl, const SuiteOptions &o) {
    const auto ii = circuit::build_eraser(kI, kI), iw = circuit::build_eraser(kI, kW), wi = circuit::build_eraser(kW, kI);
    const Event r1{Arm::right, 1}, l1{Arm::left, 1};
    const auto exact = inference::exact_records(ii, "eraser");
    push(cl, "local_causality_copenhagen_exact", 2, Verdict::violated, inference::local_causality_test(exact, r1, l1));
    push(cl, "local_causality_branching", 2, Verdict::violated,
         inference::local_causality_test(inference::branch_records(ii, "eraser"), r1, l1));
    push(cl, "local_causality_bohmian_exact", 2, Verdict::violated,
         inference::local_causality_test(inference::bohmian_exact_records(ii, "eraser"), r1, l1));
    auto with_r = exact, with_l = exact;
    for (auto &r : inference::exact_records(iw, "eraser")) with_r.push_back(r);
    for (auto &r : inference::exact_records(wi, "eraser")) with_l.push_back(r);
    push(cl, "no_signaling_left_exact", 2, Verdict::satisfied, inference::no_signaling_test(with_r, Arm::left));
    push(cl, "no_signaling_right_exact", 2, Verdict::satisfied, inference::no_signaling_test(with_l, Arm::right));
    const std::size_t n = 100000;
    const auto sampled = inference::copenhagen_records(ii, n, sub_seed(o.seed, 20), "eraser", o.workers);
    push(cl, "local_causality_copenhagen_sampled", 2, Verdict::violated,
         inference::local_causality_test(sampled, r1, l1));
    auto mixed = sampled;
    for (auto &r : inference::copenhagen_records(iw, n, sub_seed(o.seed, 21), "eraser", o.workers)) mixed.push_back(r);
    push(cl, "no_signaling_left_sampled", 2, Verdict::satisfied, inference::no_signaling_test(mixed, Arm::left));
}

void criterion_collapse(std::vector<Claim> &cl, const SuiteOptions &o) {
    const std::size_t n = 10000;
    auto r = repeatability_reports(n, sub_seed(o.seed, 30));
    const double f = r[1].statistic, sd = std::sqrt(0.25 / double(n));
    TestReport half = report("repeatability_without_collapse_half", std::abs(f - 0.5) / sd, 3,
                             holds(std::abs(f - 0.5) <= 3 * sd), n, Mode::montecarlo,
                             {{"fraction", f}, {"expected", 0.5}, {"sigma", sd}});
    push(cl, "repeatability_with_collapse", 3, Verdict::satisfied, r[0]);
    push(cl, "repeatability_without_collapse", 3, Verdict::violated, r[1]);
    push(cl, "repeatability_without_collapse_half", 3, Verdict::satisfied, half);
}

void criterion_branching(std::vector<Claim> &cl, const SuiteOptions &o) {
    const std::size_t cases = 50, n = 100000;
    const auto family = inference::random_measurement_family(cases, 8, sub_seed(o.seed, 40));
    double weight_diff = 0, z = 0;
    std::vector<TestReport> per(cases, report("", 0, 0, Verdict::inconclusive, 0, Mode::montecarlo));
    detail::parallel_for(cases, o.workers, [&](std::size_t i) {
        per[i] = inference::branch_equivalence_test(family[i].state, family[i].observable, n, sub_seed(o.seed, 1000 + i));
    });
    json dims = json::array(), zs = json::array();
    std::size_t comparisons = 0, beyond = 0;
    for (std::size_t i = 0; i < cases; ++i) {
        weight_diff = std::max(weight_diff, per[i].details["max_weight_minus_born"].get<double>());
        z = std::max(z, per[i].statistic);
        dims.push_back(family[i].state.dim());
        zs.push_back(per[i].statistic);
        for (const auto &p : hilbert::born_distribution(family[i].state, family[i].observable)) {
            comparisons += p.probability > 0 && p.probability < 1;
        }
        beyond += per[i].statistic > 3;
    }
    // Global 3 sigma: the family-wise two-sided level of one 3 sigma test,
    // split over all comparisons (Sidak).
    const boost::math::normal gauss;
    const double alpha = 2 * boost::math::cdf(boost::math::complement(gauss, 3.0));
    const double each = 1 - std::pow(1 - alpha, 1.0 / double(std::max<std::size_t>(comparisons, 1)));
    const double z_crit = boost::math::quantile(boost::math::complement(gauss, each / 2));
    push(cl, "branch_weights_equal_born", 4, Verdict::satisfied,
         report("branch_weights_equal_born", weight_diff, inference::kBranchTolerance,
                holds(weight_diff <= inference::kBranchTolerance), cases, Mode::analytic, {{"dimensions", dims}}));
    push(cl, "collapse_frequencies_match_branch_weights", 4, Verdict::satisfied,
         report("collapse_frequencies_match_branch_weights", z, z_crit, holds(z <= z_crit), cases * n, Mode::montecarlo,
                {{"cases", cases},
                 {"trials_per_case", n},
                 {"comparisons", comparisons},
                 {"family_alpha", alpha},
                 {"cases_beyond_3sigma", beyond},
                 {"expected_comparisons_beyond_3sigma", alpha * double(comparisons)},
                 {"max_z_per_case", zs}}));
}

void criterion_measurement_independence(std::vector<Claim> &cl, SuiteResult &res, const SuiteOptions &o) {
    std::vector<inference::SettingEnumeration> groups;
    for (Setting r : {kI, kW}) {
        groups.push_back({{kI, r}, circuit::enumerate_transport(circuit::build_eraser(kI, r, true))});
    }
    push(cl, "measurement_independence_pre_detection", 5, Verdict::violated,
         inference::measurement_independence_test(groups, inference::HiddenStage::pre_detection));
    push(cl, "measurement_independence_initial", 5, Verdict::satisfied,
         inference::measurement_independence_test(groups, inference::HiddenStage::initial));
    const std::size_t n = 20000;
    inference::SampledRecords recs;
    for (Setting r : {kI, kW}) {
        for (auto &x : inference::bohmian_records(circuit::build_eraser(kI, r, true), n, sub_seed(o.seed, 50),
                                                  "eraser", o.workers)) {
            recs.push_back(std::move(x));
        }
    }
    push(cl, "measurement_independence_pre_detection_sampled", 5, Verdict::violated,
         inference::measurement_independence_test(recs, inference::HiddenStage::pre_detection));

    std::vector<circuit::PathConfiguration> configs;
    for (std::size_t i = 0; i < 10000; ++i) {
        RngStream rng(sub_seed(o.seed, 51), i);
        configs.push_back(circuit::sample_configuration(rng));
    }
    const auto dep = circuit::trajectory_setting_dependence(configs, true, Angle::pi8_multiple(2), 4);
    const bool changed = dep.exact_changed_measure ? dep.exact_changed_measure->sign() > 0 : dep.changed > 0;
    TestReport r = report("trajectory_setting_independence", dep.changed_fraction, 0,
                          holds(!(changed && !dep.examples.empty())), dep.samples, Mode::montecarlo,
                          {{"changed", dep.changed}, {"examples", dep.examples.size()}});
    if (dep.exact_changed_measure) r.details["exact_changed_measure"] = dep.exact_changed_measure->to_string();
    push(cl, "trajectory_setting_independence", 5, Verdict::violated, r);

    const auto ci = circuit::build_eraser(kI, kI, true), cw = circuit::build_eraser(kI, kW, true);
    json examples = json::array();
    for (const auto &p : dep.examples) {
        examples.push_back({{"interference", circuit::record_json(ci, p.initial, p.interference)},
                            {"whichpath", circuit::record_json(cw, p.initial, p.whichpath)}});
    }
    res.setting_dependence = {{"samples", dep.samples},
                              {"changed", dep.changed},
                              {"changed_fraction", dep.changed_fraction},
                              {"examples", examples}};
    if (dep.exact_changed_measure) res.setting_dependence["exact_changed_measure"] = dep.exact_changed_measure->to_string();
    res.example_pairs = dep.examples;
}

bool same_distribution(const OpticalCircuit &c, const circuit::ExactTable &a, const circuit::ExactTable &b) {
    for (int l : circuit::outcome_set(c, Arm::left)) {
        for (int r : circuit::outcome_set(c, Arm::right)) {
            const circuit::DetectorOutcome o{l, r};
            if ((a.count(o) ? a.at(o) : ExactReal(0)) != (b.count(o) ? b.at(o) : ExactReal(0))) return false;
        }
    }
    return true;
}

void criterion_equivariance(std::vector<Claim> &cl) {
    std::size_t bad = 0, layers = 0;
    json circuits = json::array();
    for (Setting l : {kI, kW}) {
        for (Setting r : {kI, kW}) {
            for (bool raf : {false, true}) {
                const auto c = circuit::build_eraser(l, r, raf);
                const auto e = circuit::enumerate_transport(c);
                const bool same = same_distribution(c, e.outcome_distribution(), circuit::copenhagen_joint_distribution_exact(c));
                bad += !e.equivariant() + !e.monotone + !same;
                layers += e.layers.size();
                circuits.push_back({{"left", circuit::to_string(l)},
                                    {"right", circuit::to_string(r)},
                                    {"right_acts_first", raf},
                                    {"equivariant", e.equivariant()},
                                    {"monotone", e.monotone},
                                    {"outcomes_match", same}});
            }
        }
    }
    TestReport r = report("transport_equivariance", double(bad), 0, holds(bad == 0), circuits.size(), Mode::analytic,
                          {{"circuits", circuits}, {"layers_compared", layers}});
    r.statistic_exact = std::to_string(bad);
    push(cl, "transport_equivariance", 6, Verdict::satisfied, r);
}

void criterion_free_packet(std::vector<Claim> &cl, const SuiteOptions &o) {
    const pilotwave::GridSpec grid({{-20, 20, 512}});
    const pilotwave::PhysicsParams params{{1.0}, pilotwave::FreePotential{}};
    const auto psi0 = pilotwave::init_wavefunction(grid, pilotwave::GaussianProfile{{0}, {1}, {0}});
    const double t_end = 2 * std::sqrt(3.0);  // sigma(t) = 2 sigma0
    const std::size_t steps = 3500, n = 10000;
    const PilotRun run = pilot_run(psi0, params, n, sub_seed(o.seed, 70), t_end / steps, steps, 500, o.workers, false);
    auto [err, checked] = scaling_error(run.initial, run.result.ensemble, 0, 1, 0, 1, run.result.final_state.time);
    push(cl, "free_packet_scaling_law", 7, Verdict::satisfied,
         report("free_packet_scaling_law", err, 1e-3, holds(err < 1e-3), checked, Mode::montecarlo,
                {{"t", run.result.final_state.time}}));
    const auto eq = pilotwave::check_equivariance(run.result.ensemble, run.result.final_state);
    push(cl, "free_packet_equivariance", 7, Verdict::satisfied,
         report("free_packet_equivariance", eq.ks, 0.02, holds(eq.ks < 0.02 && eq.verdict == pilotwave::Verdict::pass), n,
                Mode::montecarlo, equivariance_json(eq)));
    const std::size_t cross = pilotwave::check_noncrossing(run.result.ensemble);
    push(cl, "free_packet_noncrossing", 7, Verdict::satisfied,
         report("free_packet_noncrossing", double(cross), 0, holds(cross == 0), n, Mode::montecarlo));
    push(cl, "free_packet_norm_drift", 7, Verdict::satisfied,
         report("free_packet_norm_drift", run.result.max_norm_drift, 1e-8, holds(run.result.max_norm_drift < 1e-8), steps,
                Mode::analytic));
}

void criterion_double_slit(std::vector<Claim> &cl, SuiteResult &res, const SuiteOptions &o) {
    const pilotwave::GridSpec grid({{-20, 20, 512}});
    const pilotwave::PhysicsParams params{{1.0}, pilotwave::FreePotential{}};
    const pilotwave::TwoGaussianProfile two{{{-3}, {0.7}, {0}}, {{3}, {0.7}, {0}}};
    const auto psi0 = pilotwave::init_wavefunction(grid, two);
    const std::size_t n = 200;
    const PilotRun run = pilot_run(psi0, params, n, sub_seed(o.seed, 80), 0.001, 3000, 100, o.workers, false);
    const std::size_t cross = pilotwave::check_noncrossing(run.result.ensemble);
    std::size_t switched = 0;
    for (std::size_t i = 0; i < n; ++i) {
        switched += (run.initial.positions[i][0] > 0) != (run.result.ensemble.positions[i][0] > 0);
    }
    push(cl, "double_slit_noncrossing", 8, Verdict::satisfied,
         report("double_slit_noncrossing", double(cross), 0, holds(cross == 0), n, Mode::montecarlo,
                {{"saved_times", run.result.ensemble.times.size()}}));
    push(cl, "double_slit_sides_preserved", 8, Verdict::satisfied,
         report("double_slit_sides_preserved", double(switched), 0, holds(switched == 0), n, Mode::montecarlo));
    res.double_slit_csv = trajectory_csv(run.result.ensemble);
}

void criterion_chsh(std::vector<Claim> &cl, const SuiteOptions &o) {
    const ChshSummary s = chsh_summary(16);
    push(cl, "chsh_tsirelson", 9, Verdict::satisfied, tsirelson_report(s.opt));
    push(cl, "chsh_local_bound_quantum", 9, Verdict::violated, quantum_bound_report(s.opt));
    push(cl, "chsh_local_bound_models", 9, Verdict::satisfied, local_models_report(s));
    push(cl, "chsh_sampled", 9, Verdict::violated, inference::chsh_monte_carlo(s.opt.angles, 100000, sub_seed(o.seed, 90)));
}

hilbert::Matrix random_hermitian(std::size_t d, RngStream &rng) {
    std::normal_distribution<double> gauss;
    const auto n = static_cast<Eigen::Index>(d);
    hilbert::Matrix g(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) g(r, c) = {gauss(rng), gauss(rng)};
    return (g + g.adjoint()) / 2.0;
}

void criterion_decoherence(std::vector<Claim> &cl, const SuiteOptions &o) {
    const hilbert::Space qubit({"1", "2"});
    const hilbert::Space pair = hilbert::Space::product(qubit, qubit);
    double worst = 0;
    const std::size_t trials = 20;
    for (std::size_t i = 0; i < trials; ++i) {
        RngStream rng(sub_seed(o.seed, 100), i);
        std::normal_distribution<double> gauss;
        hilbert::Vector a(4);
        for (int k = 0; k < 4; ++k) a(k) = {gauss(rng), gauss(rng)};
        const auto rho = hilbert::DensityMatrix::pure(hilbert::StateVector::normalized(pair, a));
        const auto u = hilbert::UnitaryMap::from_hamiltonian(random_hermitian(4, rng), 1.0);
        worst = std::max(worst, std::abs(hilbert::purity(hilbert::conjugate(rho, u)) - hilbert::purity(rho)));
    }
    push(cl, "global_purity_invariant", 10, Verdict::satisfied,
         report("global_purity_invariant", worst, 1e-12, holds(worst <= 1e-12), trials, Mode::analytic));

    const auto bell = hilbert::DensityMatrix::pure(circuit::initial_state());
    const double p = hilbert::purity(hilbert::partial_trace(bell, {0}));
    push(cl, "reduced_purity_entangled_state", 10, Verdict::satisfied,
         report("reduced_purity_entangled_state", std::abs(p - 0.5), 1e-12, holds(std::abs(p - 0.5) <= 1e-12), 1,
                Mode::analytic, {{"purity", p}}));

    const auto plus = plus_state();
    const auto product = hilbert::tensor(plus, hilbert::StateVector::basis(qubit, "1"));
    const auto rho0 = hilbert::DensityMatrix::pure(product);
    const auto rho1 = hilbert::conjugate(rho0, hilbert::UnitaryMap::controlled_not());
    const double before = hilbert::purity(hilbert::partial_trace(rho0, {0}));
    const double after = hilbert::purity(hilbert::partial_trace(rho1, {0}));
    push(cl, "reduced_purity_preserved_by_entangler", 10, Verdict::violated,
         report("reduced_purity_preserved_by_entangler", before - after, 0, holds(!(after < before)), 1, Mode::analytic,
                {{"before", before}, {"after", after}}));
}

RunOutput run_claims_suite(const ScenarioConfig &c) {
    RunOutput out;
    const SuiteResult res = claims_suite({c.seed(), c.workers()});
    json list = json::array();
    std::string csv = "id,criterion,test,statistic,threshold,expected,verdict,match\n";
    for (const auto &cl : res.claims) {
        list.push_back(cl.to_json());
        csv += cl.id + "," + std::to_string(cl.criterion) + "," + cl.report.test + "," + number(cl.report.statistic) +
               "," + number(cl.report.threshold) + "," + inference::to_string(cl.expected) + "," +
               inference::to_string(cl.report.verdict) + "," + (cl.matches() ? "true" : "false") + "\n";
        out.mismatches += !cl.matches();
    }
    add(out, c, "claims.json", "json",
        json_text({{"seed", c.seed()}, {"claims", list}, {"mismatches", out.mismatches}}));
    add(out, c, "claims.csv", "csv", csv);
    add(out, c, "setting_dependence.json", "json", json_text(res.setting_dependence));
    add(out, c, "setting_dependence.svg", "svg", circuit::records_svg(res.example_pairs, true));
    add(out, c, "double_slit.csv", "csv", res.double_slit_csv);
    add(out, c, "double_slit.svg", "svg", trajectory_svg(res.double_slit_csv));
    return out;
}

}  // namespace

json Claim::to_json() const {
    return {{"id", id},
            {"criterion", criterion},
            {"expected", inference::to_string(expected)},
            {"match", matches()},
            {"report", report.to_json()}};
}

SuiteResult claims_suite(const SuiteOptions &o) {
    SuiteResult res;
    auto timed = [&](int criterion, const std::function<void()> &fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        res.seconds[criterion] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    timed(1, [&] { criterion_eraser_correlations(res.claims, o); });
    timed(2, [&] { criterion_local_causality(res.claims, o); });
    timed(3, [&] { criterion_collapse(res.claims, o); });
    timed(4, [&] { criterion_branching(res.claims, o); });
    timed(5, [&] { criterion_measurement_independence(res.claims, res, o); });
    timed(6, [&] { criterion_equivariance(res.claims); });
    timed(7, [&] { criterion_free_packet(res.claims, o); });
    timed(8, [&] { criterion_double_slit(res.claims, res, o); });
    timed(9, [&] { criterion_chsh(res.claims, o); });
    timed(10, [&] { criterion_decoherence(res.claims, o); });
    return res;
}

RunOutput run_scenario(const ScenarioConfig &c) {
    const std::string &s = c.scenario();
    if (s == "eraser") return run_eraser(c);
    if (s == "free_packet") return run_free_packet(c);
    if (s == "double_slit") return run_double_slit(c);
    if (s == "harmonic") return run_harmonic(c);
    if (s == "repeatability") return run_repeatability(c);
    if (s == "bell_chsh") return run_bell_chsh(c);
    if (s == "claims_suite") return run_claims_suite(c);
    throw ConfigError("unknown scenario '" + s + "'");
}

}  // namespace qfound::cli
