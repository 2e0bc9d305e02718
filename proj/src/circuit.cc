#include "qfound/circuit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace qfound::circuit {

using Complex = std::complex<double>;

std::string to_string(Setting s) { return s == Setting::interference ? "interference" : "whichpath"; }
std::string to_string(Arm a) { return a == Arm::left ? "left" : "right"; }

Setting parse_setting(const std::string &s) {
    if (s == "interference") return Setting::interference;
    if (s == "whichpath") return Setting::whichpath;
    throw CircuitError("unknown setting '" + s + "' (expected interference or whichpath)");
}

Angle Angle::pi8_multiple(int k) { return {k * M_PI / 8, k}; }

Angle Angle::from_radians(double r) {
    const double k = std::round(r / (M_PI / 8));
    if (std::abs(r - k * M_PI / 8) <= 1e-12 && std::abs(k) < 1e6) return pi8_multiple(static_cast<int>(k));
    return {r, std::nullopt};
}

namespace {

int idx(Arm a) { return static_cast<int>(a); }
Arm other(Arm a) { return a == Arm::left ? Arm::right : Arm::left; }

int outcome_of(ElementKind k, int label) {
    if (k == ElementKind::erasure_detector) return label == 1 ? 1 : 2;
    return 3 + label;
}

bool is_detector(ElementKind k) { return k != ElementKind::beam_splitter; }

int mod16(int k) { return ((k % 16) + 16) % 16; }

template <class Amp>
Amp &at(JointAmplitudes<Amp> &psi, Arm a, int own, int oth) {
    return a == Arm::left ? psi[own][oth] : psi[oth][own];
}
template <class Amp>
const Amp &at(const JointAmplitudes<Amp> &psi, Arm a, int own, int oth) {
    return a == Arm::left ? psi[own][oth] : psi[oth][own];
}

struct ExactOps {
    using Amp = ExactReal;
    using Prob = ExactReal;
    static Prob prob(const Amp &a) { return a * a; }
    static std::array<Amp, 3> splitter(const Element &e) {
        if (!e.theta.exact() || !e.phase.exact() || mod16(*e.phase.pi8) % 8 != 0) {
            throw CircuitError("exact evaluation needs theta = k pi/8 and phase 0 or pi");
        }
        Amp ph = mod16(*e.phase.pi8) == 0 ? Amp(1) : Amp(-1);
        return {ExactReal::cos_pi8(*e.theta.pi8), ExactReal::sin_pi8(*e.theta.pi8), ph};
    }
};

struct FloatOps {
    using Amp = Complex;
    using Prob = double;
    static Prob prob(const Amp &a) { return std::norm(a); }
    static std::array<Amp, 3> splitter(const Element &e) {
        return {std::cos(e.theta.radians), std::sin(e.theta.radians), std::polar(1.0, e.phase.radians)};
    }
};

template <class Ops>
void apply_splitter(JointAmplitudes<typename Ops::Amp> &psi, const Element &e) {
    const auto [c, s, ph] = Ops::splitter(e);
    for (int o = 0; o < 2; ++o) {
        auto a1 = at(psi, e.arm, 0, o), a2 = at(psi, e.arm, 1, o);
        at(psi, e.arm, 0, o) = c * a1 + ph * s * a2;
        at(psi, e.arm, 1, o) = s * a1 - ph * c * a2;
    }
}

/// Conditional label distribution of arm `a` given the other arm's label.
template <class Ops>
std::array<typename Ops::Prob, 2> conditional(const JointAmplitudes<typename Ops::Amp> &psi, Arm a, int oth) {
    std::array<typename Ops::Prob, 2> p{Ops::prob(at(psi, a, 0, oth)), Ops::prob(at(psi, a, 1, oth))};
    auto total = p[0] + p[1];
    if (total == typename Ops::Prob(0)) throw TransportError("conditioning on a label of zero probability");
    p[0] = p[0] / total;
    p[1] = p[1] / total;
    return p;
}

template <class Ops>
JointAmplitudes<typename Ops::Amp> initial_amplitudes() {
    using Amp = typename Ops::Amp;
    if constexpr (std::is_same_v<Amp, ExactReal>) {
        return initial_amplitudes_exact();
    } else {
        const double h = 1 / std::sqrt(2.0);
        return {{{Amp(h), Amp(0)}, {Amp(0), Amp(h)}}};
    }
}

/// Copenhagen branches with unnormalized (projected) amplitudes.
template <class Ops>
struct CBranch {
    std::array<std::optional<int>, 2> outcome;
    JointAmplitudes<typename Ops::Amp> amps;
};

template <class Ops>
void copenhagen_layer(std::vector<CBranch<Ops>> &branches, const Element &e) {
    if (e.kind == ElementKind::beam_splitter) {
        for (auto &b : branches) apply_splitter<Ops>(b.amps, e);
        return;
    }
    std::vector<CBranch<Ops>> next;
    for (const auto &b : branches) {
        for (int label = 0; label < 2; ++label) {
            CBranch<Ops> nb = b;
            typename Ops::Prob w(0);
            for (int own = 0; own < 2; ++own) {
                for (int o = 0; o < 2; ++o) {
                    if (own != label) at(nb.amps, e.arm, own, o) = typename Ops::Amp(0);
                    w += Ops::prob(at(nb.amps, e.arm, own, o));
                }
            }
            if (w == typename Ops::Prob(0)) continue;
            nb.outcome[idx(e.arm)] = outcome_of(e.kind, label);
            next.push_back(std::move(nb));
        }
    }
    branches = std::move(next);
}

std::array<int, 2> order_for(const OpticalCircuit &c, Arm a, bool after_splitter) {
    const ArmGeometry &g = c.geometry[idx(a)];
    return after_splitter ? g.port_order : g.path_order;
}

hilbert::Space path_space() { return hilbert::Space({"1", "2"}); }

hilbert::Observable detector_observable(const Element &e) {
    using hilbert::Matrix;
    std::vector<hilbert::Eigenspace> spectrum;
    const std::string side = e.arm == Arm::left ? "L" : "R";
    for (int label = 0; label < 2; ++label) {
        Matrix p = Matrix::Zero(2, 2);
        p(label, label) = 1.0;
        int o = outcome_of(e.kind, label);
        spectrum.push_back({static_cast<double>(o), side + std::to_string(o), std::move(p)});
    }
    return hilbert::Observable::from_spectrum(path_space(), std::move(spectrum));
}

hilbert::UnitaryMap splitter_unitary(const Element &e) {
    return hilbert::UnitaryMap::beam_splitter(e.theta.radians, e.phase.radians);
}

}  // namespace

void OpticalCircuit::validate() const {
    if (elements.empty()) throw CircuitError("circuit has no elements");
    int last = 0;
    for (const Element &e : elements) {
        if (e.layer <= last) throw CircuitError("layer times must be positive and strictly increasing");
        last = e.layer;
        if (e.kind == ElementKind::beam_splitter && (e.theta.radians < -1e-12 || e.theta.radians > M_PI / 2 + 1e-12)) {
            throw CircuitError("beam-splitter theta outside [0, pi/2]");
        }
    }
    for (Arm a : {Arm::left, Arm::right}) {
        auto es = arm_elements(a);
        int splitters = 0, detectors = 0;
        for (const Element &e : es) (is_detector(e.kind) ? detectors : splitters)++;
        if (detectors != 1 || !is_detector(es.back().kind)) {
            throw CircuitError(to_string(a) + " arm needs exactly one detector as its last element");
        }
        if (splitters > 1) throw CircuitError(to_string(a) + " arm has more than one beam splitter");
        const bool interference = setting(a) == Setting::interference;
        if (interference != (es.back().kind == ElementKind::erasure_detector)) {
            throw CircuitError(to_string(a) + " arm detector does not match its setting");
        }
        for (const auto &order : {geometry[idx(a)].path_order, geometry[idx(a)].port_order}) {
            if (std::set<int>(order.begin(), order.end()) != std::set<int>{0, 1}) {
                throw CircuitError("geometric order must be a permutation of the two labels");
            }
        }
    }
}

std::vector<Element> OpticalCircuit::arm_elements(Arm a) const {
    std::vector<Element> out;
    for (const Element &e : elements)
        if (e.arm == a) out.push_back(e);
    return out;
}

bool OpticalCircuit::exact() const {
    return std::all_of(elements.begin(), elements.end(), [](const Element &e) {
        return e.kind != ElementKind::beam_splitter ||
               (e.theta.exact() && e.phase.exact() && mod16(*e.phase.pi8) % 8 == 0);
    });
}

OpticalCircuit build_eraser(Setting left, Setting right, bool right_acts_first, Angle theta) {
    return build_eraser(left, right, right_acts_first, theta, theta);
}

OpticalCircuit build_eraser(Setting left, Setting right, bool right_acts_first, Angle theta_left, Angle theta_right) {
    OpticalCircuit c{left, right, {}, {}};
    const Arm first = right_acts_first ? Arm::right : Arm::left;
    int base = 0;
    for (Arm a : {first, other(first)}) {
        if (c.setting(a) == Setting::interference) {
            c.elements.push_back({base + 1, a, ElementKind::beam_splitter, a == Arm::left ? theta_left : theta_right,
                                  Angle::pi8_multiple(0)});
            c.elements.push_back({base + 2, a, ElementKind::erasure_detector});
        } else {
            c.elements.push_back({base + 2, a, ElementKind::which_path_detector});
        }
        base += 2;
    }
    c.validate();
    return c;
}

std::vector<int> outcome_set(const OpticalCircuit &c, Arm a) {
    return c.setting(a) == Setting::interference ? std::vector<int>{1, 2} : std::vector<int>{3, 4};
}

std::string label_name(int index, bool after_splitter) {
    return std::string(index == 0 ? "1" : "2") + (after_splitter ? "'" : "");
}

hilbert::StateVector initial_state() {
    hilbert::Space s = hilbert::Space::product(path_space(), path_space());
    const double h = 1 / std::sqrt(2.0);
    hilbert::Vector v(4);
    v << h, 0, 0, h;
    return hilbert::StateVector(s, v);
}

JointAmplitudes<ExactReal> initial_amplitudes_exact() {
    const ExactReal h = ExactReal::sqrt2() * ExactReal(Rational(1, 2));
    return {{{h, ExactReal(0)}, {ExactReal(0), h}}};
}

namespace {

template <class Table>
Table empty_table(const OpticalCircuit &c) {
    Table t;
    for (int l : outcome_set(c, Arm::left))
        for (int r : outcome_set(c, Arm::right)) t[{l, r}] = 0;
    return t;
}

}  // namespace

Table copenhagen_joint_distribution(const OpticalCircuit &c) {
    c.validate();
    const hilbert::Space composite = hilbert::Space::product(path_space(), path_space());
    struct B {
        double weight;
        std::array<int, 2> outcome;
        hilbert::StateVector state;
    };
    std::vector<B> branches{{1.0, {0, 0}, initial_state()}};
    for (const Element &e : c.elements) {
        if (e.kind == ElementKind::beam_splitter) {
            auto u = hilbert::UnitaryMap::local(composite, idx(e.arm), splitter_unitary(e));
            for (auto &b : branches) b.state = hilbert::evolve(b.state, u);
            continue;
        }
        auto obs = hilbert::Observable::local(composite, idx(e.arm), detector_observable(e));
        std::vector<B> next;
        for (const auto &b : branches) {
            for (const auto &child : hilbert::branch(b.state, obs)) {
                B nb{b.weight * child.weight, b.outcome, child.state};
                nb.outcome[idx(e.arm)] = static_cast<int>(obs.spectrum()[child.outcome].value);
                next.push_back(std::move(nb));
            }
        }
        branches = std::move(next);
    }
    Table t = empty_table<Table>(c);
    for (const auto &b : branches) t[{b.outcome[0], b.outcome[1]}] += b.weight;
    return t;
}

ExactTable copenhagen_joint_distribution_exact(const OpticalCircuit &c) {
    c.validate();
    std::vector<CBranch<ExactOps>> branches{{{}, initial_amplitudes<ExactOps>()}};
    for (const Element &e : c.elements) copenhagen_layer<ExactOps>(branches, e);
    ExactTable t = empty_table<ExactTable>(c);
    for (const auto &b : branches) {
        ExactReal w = 0;
        for (const auto &row : b.amps)
            for (const auto &a : row) w += a * a;
        t[{*b.outcome[0], *b.outcome[1]}] += w;
    }
    return t;
}

// Floating transport ---------------------------------------------------------

BohmianTransport::BohmianTransport(OpticalCircuit c) : circuit_(std::move(c)) {
    circuit_.validate();
    auto psi = initial_amplitudes<FloatOps>();
    for (const Element &e : circuit_.elements) {
        before_.push_back(psi);
        if (e.kind == ElementKind::beam_splitter) apply_splitter<FloatOps>(psi, e);
    }
    before_.push_back(psi);
}

TransportResult BohmianTransport::operator()(const PathConfiguration &initial) const {
    PathConfiguration cfg = initial;
    for (int a = 0; a < 2; ++a) {
        if (cfg.actual[a] < 0 || cfg.actual[a] > 1) throw std::invalid_argument("path label index must be 0 or 1");
        if (!(cfg.coords[a] >= 0 && cfg.coords[a] < 1)) throw std::invalid_argument("coordinates must lie in [0, 1)");
        if (cfg.record[a].empty()) cfg.record[a].push_back({0, label_name(cfg.actual[a], false)});
    }
    if (FloatOps::prob(before_[0][cfg.actual[0]][cfg.actual[1]]) == 0) {
        throw std::invalid_argument("initial configuration has zero probability");
    }
    std::array<bool, 2> after{false, false};
    std::array<std::optional<int>, 2> outcome;
    for (std::size_t i = 0; i < circuit_.elements.size(); ++i) {
        const Element &e = circuit_.elements[i];
        const int a = idx(e.arm), o = cfg.actual[1 - a];
        if (is_detector(e.kind)) {
            outcome[a] = outcome_of(e.kind, cfg.actual[a]);
            continue;
        }
        auto p_in = conditional<FloatOps>(before_[i], e.arm, o);
        auto p_out = conditional<FloatOps>(before_[i + 1], e.arm, o);
        const int label = cfg.actual[a];
        if (p_in[label] <= 0) throw TransportError("actual label carries zero conditional probability");
        double cum = 0;
        for (int l : order_for(circuit_, e.arm, after[a])) {
            if (l == label) break;
            cum += p_in[l];
        }
        const double c = cum + cfg.coords[a] * p_in[label];
        double start = 0, last_start = 0;
        int chosen = -1, last = -1;
        for (int l : order_for(circuit_, e.arm, true)) {
            if (p_out[l] <= 0) continue;
            last = l;
            last_start = start;
            if (c < start + p_out[l]) {
                chosen = l;
                break;
            }
            start += p_out[l];
        }
        if (chosen < 0) {  // c rounded onto the top edge
            chosen = last;
            start = last_start;
        }
        double x = (c - start) / p_out[chosen];
        cfg.coords[a] = std::clamp(x, 0.0, std::nextafter(1.0, 0.0));
        cfg.actual[a] = chosen;
        after[a] = true;
        cfg.record[a].push_back({e.layer, label_name(chosen, true)});
    }
    return {{*outcome[0], *outcome[1]}, cfg};
}

TransportResult bohmian_transport(const OpticalCircuit &c, const PathConfiguration &initial) {
    return BohmianTransport(c)(initial);
}

PathConfiguration sample_configuration(RngStream &rng) {
    const auto psi = initial_amplitudes<FloatOps>();
    const double u = rng.uniform();
    PathConfiguration cfg;
    double cum = 0;
    bool set = false;
    for (int l = 0; l < 2 && !set; ++l) {
        for (int r = 0; r < 2 && !set; ++r) {
            const double p = std::norm(psi[l][r]);
            if (p > 0) cfg.actual = {l, r};
            cum += p;
            if (p > 0 && u < cum) set = true;
        }
    }
    cfg.coords = {rng.uniform(), rng.uniform()};
    return cfg;
}

CopenhagenSampler::CopenhagenSampler(const OpticalCircuit &c) {
    c.validate();
    const hilbert::Space composite = hilbert::Space::product(path_space(), path_space());
    for (const Element &e : c.elements) {
        Step s{std::nullopt, std::nullopt, e.arm};
        if (e.kind == ElementKind::beam_splitter) {
            s.unitary = hilbert::UnitaryMap::local(composite, idx(e.arm), splitter_unitary(e));
        } else {
            s.detector = hilbert::Observable::local(composite, idx(e.arm), detector_observable(e));
        }
        steps_.push_back(std::move(s));
    }
}

DetectorOutcome CopenhagenSampler::operator()(RngStream &rng) const {
    hilbert::StateVector state = initial_state();
    std::array<int, 2> out{0, 0};
    for (const Step &s : steps_) {
        if (s.unitary) {
            state = hilbert::evolve(state, *s.unitary);
        } else {
            auto m = hilbert::measure(state, *s.detector, rng);
            out[idx(s.arm)] = static_cast<int>(s.detector->spectrum()[m.outcome].value);
            state = std::move(m.post);
        }
    }
    return {out[0], out[1]};
}

DetectorOutcome sample_copenhagen(const OpticalCircuit &c, RngStream &rng) { return CopenhagenSampler(c)(rng); }

// Exact enumeration ----------------------------------------------------------

namespace {

struct WorkCell {
    Cell cell;
    std::array<ExactReal, 2> alpha{ExactReal(1), ExactReal(1)};  // x = alpha x0 + beta
    std::array<ExactReal, 2> beta{ExactReal(0), ExactReal(0)};
};

LayerComparison compare_layer(int layer, const std::vector<WorkCell> &cells,
                              const std::vector<CBranch<ExactOps>> &branches) {
    LayerComparison lc{layer, {}, true};
    for (const auto &w : cells) lc.measures[{w.cell.outcome, w.cell.actual}].first += w.cell.measure();
    for (const auto &b : branches) {
        for (int l = 0; l < 2; ++l) {
            for (int r = 0; r < 2; ++r) {
                ExactReal p = ExactOps::prob(b.amps[l][r]);
                if (p.sign() != 0) lc.measures[{b.outcome, {l, r}}].second += p;
            }
        }
    }
    for (const auto &[k, m] : lc.measures) lc.equal = lc.equal && m.first == m.second;
    return lc;
}

}  // namespace

bool Enumeration::equivariant() const {
    return std::all_of(layers.begin(), layers.end(), [](const LayerComparison &l) { return l.equal; });
}

ExactTable Enumeration::outcome_distribution() const {
    ExactTable t;
    for (const Cell &c : cells) t[{*c.outcome[0], *c.outcome[1]}] += c.measure();
    return t;
}

Enumeration enumerate_transport(const OpticalCircuit &c) {
    c.validate();
    if (!c.exact()) throw CircuitError("exact enumeration needs theta = k pi/8 and phase 0 or pi");
    Enumeration result;
    std::vector<CBranch<ExactOps>> branches{{{}, initial_amplitudes<ExactOps>()}};
    auto psi = initial_amplitudes<ExactOps>();
    std::vector<WorkCell> cells;
    for (int l = 0; l < 2; ++l) {
        for (int r = 0; r < 2; ++r) {
            ExactReal w = ExactOps::prob(psi[l][r]);
            if (w.sign() == 0) continue;
            WorkCell wc;
            wc.cell.initial = wc.cell.actual = {l, r};
            wc.cell.box = {Interval{0, 1}, Interval{0, 1}};
            wc.cell.weight = w;
            wc.cell.record = {Record{{0, label_name(l, false)}}, Record{{0, label_name(r, false)}}};
            cells.push_back(std::move(wc));
        }
    }
    result.layers.push_back(compare_layer(0, cells, branches));

    std::array<bool, 2> after{false, false};
    for (const Element &e : c.elements) {
        const int a = idx(e.arm);
        auto next_psi = psi;
        if (e.kind == ElementKind::beam_splitter) apply_splitter<ExactOps>(next_psi, e);
        copenhagen_layer<ExactOps>(branches, e);

        std::vector<WorkCell> next;
        for (auto &w : cells) {
            if (is_detector(e.kind)) {
                w.cell.outcome[a] = outcome_of(e.kind, w.cell.actual[a]);
                next.push_back(std::move(w));
                continue;
            }
            const int o = w.cell.actual[1 - a], label = w.cell.actual[a];
            auto p_in = conditional<ExactOps>(psi, e.arm, o);
            auto p_out = conditional<ExactOps>(next_psi, e.arm, o);
            if (p_in[label].sign() <= 0) throw TransportError("cell label carries zero conditional probability");
            ExactReal cum = 0;
            for (int l : order_for(c, e.arm, after[a])) {
                if (l == label) break;
                cum += p_in[l];
            }
            const ExactReal &p = p_in[label], &al = w.alpha[a], &be = w.beta[a];
            auto c_of = [&](const ExactReal &x0) { return cum + p * (al * x0 + be); };
            auto x0_of = [&](const ExactReal &t) { return ((t - cum) / p - be) / al; };
            ExactReal start = 0;
            for (int l : order_for(c, e.arm, true)) {
                const ExactReal &q = p_out[l];
                if (q.sign() == 0) continue;
                ExactReal lo = std::max(w.cell.box[a].lo, x0_of(start));
                ExactReal hi = std::min(w.cell.box[a].hi, x0_of(start + q));
                if (lo < hi) {
                    WorkCell piece = w;
                    piece.cell.box[a] = {lo, hi};
                    piece.cell.actual[a] = l;
                    piece.cell.record[a].push_back({e.layer, label_name(l, true)});
                    piece.alpha[a] = p * al / q;
                    piece.beta[a] = (cum + p * be - start) / q;
                    for (const ExactReal &x0 : {lo, hi}) {
                        if (start + q * (piece.alpha[a] * x0 + piece.beta[a]) != c_of(x0)) result.monotone = false;
                    }
                    next.push_back(std::move(piece));
                }
                start += q;
            }
        }
        if (e.kind == ElementKind::beam_splitter) after[a] = true;
        cells = std::move(next);
        psi = next_psi;
        result.layers.push_back(compare_layer(e.layer, cells, branches));
    }
    for (auto &w : cells) result.cells.push_back(std::move(w.cell));
    return result;
}

ExactReal differing_measure(const Enumeration &a, const Enumeration &b,
                            const std::function<bool(const Cell &, const Cell &)> &differ) {
    ExactReal total = 0;
    for (const Cell &x : a.cells) {
        for (const Cell &y : b.cells) {
            if (x.initial != y.initial) continue;
            ExactReal w = x.weight;
            bool empty = false;
            for (int k = 0; k < 2 && !empty; ++k) {
                ExactReal len = std::min(x.box[k].hi, y.box[k].hi) - std::max(x.box[k].lo, y.box[k].lo);
                if (len.sign() <= 0) empty = true;
                w *= len;
            }
            if (!empty && differ(x, y)) total += w;
        }
    }
    return total;
}

// Setting dependence ---------------------------------------------------------

SettingDependenceReport trajectory_setting_dependence(const std::vector<PathConfiguration> &seeds,
                                                      bool right_acts_first, Angle theta,
                                                      std::size_t max_examples) {
    if (seeds.empty()) throw std::invalid_argument("trajectory_setting_dependence: no hidden values");
    const Angle quarter = Angle::pi8_multiple(2);
    OpticalCircuit ci = build_eraser(Setting::interference, Setting::interference, right_acts_first, quarter, theta);
    OpticalCircuit cw = build_eraser(Setting::interference, Setting::whichpath, right_acts_first, quarter, theta);
    BohmianTransport ti(ci), tw(cw);
    SettingDependenceReport rep{seeds.size(), 0, 0, {}, std::nullopt};
    for (const PathConfiguration &s : seeds) {
        RecordPair pair{s, ti(s), tw(s)};
        if (pair.interference.final.record[0] != pair.whichpath.final.record[0]) {
            ++rep.changed;
            if (rep.examples.size() < max_examples) rep.examples.push_back(std::move(pair));
        }
    }
    rep.changed_fraction = static_cast<double>(rep.changed) / static_cast<double>(seeds.size());
    if (ci.exact()) {
        rep.exact_changed_measure = differing_measure(
            enumerate_transport(ci), enumerate_transport(cw),
            [](const Cell &x, const Cell &y) { return x.record[0] != y.record[0]; });
    }
    return rep;
}

// Export ---------------------------------------------------------------------

namespace {

nlohmann::json record_array(const Record &r) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto &e : r) a.push_back({e.layer, e.label});
    return a;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

nlohmann::json record_json(const OpticalCircuit &c, const PathConfiguration &initial, const TransportResult &r) {
    return {
        {"hidden",
         {{"label_L", label_name(initial.actual[0], false)},
          {"label_R", label_name(initial.actual[1], false)},
          {"x_L", initial.coords[0]},
          {"x_R", initial.coords[1]}}},
        {"settings", {{"left", to_string(c.left)}, {"right", to_string(c.right)}}},
        {"record_L", record_array(r.final.record[0])},
        {"record_R", record_array(r.final.record[1])},
        {"outcome", {{"left", r.outcome.left_name()}, {"right", r.outcome.right_name()}}},
    };
}

std::string records_svg(const std::vector<RecordPair> &pairs, bool right_acts_first) {
    const double width = 720, row = 150, top = 40;
    const double height = top + row * static_cast<double>(std::max<std::size_t>(pairs.size(), 1)) + 20;
    const double cx = width / 2, step = 70, lane = 50;
    const ArmGeometry geom{};
    auto y_of = [&](const std::string &label, double y0) {
        const bool port = label.back() == '\'';
        const int index = label[0] == '1' ? 0 : 1;
        const auto &order = port ? geom.port_order : geom.path_order;
        return y0 + lane * (order[0] == index ? 0 : 1);
    };
    // Layers are drawn outward from the source in the centre.
    auto x_of = [&](Arm a, int layer) {
        int local = layer;
        if ((a == Arm::right) != right_acts_first && layer > 0) local = layer - 2;
        const double d = step * (local + 1) * (layer == 0 ? 0.4 : 1.0);
        return a == Arm::left ? cx - d : cx + d;
    };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n"
      << "<style>.axis{stroke:#888;stroke-width:1}.interference{stroke:#1f4e9c;stroke-width:3;fill:none}"
         ".whichpath{stroke:#2a8a3a;stroke-width:2;fill:none;stroke-dasharray:6 4}"
         ".changed{stroke:#c0392b;stroke-width:5;fill:none}text{font:12px sans-serif;fill:#333}</style>\n";
    s << "<text x=\"" << fmt(cx) << "\" y=\"20\" text-anchor=\"middle\">source</text>\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double y0 = top + row * static_cast<double>(i) + 30;
        const auto &pair = pairs[i];
        s << "<g class=\"pair\" id=\"pair-" << i << "\">\n";
        s << "<text x=\"10\" y=\"" << fmt(y0 - 12) << "\">x_L=" << fmt(pair.initial.coords[0])
          << " x_R=" << fmt(pair.initial.coords[1]) << " labels " << label_name(pair.initial.actual[0], false) << ","
          << label_name(pair.initial.actual[1], false) << "</text>\n";
        for (double y : {y0, y0 + lane}) {
            s << "<line class=\"axis\" x1=\"40\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(width - 40) << "\" y2=\""
              << fmt(y) << "\"/>\n";
        }
        for (Arm a : {Arm::left, Arm::right}) {
            const int k = idx(a);
            const Record &ri = pair.interference.final.record[k], &rw = pair.whichpath.final.record[k];
            for (const auto &[rec, cls] : {std::pair{&ri, "interference"}, std::pair{&rw, "whichpath"}}) {
                s << "<polyline class=\"" << cls << "\" data-arm=\"" << to_string(a) << "\" points=\"";
                for (std::size_t j = 0; j < rec->size(); ++j) {
                    s << (j ? " " : "") << fmt(x_of(a, (*rec)[j].layer)) << "," << fmt(y_of((*rec)[j].label, y0));
                }
                s << "\"/>\n";
            }
            if (a != Arm::left) continue;
            for (std::size_t j = 1; j < std::min(ri.size(), rw.size()); ++j) {
                if (ri[j] == rw[j] && ri[j - 1] == rw[j - 1]) continue;
                s << "<line class=\"changed\" data-arm=\"left\" x1=\"" << fmt(x_of(a, ri[j - 1].layer)) << "\" y1=\""
                  << fmt(y_of(ri[j - 1].label, y0)) << "\" x2=\"" << fmt(x_of(a, ri[j].layer)) << "\" y2=\""
                  << fmt(y_of(ri[j].label, y0)) << "\"/>\n";
            }
        }
        s << "<text x=\"40\" y=\"" << fmt(y0 + lane + 30) << "\">" << pair.interference.outcome.left_name() << "/"
          << pair.interference.outcome.right_name() << " (right interference), "
          << pair.whichpath.outcome.left_name() << "/" << pair.whichpath.outcome.right_name()
          << " (right whichpath)</text>\n</g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace qfound::circuit
