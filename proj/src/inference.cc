#include "qfound/inference.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "parallel.h"

namespace qfound::inference {

using circuit::Arm;
using circuit::DetectorOutcome;

std::string to_string(Mode m) { return m == Mode::analytic ? "analytic" : "montecarlo"; }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::violated: return "violated";
        case Verdict::satisfied: return "satisfied";
        default: return "inconclusive";
    }
}

nlohmann::json TestReport::to_json() const {
    nlohmann::json j{{"test", test},   {"statistic", statistic}, {"threshold", threshold},
                     {"verdict", inference::to_string(verdict)}, {"n", n},  {"mode", inference::to_string(mode)},
                     {"details", details}};
    if (statistic_exact) j["details"]["statistic_exact"] = *statistic_exact;
    return j;
}

std::string Event::name() const { return (arm == Arm::left ? "L" : "R") + std::to_string(outcome); }

bool Event::operator()(const DetectorOutcome &o) const { return (arm == Arm::left ? o.left : o.right) == outcome; }

std::array<double, 2> wilson_interval(std::size_t k, std::size_t n, double confidence) {
    if (n == 0) return {0, 1};
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2);
    const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn;
    const double denom = 1 + z * z / nn;
    const double centre = (p + z * z / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

double to_double(const ExactReal &x) { return x.to_double(); }
double to_double(double x) { return x; }

bool is_zero(const ExactReal &x) { return x.sign() == 0; }
bool is_zero(double x) { return std::abs(x) <= kBranchTolerance; }

ExactReal absolute(const ExactReal &x) { return abs(x); }
double absolute(double x) { return std::abs(x); }

template <class W>
const RunRecord &rec(const Weighted<W> &w) {
    return w.record;
}
const RunRecord &rec(const RunRecord &r) { return r; }

template <class W>
W weight(const Weighted<W> &w) {
    return w.weight;
}

template <class Records>
void require_common_context(const Records &records) {
    if (records.empty()) throw InferenceError("no records");
    for (const auto &r : records) {
        if (rec(r).context != rec(records.front()).context) {
            throw InferenceError("records must share one conditioning context S");
        }
    }
}

Verdict margin_verdict(double lo, double hi, double margin) {
    if (lo > margin) return Verdict::violated;
    if (hi < margin) return Verdict::satisfied;
    return Verdict::inconclusive;
}

template <class W>
TestReport weighted_lc(const std::vector<Weighted<W>> &records, const Event &a, const Event &b, bool exact) {
    require_common_context(records);
    W total(0), pa(0), pb(0), pab(0);
    for (const auto &r : records) {
        const auto &o = r.record.outcome;
        total += r.weight;
        if (a(o)) pa += r.weight;
        if (b(o)) pb += r.weight;
        if (a(o) && b(o)) pab += r.weight;
    }
    if (is_zero(pb)) throw InferenceError("conditioning event " + b.name() + " has zero frequency");
    const W cond = pab / pb, marg = pa / total;
    const W stat = absolute(cond - marg);
    TestReport rep{"local_causality", to_double(stat), std::nullopt, 0.0,
                   is_zero(stat) ? Verdict::satisfied : Verdict::violated, records.size(), Mode::analytic};
    if constexpr (std::is_same_v<W, ExactReal>) rep.statistic_exact = stat.to_string();
    rep.details = {{"event_a", a.name()},
                   {"event_b", b.name()},
                   {"p_a_given_s", to_double(marg)},
                   {"p_a_given_s_b", to_double(cond)},
                   {"weights", exact ? "exact" : "branch"}};
    return rep;
}

}  // namespace

// Record builders ---------------------------------------------------------------

ExactRecords exact_records(const circuit::OpticalCircuit &c, const std::string &context) {
    ExactRecords out;
    for (const auto &[o, p] : circuit::copenhagen_joint_distribution_exact(c)) {
        out.push_back({{{c.left, c.right}, o, std::nullopt, context}, p});
    }
    return out;
}

BranchRecords branch_records(const circuit::OpticalCircuit &c, const std::string &context) {
    BranchRecords out;
    for (const auto &[o, p] : circuit::copenhagen_joint_distribution(c)) {
        out.push_back({{{c.left, c.right}, o, std::nullopt, context}, p});
    }
    return out;
}

SampledRecords copenhagen_records(const circuit::OpticalCircuit &c, std::size_t n, std::uint64_t seed,
                                  const std::string &context, unsigned workers) {
    circuit::CopenhagenSampler sampler(c);
    SampledRecords out(n);
    detail::parallel_for(n, workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        out[i] = {{c.left, c.right}, sampler(rng), std::nullopt, context};
    });
    return out;
}

SampledRecords bohmian_records(const circuit::OpticalCircuit &c, std::size_t n, std::uint64_t seed,
                               const std::string &context, unsigned workers) {
    circuit::BohmianTransport transport(c);
    SampledRecords out(n);
    detail::parallel_for(n, workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        circuit::PathConfiguration cfg = circuit::sample_configuration(rng);
        circuit::TransportResult r = transport(cfg);
        out[i] = {{c.left, c.right}, r.outcome, HiddenRecord{cfg.actual, cfg.coords, r.final.record}, context};
    });
    return out;
}

ExactRecords bohmian_exact_records(const circuit::OpticalCircuit &c, const std::string &context) {
    ExactRecords out;
    for (const auto &[o, p] : circuit::enumerate_transport(c).outcome_distribution()) {
        out.push_back({{{c.left, c.right}, o, std::nullopt, context}, p});
    }
    return out;
}

// Local Causality ----------------------------------------------------------------

TestReport local_causality_test(const ExactRecords &records, const Event &a, const Event &b) {
    return weighted_lc(records, a, b, true);
}

TestReport local_causality_test(const BranchRecords &records, const Event &a, const Event &b) {
    return weighted_lc(records, a, b, false);
}

TestReport local_causality_test(const SampledRecords &records, const Event &a, const Event &b,
                                const MonteCarloPolicy &policy) {
    require_common_context(records);
    std::size_t na = 0, nb = 0, nab = 0;
    for (const auto &r : records) {
        na += a(r.outcome);
        nb += b(r.outcome);
        nab += a(r.outcome) && b(r.outcome);
    }
    if (nb == 0) throw InferenceError("conditioning event " + b.name() + " has zero frequency");
    const std::size_t n = records.size();
    const double each = 1 - (1 - policy.confidence) / 2;
    const auto ci_cond = wilson_interval(nab, nb, each), ci_marg = wilson_interval(na, n, each);
    const double cond = double(nab) / double(nb), marg = double(na) / double(n);
    const double lo = std::max({0.0, ci_cond[0] - ci_marg[1], ci_marg[0] - ci_cond[1]});
    const double hi = std::max(ci_cond[1] - ci_marg[0], ci_marg[1] - ci_cond[0]);
    TestReport rep{"local_causality", std::abs(cond - marg), std::nullopt, policy.margin,
                   margin_verdict(lo, hi, policy.margin), n, Mode::montecarlo};
    rep.details = {{"event_a", a.name()},       {"event_b", b.name()},      {"p_a_given_s", marg},
                   {"p_a_given_s_b", cond},     {"ci", {lo, hi}},           {"confidence", policy.confidence}};
    return rep;
}

// Measurement Independence -------------------------------------------------------

namespace {

std::vector<int> common_arms(const std::vector<Settings> &settings) {
    std::vector<int> arms;
    for (Arm a : {Arm::left, Arm::right}) {
        bool same = std::all_of(settings.begin(), settings.end(),
                                [&](const Settings &s) { return s.of(a) == settings.front().of(a); });
        if (same) arms.push_back(static_cast<int>(a));
    }
    return arms;
}

nlohmann::json arm_names(const std::vector<int> &arms) {
    nlohmann::json j = nlohmann::json::array();
    for (int a : arms) j.push_back(circuit::to_string(static_cast<Arm>(a)));
    return j;
}

std::string settings_name(const Settings &s) { return circuit::to_string(s.left) + "/" + circuit::to_string(s.right); }

}  // namespace

TestReport measurement_independence_test(const std::vector<SettingEnumeration> &groups, HiddenStage stage) {
    if (groups.size() < 2) throw InferenceError("measurement independence needs at least two setting groups");
    std::vector<Settings> settings;
    for (const auto &g : groups) settings.push_back(g.settings);
    const std::vector<int> arms = stage == HiddenStage::pre_detection ? common_arms(settings) : std::vector<int>{};

    ExactReal best = 0;
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            const auto &ei = groups[i].enumeration, &ej = groups[j].enumeration;
            // Initial-label marginals: both groups start from the same state.
            std::map<std::array<int, 2>, ExactReal> mi, mj;
            for (const auto &c : ei.cells) mi[c.initial] += c.measure();
            for (const auto &c : ej.cells) mj[c.initial] += c.measure();
            ExactReal initial_tvd = 0;
            for (const auto &[k, v] : mi) initial_tvd += abs(v - (mj.count(k) ? mj.at(k) : ExactReal(0)));
            for (const auto &[k, v] : mj)
                if (!mi.count(k)) initial_tvd += abs(v);
            initial_tvd = initial_tvd * ExactReal(Rational(1, 2));
            ExactReal tvd = initial_tvd;
            if (initial_tvd.sign() == 0) {
                tvd = circuit::differing_measure(ei, ej, [&](const circuit::Cell &x, const circuit::Cell &y) {
                    return std::any_of(arms.begin(), arms.end(), [&](int a) { return x.record[a] != y.record[a]; });
                });
            }
            pairs.push_back({{"a", settings_name(groups[i].settings)},
                             {"b", settings_name(groups[j].settings)},
                             {"tvd", tvd.to_double()},
                             {"tvd_exact", tvd.to_string()}});
            if (tvd > best) best = tvd;
        }
    }
    TestReport rep{"measurement_independence", best.to_double(), best.to_string(), 0.0,
                   best.sign() == 0 ? Verdict::satisfied : Verdict::violated, groups.size(), Mode::analytic};
    rep.details = {{"stage", stage == HiddenStage::initial ? "initial" : "pre_detection"},
                   {"lambda_arms", arm_names(arms)},
                   {"pairs", pairs}};
    return rep;
}

TestReport measurement_independence_test(const SampledRecords &records, HiddenStage stage, std::size_t bins,
                                         const MonteCarloPolicy &policy) {
    TestReport rep{"measurement_independence", 0.0, std::nullopt, policy.margin, Verdict::inconclusive,
                   records.size(), Mode::montecarlo};
    if (records.empty() || std::any_of(records.begin(), records.end(), [](const RunRecord &r) { return !r.hidden; })) {
        rep.details = {{"explanation", "hidden records absent"}};
        return rep;
    }
    if (bins == 0) throw InferenceError("bins must be positive");
    std::map<Settings, std::map<std::string, std::size_t>> groups;
    std::vector<Settings> settings;
    for (const auto &r : records) {
        if (!groups.count(r.settings)) settings.push_back(r.settings);
        groups[r.settings];
    }
    if (groups.size() < 2) throw InferenceError("measurement independence needs at least two setting groups");
    const std::vector<int> arms = stage == HiddenStage::pre_detection ? common_arms(settings) : std::vector<int>{};
    for (const auto &r : records) {
        const HiddenRecord &h = *r.hidden;
        std::string key = std::to_string(h.initial[0]) + std::to_string(h.initial[1]);
        for (double x : h.coords) {
            auto b = std::min<std::size_t>(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
            key += "|" + std::to_string(b);
        }
        for (int a : arms) {
            key += "|";
            for (const auto &e : h.record[a]) key += std::to_string(e.layer) + ":" + e.label + ";";
        }
        groups[r.settings][key]++;
    }
    std::map<Settings, std::size_t> sizes;
    for (const auto &[s, g] : groups) {
        std::size_t n = 0;
        for (const auto &[k, c] : g) n += c;
        sizes[s] = n;
    }
    // Support bound: joint initial label x coordinate bins x at most four records per arm.
    const double categories = 4.0 * double(bins * bins) * std::pow(4.0, double(arms.size()));
    const std::size_t npairs = groups.size() * (groups.size() - 1) / 2;
    const double delta = (1 - policy.confidence) / (2.0 * double(npairs));
    auto eps = [&](std::size_t n) {
        return std::sqrt(2 * (categories * std::log(2.0) + std::log(1 / delta)) / double(n));
    };
    double best = 0, best_lo = 0, best_hi = 0;
    bool any_violated = false, all_satisfied = true;
    nlohmann::json pairs = nlohmann::json::array();
    for (auto i = groups.begin(); i != groups.end(); ++i) {
        for (auto j = std::next(i); j != groups.end(); ++j) {
            const double ni = double(sizes[i->first]), nj = double(sizes[j->first]);
            std::set<std::string> keys;
            for (const auto &[k, c] : i->second) keys.insert(k);
            for (const auto &[k, c] : j->second) keys.insert(k);
            double tvd = 0;
            for (const auto &k : keys) {
                double pi = i->second.count(k) ? double(i->second.at(k)) / ni : 0;
                double pj = j->second.count(k) ? double(j->second.at(k)) / nj : 0;
                tvd += std::abs(pi - pj) / 2;
            }
            const double half = (eps(sizes[i->first]) + eps(sizes[j->first])) / 2;
            const double lo = std::max(0.0, tvd - half), hi = std::min(1.0, tvd + half);
            Verdict v = margin_verdict(lo, hi, policy.margin);
            any_violated = any_violated || v == Verdict::violated;
            all_satisfied = all_satisfied && v == Verdict::satisfied;
            pairs.push_back({{"a", settings_name(i->first)}, {"b", settings_name(j->first)}, {"tvd", tvd},
                             {"ci", {lo, hi}}});
            if (tvd >= best) {
                best = tvd;
                best_lo = lo;
                best_hi = hi;
            }
        }
    }
    rep.statistic = best;
    rep.verdict = any_violated ? Verdict::violated : (all_satisfied ? Verdict::satisfied : Verdict::inconclusive);
    rep.details = {{"stage", stage == HiddenStage::initial ? "initial" : "pre_detection"},
                   {"lambda_arms", arm_names(arms)},
                   {"bins", bins},
                   {"ci", {best_lo, best_hi}},
                   {"confidence", policy.confidence},
                   {"pairs", pairs}};
    return rep;
}

// No-signaling -------------------------------------------------------------------

namespace {

template <class Records>
std::map<circuit::Setting, std::vector<const RunRecord *>> group_by_remote(const Records &records, Arm local) {
    std::map<circuit::Setting, std::vector<const RunRecord *>> groups;
    const Arm remote = local == Arm::left ? Arm::right : Arm::left;
    if (records.empty()) throw InferenceError("no records");
    for (const auto &r : records) {
        if (rec(r).settings.of(local) != rec(records.front()).settings.of(local)) {
            throw InferenceError("no-signaling records must share the local setting");
        }
        groups[rec(r).settings.of(remote)].push_back(&rec(r));
    }
    if (groups.size() < 2) throw InferenceError("no-signaling needs at least two remote settings");
    return groups;
}

int local_outcome(const RunRecord &r, Arm local) { return local == Arm::left ? r.outcome.left : r.outcome.right; }

template <class W>
TestReport weighted_ns(const std::vector<Weighted<W>> &records, Arm local) {
    auto groups = group_by_remote(records, local);
    std::map<const RunRecord *, W> w;
    for (const auto &r : records) w[&r.record] = r.weight;
    std::map<circuit::Setting, std::map<int, W>> marg;
    std::set<int> outcomes;
    for (const auto &[s, rs] : groups) {
        W total(0);
        for (const auto *r : rs) total += w[r];
        if (is_zero(total)) throw InferenceError("remote-setting group with zero weight");
        for (const auto *r : rs) {
            marg[s][local_outcome(*r, local)] += w[r] / total;
            outcomes.insert(local_outcome(*r, local));
        }
    }
    W best(0);
    nlohmann::json table = nlohmann::json::object();
    for (const auto &[s, m] : marg) {
        for (int o : outcomes) table[circuit::to_string(s)][std::to_string(o)] = to_double(m.count(o) ? m.at(o) : W(0));
    }
    for (auto i = marg.begin(); i != marg.end(); ++i) {
        for (auto j = std::next(i); j != marg.end(); ++j) {
            for (int o : outcomes) {
                W a = i->second.count(o) ? i->second.at(o) : W(0), b = j->second.count(o) ? j->second.at(o) : W(0);
                W d = absolute(a - b);
                if (d > best) best = d;
            }
        }
    }
    TestReport rep{"no_signaling", to_double(best), std::nullopt, 0.0,
                   is_zero(best) ? Verdict::satisfied : Verdict::violated, records.size(), Mode::analytic};
    if constexpr (std::is_same_v<W, ExactReal>) rep.statistic_exact = best.to_string();
    rep.details = {{"local_arm", circuit::to_string(local)}, {"marginals", table}};
    return rep;
}

}  // namespace

TestReport no_signaling_test(const ExactRecords &records, Arm local) { return weighted_ns(records, local); }
TestReport no_signaling_test(const BranchRecords &records, Arm local) { return weighted_ns(records, local); }

TestReport no_signaling_test(const SampledRecords &records, Arm local, const MonteCarloPolicy &policy) {
    auto groups = group_by_remote(records, local);
    std::set<int> outcomes;
    for (const auto &r : records) outcomes.insert(local_outcome(r, local));
    std::map<circuit::Setting, std::map<int, std::size_t>> counts;
    for (const auto &[s, rs] : groups)
        for (const auto *r : rs) counts[s][local_outcome(*r, local)]++;
    const std::size_t comparisons = groups.size() * (groups.size() - 1) / 2 * outcomes.size();
    const double each = 1 - (1 - policy.confidence) / (2.0 * double(comparisons));
    double best = 0, best_lo = 0, best_hi = 0;
    bool any_violated = false, all_satisfied = true;
    for (auto i = groups.begin(); i != groups.end(); ++i) {
        for (auto j = std::next(i); j != groups.end(); ++j) {
            for (int o : outcomes) {
                const std::size_t ni = i->second.size(), nj = j->second.size();
                const std::size_t ki = counts[i->first][o], kj = counts[j->first][o];
                auto ci = wilson_interval(ki, ni, each), cj = wilson_interval(kj, nj, each);
                const double d = std::abs(double(ki) / double(ni) - double(kj) / double(nj));
                const double lo = std::max({0.0, ci[0] - cj[1], cj[0] - ci[1]});
                const double hi = std::max(ci[1] - cj[0], cj[1] - ci[0]);
                Verdict v = margin_verdict(lo, hi, policy.margin);
                any_violated = any_violated || v == Verdict::violated;
                all_satisfied = all_satisfied && v == Verdict::satisfied;
                if (d >= best) {
                    best = d;
                    best_lo = lo;
                    best_hi = hi;
                }
            }
        }
    }
    TestReport rep{"no_signaling", best, std::nullopt, policy.margin,
                   any_violated ? Verdict::violated : (all_satisfied ? Verdict::satisfied : Verdict::inconclusive),
                   records.size(), Mode::montecarlo};
    rep.details = {{"local_arm", circuit::to_string(local)}, {"ci", {best_lo, best_hi}}, {"confidence", policy.confidence}};
    return rep;
}

// CHSH -----------------------------------------------------------------------------

namespace {

template <class Table, class T>
T correlator_from(const Table &t) {
    return t.at({1, 1}) + t.at({2, 2}) - t.at({1, 2}) - t.at({2, 1});
}

}  // namespace

double correlator(double theta, double phi) {
    using circuit::Angle;
    auto c = circuit::build_eraser(circuit::Setting::interference, circuit::Setting::interference, false,
                                   Angle::from_radians(theta), Angle::from_radians(phi));
    return correlator_from<circuit::Table, double>(circuit::copenhagen_joint_distribution(c));
}

ExactReal correlator_exact(int theta_pi8, int phi_pi8) {
    using circuit::Angle;
    auto c = circuit::build_eraser(circuit::Setting::interference, circuit::Setting::interference, false,
                                   Angle::pi8_multiple(theta_pi8), Angle::pi8_multiple(phi_pi8));
    return correlator_from<circuit::ExactTable, ExactReal>(circuit::copenhagen_joint_distribution_exact(c));
}

double chsh_value(const std::array<double, 4> &x) {
    return correlator(x[0], x[2]) + correlator(x[0], x[3]) + correlator(x[1], x[2]) - correlator(x[1], x[3]);
}

ExactReal chsh_value_exact(const std::array<int, 4> &k) {
    return correlator_exact(k[0], k[2]) + correlator_exact(k[0], k[3]) + correlator_exact(k[1], k[2]) -
           correlator_exact(k[1], k[3]);
}

ChshOptimum optimize_chsh(int divisions) {
    if (divisions < 1) throw std::invalid_argument("optimize_chsh: divisions must be positive");
    const int m = divisions + 1;
    const double h = M_PI / 2 / divisions;
    std::vector<double> e(static_cast<std::size_t>(m * m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) e[static_cast<std::size_t>(i * m + j)] = correlator(i * h, j * h);
    auto E = [&](int i, int j) { return e[static_cast<std::size_t>(i * m + j)]; };
    // Grid points on multiples of pi/8 win ties, so the optimum can be
    // re-evaluated exactly.
    const bool pi8_grid = divisions % 4 == 0;
    auto on_pi8 = [&](const std::array<int, 4> &k) {
        return pi8_grid && std::all_of(k.begin(), k.end(), [&](int v) { return v % (divisions / 4) == 0; });
    };
    double best = -10;
    std::array<int, 4> arg{0, 0, 0, 0};
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    const double s = E(a, c) + E(a, d) + E(b, c) - E(b, d);
                    std::array<int, 4> k{a, b, c, d};
                    if (s > best + 1e-12 || (s > best - 1e-12 && on_pi8(k) && !on_pi8(arg))) {
                        best = std::max(best, s);
                        arg = k;
                    }
                }
    ChshOptimum out{best, {arg[0] * h, arg[1] * h, arg[2] * h, arg[3] * h}, std::nullopt, std::nullopt,
                    static_cast<std::size_t>(m * m)};
    best = chsh_value(out.angles);
    out.evaluations += 4;
    bool moved = false;
    for (double step = h / 2; step > 1e-10; step /= 2) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int k = 0; k < 4; ++k) {
                for (double dir : {-1.0, 1.0}) {
                    auto trial = out.angles;
                    trial[k] = std::clamp(trial[k] + dir * step, 0.0, M_PI / 2);
                    const double s = chsh_value(trial);
                    out.evaluations += 4;
                    if (s > best + 1e-15) {
                        best = s;
                        out.angles = trial;
                        improved = moved = true;
                    }
                }
            }
        }
    }
    out.s_max = best;
    if (!moved && on_pi8(arg)) {
        const int per = divisions / 4;
        out.pi8 = std::array<int, 4>{arg[0] / per, arg[1] / per, arg[2] / per, arg[3] / per};
        out.s_exact = chsh_value_exact(*out.pi8);
        out.s_max = std::max(out.s_max, out.s_exact->to_double());
    }
    return out;
}

namespace {

/// Integral over lambda in [0,1) of sign(cos 2(a - pi lambda)) sign(cos 2(b - pi lambda)).
double sign_model_correlator(double a, double b) {
    std::vector<double> cuts{0.0, 1.0};
    for (double t : {a, b}) {
        for (double off : {-0.25, 0.25}) {
            double l = t / M_PI + off;
            l -= std::floor(l);
            cuts.push_back(l);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    auto sgn = [](double v) { return v >= 0 ? 1.0 : -1.0; };
    double total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double w = cuts[i + 1] - cuts[i];
        if (w <= 0) continue;
        const double mid = (cuts[i] + cuts[i + 1]) / 2;
        total += w * sgn(std::cos(2 * (a - M_PI * mid))) * sgn(std::cos(2 * (b - M_PI * mid)));
    }
    return total;
}

}  // namespace

std::vector<LocalModel> local_model_family() {
    std::vector<LocalModel> out;
    for (int bits = 0; bits < 16; ++bits) {
        auto v = [bits](int k) { return (bits >> k) & 1 ? -1.0 : 1.0; };
        std::array<double, 2> a{v(0), v(1)}, b{v(2), v(3)};
        out.push_back({"table_" + std::to_string(bits), [a, b](int i, double, int j, double) { return a[i] * b[j]; }});
    }
    out.push_back({"constant", [](int, double, int, double) { return 1.0; }});
    out.push_back({"hidden_angle_sign", [](int, double t, int, double p) { return sign_model_correlator(t, p); }});
    out.push_back({"hidden_angle_anti", [](int, double t, int, double p) { return -sign_model_correlator(t, p); }});
    return out;
}

double local_model_max_chsh(const LocalModel &model, int divisions) {
    const int m = divisions + 1;
    const double h = M_PI / 2 / divisions;
    // cache[i][a][j][b]
    std::vector<double> cache(static_cast<std::size_t>(4 * m * m));
    auto at = [&](int i, int a, int j, int b) -> double & {
        return cache[static_cast<std::size_t>(((i * 2 + j) * m + a) * m + b)];
    };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) at(i, a, j, b) = model.correlator(i, a * h, j, b * h);
    double best = -10;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d)
                    best = std::max(best, at(0, a, 0, c) + at(0, a, 1, d) + at(1, b, 0, c) - at(1, b, 1, d));
    return best;
}

TestReport chsh_monte_carlo(const std::array<double, 4> &x, std::size_t n, std::uint64_t seed,
                            const MonteCarloPolicy &policy) {
    using circuit::Angle;
    using circuit::Setting;
    std::vector<circuit::CopenhagenSampler> samplers;
    const std::array<std::array<int, 2>, 4> pairs{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
    for (const auto &p : pairs) {
        samplers.emplace_back(circuit::build_eraser(Setting::interference, Setting::interference, false,
                                                    Angle::from_radians(x[p[0]]), Angle::from_radians(x[p[1]])));
    }
    std::array<std::size_t, 4> same{}, total{};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i % 4;
        RngStream rng(seed, i);
        DetectorOutcome o = samplers[k](rng);
        total[k]++;
        same[k] += o.left == o.right;
    }
    const double each = 1 - (1 - policy.confidence) / 4;
    double s = 0, lo = 0, hi = 0;
    nlohmann::json corr = nlohmann::json::array();
    for (std::size_t k = 0; k < 4; ++k) {
        const double sign = k == 3 ? -1 : 1;
        auto ci = wilson_interval(same[k], total[k], each);
        const double e = 2 * double(same[k]) / double(std::max<std::size_t>(total[k], 1)) - 1;
        s += sign * e;
        lo += sign > 0 ? 2 * ci[0] - 1 : -(2 * ci[1] - 1);
        hi += sign > 0 ? 2 * ci[1] - 1 : -(2 * ci[0] - 1);
        corr.push_back(e);
    }
    TestReport rep{"chsh", s, std::nullopt, 2.0, Verdict::inconclusive, n, Mode::montecarlo};
    rep.verdict = lo > 2 ? Verdict::violated : (hi < 2 ? Verdict::satisfied : Verdict::inconclusive);
    rep.details = {{"angles", x}, {"correlators", corr}, {"ci", {lo, hi}}, {"confidence", policy.confidence}};
    return rep;
}

// Repeatability and branching --------------------------------------------------------

TestReport repeatability_test(std::size_t n, const hilbert::StateVector &state, const hilbert::Observable &obs,
                              std::uint64_t seed, bool collapse) {
    if (n == 0) throw std::invalid_argument("repeatability_test: n must be at least 1");
    std::size_t differ = 0;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng(seed, i);
        auto first = hilbert::measure(state, obs, rng);
        auto second = hilbert::measure(collapse ? first.post : state, obs, rng);
        differ += first.outcome != second.outcome;
    }
    double expected_without = 1;
    for (const auto &p : hilbert::born_distribution(state, obs)) expected_without -= p.probability * p.probability;
    const MonteCarloPolicy policy;
    auto ci = wilson_interval(differ, n, policy.confidence);
    TestReport rep{"repeatability", double(differ) / double(n), std::nullopt, policy.margin,
                   margin_verdict(ci[0], ci[1], policy.margin), n, Mode::montecarlo};
    rep.details = {{"collapse", collapse},
                   {"differing", differ},
                   {"ci", ci},
                   {"expected_without_collapse", expected_without},
                   {"sigma_without_collapse", std::sqrt(expected_without * (1 - expected_without) / double(n))}};
    return rep;
}

TestReport branch_equivalence_test(const hilbert::StateVector &state, const hilbert::Observable &obs, std::size_t n,
                                   std::uint64_t seed) {
    const auto born = hilbert::born_distribution(state, obs);
    const auto branches = hilbert::branch(state, obs);
    std::vector<double> weight(obs.num_outcomes(), 0.0);
    for (const auto &b : branches) weight[b.outcome] = b.weight;
    double max_diff = 0;
    for (const auto &p : born) max_diff = std::max(max_diff, std::abs(weight[p.outcome] - p.probability));
    std::vector<std::size_t> counts(obs.num_outcomes(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng(seed, i);
        counts[hilbert::measure(state, obs, rng).outcome]++;
    }
    double max_z = 0;
    for (std::size_t k = 0; k < weight.size(); ++k) {
        const double f = double(counts[k]) / double(n), w = weight[k];
        const double sd = std::sqrt(w * (1 - w) / double(n));
        const double z = sd > 0 ? std::abs(f - w) / sd : (f == w ? 0.0 : INFINITY);
        max_z = std::max(max_z, z);
    }
    const bool ok = max_diff <= kBranchTolerance && max_z <= 3;
    TestReport rep{"branch_equivalence", max_z, std::nullopt, 3.0, ok ? Verdict::satisfied : Verdict::violated, n,
                   Mode::montecarlo};
    rep.details = {{"max_weight_minus_born", max_diff}, {"outcomes", weight.size()}};
    return rep;
}

std::vector<MeasurementCase> random_measurement_family(std::size_t count, std::size_t max_dim, std::uint64_t seed) {
    if (max_dim < 2) throw std::invalid_argument("random_measurement_family: max_dim must be at least 2");
    std::vector<MeasurementCase> family;
    family.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        RngStream rng(seed, i);
        std::normal_distribution<double> gauss;
        const auto dim = static_cast<std::size_t>(2 + rng.uniform() * static_cast<double>(max_dim - 1));
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < dim; ++k) labels.push_back(std::to_string(k));
        hilbert::Space space(labels);
        auto d = static_cast<Eigen::Index>(dim);
        hilbert::Vector amps(d);
        for (Eigen::Index k = 0; k < d; ++k) amps(k) = {gauss(rng), gauss(rng)};
        hilbert::Matrix g(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) g(r, c) = {gauss(rng), gauss(rng)};
        hilbert::Matrix q = Eigen::HouseholderQR<hilbert::Matrix>(g).householderQ();
        Eigen::VectorXd values(d);
        for (Eigen::Index k = 0; k < d; ++k) values(k) = 1 + std::floor(rng.uniform() * static_cast<double>(dim));
        hilbert::Matrix m = q * values.cast<hilbert::Complex>().asDiagonal() * q.adjoint();
        m = (m + m.adjoint()) / 2.0;
        family.push_back({hilbert::StateVector::normalized(space, amps), hilbert::Observable(space, m)});
    }
    return family;
}

}  // namespace qfound::inference
