// Acceptance gate: one PASS/FAIL line per criterion.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "config.h"
#include "scenarios.h"

using namespace qfound;
using namespace qfound::cli;

namespace {

struct Criterion {
    int id;
    const char *name;
    double limit_seconds;  // 0: no limit
};

const std::vector<Criterion> kCriteria{
    {1, "eraser correlations", 10},
    {2, "local causality violated, no-signaling satisfied", 5},
    {3, "collapse necessity", 5},
    {4, "branch/collapse equivalence", 0},
    {5, "Bohmian measurement independence violation", 5},
    {6, "transport equivariance", 0},
    {7, "continuum pilot wave", 60},
    {8, "double-slit non-crossing", 60},
    {9, "CHSH", 30},
    {10, "decoherence bookkeeping", 0},
};

std::map<std::string, std::string> outputs(unsigned workers) {
    nlohmann::json flags{{"scenario", "claims_suite"}, {"seed", 7}, {"workers", workers}};
    std::map<std::string, std::string> files;
    for (auto &a : run_scenario(ScenarioConfig::resolve(nullptr, flags)).files) files[a.path] = a.content;
    return files;
}

}  // namespace

int main() {
    int failed = 0;
    auto line = [&](bool ok, int id, const std::string &name, const std::string &note) {
        std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), note.c_str());
        failed += !ok;
    };

    const SuiteResult suite = claims_suite({7, 1});
    for (const auto &c : kCriteria) {
        std::size_t total = 0, matched = 0;
        std::string bad;
        for (const auto &cl : suite.claims) {
            if (cl.criterion != c.id) continue;
            ++total;
            if (cl.matches()) {
                ++matched;
            } else {
                bad += " " + cl.id + "=" + inference::to_string(cl.report.verdict);
            }
        }
        const double t = suite.seconds.at(c.id);
        bool ok = total > 0 && matched == total && (c.limit_seconds == 0 || t < c.limit_seconds);
        char note[160];
        if (c.limit_seconds > 0) {
            std::snprintf(note, sizeof note, "%zu/%zu claims at expected verdict, %.2f s (limit %.0f s)", matched, total,
                          t, c.limit_seconds);
        } else {
            std::snprintf(note, sizeof note, "%zu/%zu claims at expected verdict, %.2f s", matched, total, t);
        }
        std::string text = note + bad;
        if (c.id == 5) {
            const std::size_t examples = suite.setting_dependence["examples"].size();
            ok = ok && examples > 0;
            text += ", " + std::to_string(examples) + " differing record pairs";
        }
        line(ok, c.id, c.name, text);
    }

    const auto one = outputs(1), again = outputs(1), four = outputs(4);
    std::size_t compared = 0, differing = 0;
    for (const auto &[path, content] : one) {
        ++compared;
        differing += !again.count(path) || again.at(path) != content || !four.count(path) || four.at(path) != content;
    }
    differing += one.size() != again.size() || one.size() != four.size();
    line(compared > 0 && differing == 0, 11, "determinism",
         std::to_string(compared) + " files byte-identical across two runs and 1 vs 4 workers" +
             (differing ? ", " + std::to_string(differing) + " differ" : ""));
    return failed ? 1 : 0;
}
