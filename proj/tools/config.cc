#include "config.h"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qfound::cli {

namespace {

using nlohmann::json;

enum class Kind { text, choice, integer, number, boolean, formats };

struct Field {
    Kind kind;
    std::set<std::string> choices{};
    double min = -INFINITY;
    double max = INFINITY;
    bool exclusive_min = false;
};

const std::set<std::string> kScenarios{"eraser",     "double_slit", "free_packet", "harmonic",
                                       "repeatability", "bell_chsh",   "claims_suite"};
const std::set<std::string> kSettings{"interference", "whichpath"};
const std::set<std::string> kFormats{"csv", "json", "svg"};

const std::map<std::string, Field> &fields() {
    static const std::map<std::string, Field> table{
        {"scenario", {Kind::choice, kScenarios}},
        {"mode", {Kind::choice, {"analytic", "montecarlo"}}},
        {"seed", {Kind::integer, {}, 0, 18446744073709551615.0}},
        {"trials", {Kind::integer, {}, 1, 1e9}},
        {"workers", {Kind::integer, {}, 1, 256}},
        {"out", {Kind::text}},
        {"formats", {Kind::formats}},
        {"left", {Kind::choice, kSettings}},
        {"right", {Kind::choice, kSettings}},
        {"right_acts_first", {Kind::boolean}},
        {"theta", {Kind::number, {}, 0, M_PI / 2}},
        {"records", {Kind::integer, {}, 0, 10000}},
        {"dt", {Kind::number, {}, 0, INFINITY, true}},
        {"steps", {Kind::integer, {}, 1, 1e8}},
        {"save_every", {Kind::integer, {}, 1, 1e8}},
        {"grid_min", {Kind::number}},
        {"grid_max", {Kind::number}},
        {"grid_points", {Kind::integer, {}, 64, 1 << 20}},
        {"mass", {Kind::number, {}, 0, INFINITY, true}},
        {"width", {Kind::number, {}, 0, INFINITY, true}},
        {"center", {Kind::number}},
        {"momentum", {Kind::number}},
        {"separation", {Kind::number, {}, 0, INFINITY}},
        {"omega", {Kind::number, {}, 0, INFINITY, true}},
        {"export_trajectories", {Kind::integer, {}, 0, 1e7}},
        {"snapshots", {Kind::boolean}},
        {"divisions", {Kind::integer, {}, 1, 64}},
    };
    return table;
}

std::string join(const std::set<std::string> &s) {
    std::string out;
    for (const auto &x : s) out += (out.empty() ? "" : "|") + x;
    return out;
}

void check_field(const std::string &where, const std::string &key, const json &v) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError(where + ": unknown field '" + key + "'");
    const Field &f = it->second;
    auto fail = [&](const std::string &what) { throw ConfigError(where + ": field '" + key + "': " + what); };
    switch (f.kind) {
        case Kind::text:
            if (!v.is_string() || v.get<std::string>().empty()) fail("expected a non-empty string");
            return;
        case Kind::choice:
            if (!v.is_string() || !f.choices.count(v.get<std::string>())) fail("expected one of " + join(f.choices));
            return;
        case Kind::boolean:
            if (!v.is_boolean()) fail("expected true or false");
            return;
        case Kind::formats: {
            if (!v.is_array() || v.empty()) fail("expected a non-empty array of " + join(kFormats));
            std::set<std::string> seen;
            for (const auto &x : v) {
                if (!x.is_string() || !kFormats.count(x.get<std::string>())) fail("expected entries from " + join(kFormats));
                if (!seen.insert(x.get<std::string>()).second) fail("duplicate entry '" + x.get<std::string>() + "'");
            }
            return;
        }
        case Kind::integer:
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                fail("expected a non-negative integer");
            }
            break;
        case Kind::number:
            if (!v.is_number() || !std::isfinite(v.get<double>())) fail("expected a finite number");
            break;
    }
    const double x = v.get<double>();
    if (x < f.min || (f.exclusive_min && x == f.min) || x > f.max) {
        std::ostringstream s;
        s << "value " << v.dump() << " out of range";
        fail(s.str());
    }
}

}  // namespace

const std::set<std::string> &config_fields() {
    static const std::set<std::string> names = [] {
        std::set<std::string> s;
        for (const auto &[k, _] : fields()) s.insert(k);
        return s;
    }();
    return names;
}

json flag_value(const std::string &key, const std::string &raw) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown option '" + key + "'");
    auto bad = [&] { return ConfigError("--" + key + ": cannot parse '" + raw + "'"); };
    switch (it->second.kind) {
        case Kind::text:
        case Kind::choice:
            return raw;
        case Kind::boolean:
            if (raw == "true" || raw == "1") return true;
            if (raw == "false" || raw == "0") return false;
            throw bad();
        case Kind::formats: {
            json list = json::array();
            std::stringstream s(raw);
            for (std::string item; std::getline(s, item, ',');) list.push_back(item);
            return list;
        }
        case Kind::integer: {
            if (raw.empty() || raw.find_first_not_of("0123456789") != std::string::npos) throw bad();
            try {
                return json(std::stoull(raw));
            } catch (const std::exception &) {
                throw bad();
            }
        }
        case Kind::number: {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(raw, &used);
            } catch (const std::exception &) {
                throw bad();
            }
            if (used != raw.size()) throw bad();
            return v;
        }
    }
    throw bad();
}

json ScenarioConfig::parse_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        json doc = json::parse(text);
        if (!doc.is_object()) throw ConfigError(path + ": line 1: top level must be an object");
        return doc;
    } catch (const json::parse_error &e) {
        const std::size_t upto = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ": line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": invalid JSON");
    }
}

ScenarioConfig ScenarioConfig::resolve(const json &file, const json &flags, const std::string &file_name) {
    ScenarioConfig c;
    c.values_ = {{"mode", "analytic"}, {"seed", 0}, {"workers", 1}, {"out", "out"}, {"formats", {"csv", "json", "svg"}}};
    for (const auto &[src, name] : {std::pair{&file, file_name}, std::pair{&flags, std::string("command line")}}) {
        if (src->is_null()) continue;
        for (const auto &[k, v] : src->items()) {
            check_field(name, k, v);
            c.values_[k] = v;
        }
    }
    if (!c.values_.contains("scenario")) throw ConfigError("no scenario given");
    c.scenario_ = c.values_["scenario"].get<std::string>();
    c.out_ = c.values_["out"].get<std::string>();
    for (const auto &f : c.values_["formats"]) c.formats_.insert(f.get<std::string>());
    if (c.has("grid_min") && c.has("grid_max") && c.number("grid_min", 0) >= c.number("grid_max", 0)) {
        throw ConfigError("field 'grid_max': must exceed grid_min");
    }
    if (c.has("grid_points")) {
        const std::size_t n = c.count("grid_points", 0);
        if (n & (n - 1)) throw ConfigError("field 'grid_points': must be a power of two");
    }
    return c;
}

bool ScenarioConfig::analytic() const { return values_.at("mode") == "analytic"; }
std::uint64_t ScenarioConfig::seed() const { return values_.at("seed").get<std::uint64_t>(); }
unsigned ScenarioConfig::workers() const { return values_.at("workers").get<unsigned>(); }

double ScenarioConfig::number(const std::string &key, double fallback) const {
    return has(key) ? values_.at(key).get<double>() : fallback;
}

std::size_t ScenarioConfig::count(const std::string &key, std::size_t fallback) const {
    return has(key) ? values_.at(key).get<std::size_t>() : fallback;
}

bool ScenarioConfig::flag(const std::string &key, bool fallback) const {
    return has(key) ? values_.at(key).get<bool>() : fallback;
}

std::string ScenarioConfig::text(const std::string &key, const std::string &fallback) const {
    return has(key) ? values_.at(key).get<std::string>() : fallback;
}

json ScenarioConfig::echo() const {
    json e = values_;
    e.erase("out");
    e.erase("workers");
    return e;
}

}  // namespace qfound::cli
