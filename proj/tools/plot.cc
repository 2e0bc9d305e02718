#include "plot.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace qfound::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string &s, bool &ok) {
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    ok = r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(v);
    return v;
}

}  // namespace

TrajectoryTable read_trajectory_csv(std::istream &in, const std::string &name) {
    TrajectoryTable t;
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) return t;
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "trajectory_id,time,q1") {
        t.dims = 1;
    } else if (line == "trajectory_id,time,q1,q2") {
        t.dims = 2;
    } else if (line.empty()) {
        return t;
    } else {
        throw PlotInputError(name + ": row 1: expected header trajectory_id,time,q1[,q2]");
    }
    std::map<long, std::size_t> index;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto bad = [&](const std::string &what) {
            return PlotInputError(name + ": row " + std::to_string(row) + ": " + what);
        };
        const auto cells = split(line);
        if (cells.size() != t.dims + 2) {
            throw bad("expected " + std::to_string(t.dims + 2) + " fields, found " + std::to_string(cells.size()));
        }
        long id = 0;
        const auto r = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
        if (r.ec != std::errc() || r.ptr != cells[0].data() + cells[0].size() || id < 0) {
            throw bad("trajectory_id '" + cells[0] + "' is not a non-negative integer");
        }
        TrajectorySample s{0, {0, 0}};
        bool ok = true;
        s.time = parse_double(cells[1], ok);
        if (!ok) throw bad("time '" + cells[1] + "' is not a finite number");
        for (std::size_t k = 0; k < t.dims; ++k) {
            s.q[k] = parse_double(cells[2 + k], ok);
            if (!ok) throw bad("q" + std::to_string(k + 1) + " '" + cells[2 + k] + "' is not a finite number");
        }
        auto [it, fresh] = index.try_emplace(id, t.trajectories.size());
        if (fresh) t.trajectories.push_back({id, {}});
        t.trajectories[it->second].samples.push_back(s);
    }
    return t;
}

std::string trajectories_svg(const TrajectoryTable &table) {
    const double width = 640, height = 480, left = 60, right = 20, top = 20, bottom = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto xy = [&](const TrajectorySample &s) {
        return table.dims == 1 ? std::array<double, 2>{s.time, s.q[0]} : s.q;
    };
    for (const auto &tr : table.trajectories) {
        for (const auto &s : tr.samples) {
            const auto p = xy(s);
            x0 = std::min(x0, p[0]);
            x1 = std::max(x1, p[0]);
            y0 = std::min(y0, p[1]);
            y1 = std::max(y1, p[1]);
        }
    }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x0 == x1) x0 -= 0.5, x1 += 0.5;
    if (y0 == y1) y0 -= 0.5, y1 += 0.5;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n"
      << "<style>.axis{stroke:#333;stroke-width:1}.trajectory{stroke:#1f4e9c;stroke-width:0.8;fill:none;"
         "stroke-opacity:0.7}text{font:11px sans-serif;fill:#333}</style>\n";
    s << "<g class=\"axes\">\n"
      << "<line class=\"axis\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(left + pw)
      << "\" y2=\"" << fmt(top + ph) << "\"/>\n"
      << "<line class=\"axis\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left)
      << "\" y2=\"" << fmt(top + ph) << "\"/>\n";
    const char *xlabel = table.dims == 1 ? "time" : "q1";
    const char *ylabel = table.dims == 1 ? "q1" : "q2";
    s << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top + ph + 16) << "\">" << fmt(x0) << "</text>\n"
      << "<text x=\"" << fmt(left + pw) << "\" y=\"" << fmt(top + ph + 16) << "\" text-anchor=\"end\">" << fmt(x1)
      << "</text>\n"
      << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(top + ph + 36) << "\" text-anchor=\"middle\">"
      << xlabel << "</text>\n"
      << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(top + ph) << "\" text-anchor=\"end\">" << fmt(y0)
      << "</text>\n"
      << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(top + 10) << "\" text-anchor=\"end\">" << fmt(y1)
      << "</text>\n"
      << "<text x=\"14\" y=\"" << fmt(top + ph / 2) << "\">" << ylabel << "</text>\n</g>\n";
    for (const auto &tr : table.trajectories) {
        s << "<polyline class=\"trajectory\" data-id=\"" << tr.id << "\" points=\"";
        for (std::size_t j = 0; j < tr.samples.size(); ++j) {
            const auto p = xy(tr.samples[j]);
            s << (j ? " " : "") << fmt(px(p[0])) << "," << fmt(py(p[1]));
        }
        s << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

namespace {

int parse_label(const nlohmann::json &j, const std::string &where) {
    const std::string l = j.get<std::string>();
    if (l == "1") return 0;
    if (l == "2") return 1;
    throw PlotInputError(where + ": initial label '" + l + "' is not 1 or 2");
}

circuit::Record parse_record(const nlohmann::json &j, const std::string &where) {
    if (!j.is_array()) throw PlotInputError(where + ": expected an array of [layer, label]");
    circuit::Record r;
    for (const auto &e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_string()) {
            throw PlotInputError(where + ": expected [layer, label] entries");
        }
        const std::string label = e[1].get<std::string>();
        if (label != "1" && label != "2" && label != "1'" && label != "2'") {
            throw PlotInputError(where + ": unknown label '" + label + "'");
        }
        r.push_back({e[0].get<int>(), label});
    }
    return r;
}

int parse_outcome(const nlohmann::json &j, char arm, const std::string &where) {
    const std::string s = j.get<std::string>();
    if (s.size() != 2 || s[0] != arm || s[1] < '1' || s[1] > '4') {
        throw PlotInputError(where + ": bad outcome '" + s + "'");
    }
    return s[1] - '0';
}

}  // namespace

std::vector<circuit::RecordPair> read_record_pairs(const nlohmann::json &records, bool &right_acts_first) {
    if (!records.is_array()) throw PlotInputError("path records: top level must be an array");
    using Key = std::tuple<int, int, double, double>;
    std::map<Key, std::size_t> index;
    std::vector<circuit::RecordPair> pairs;
    std::vector<std::array<bool, 2>> filled;
    right_acts_first = true;
    bool order_known = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string where = "record " + std::to_string(i);
        const auto &r = records[i];
        try {
            const auto &h = r.at("hidden");
            circuit::PathConfiguration init;
            init.actual = {parse_label(h.at("label_L"), where), parse_label(h.at("label_R"), where)};
            init.coords = {h.at("x_L").get<double>(), h.at("x_R").get<double>()};
            init.record[0] = {{0, h.at("label_L").get<std::string>()}};
            init.record[1] = {{0, h.at("label_R").get<std::string>()}};
            circuit::TransportResult t;
            t.final.record = {parse_record(r.at("record_L"), where), parse_record(r.at("record_R"), where)};
            t.outcome = {parse_outcome(r.at("outcome").at("left"), 'L', where),
                         parse_outcome(r.at("outcome").at("right"), 'R', where)};
            const circuit::Setting right = circuit::parse_setting(r.at("settings").at("right").get<std::string>());
            circuit::parse_setting(r.at("settings").at("left").get<std::string>());
            for (const auto &e : t.final.record[0]) {
                if (e.layer == 1 || e.layer == 2) right_acts_first = false, order_known = true;
                if (e.layer == 3 || e.layer == 4) right_acts_first = true, order_known = true;
            }
            if (!order_known) {
                for (const auto &e : t.final.record[1]) {
                    if (e.layer == 1 || e.layer == 2) right_acts_first = true, order_known = true;
                    if (e.layer == 3 || e.layer == 4) right_acts_first = false, order_known = true;
                }
            }
            const Key key{init.actual[0], init.actual[1], init.coords[0], init.coords[1]};
            auto [it, fresh] = index.try_emplace(key, pairs.size());
            if (fresh) {
                pairs.push_back({init, t, t});
                filled.push_back({false, false});
            }
            const int slot = right == circuit::Setting::interference ? 0 : 1;
            auto &pair = pairs[it->second];
            if (slot == 0) {
                pair.interference = t;
                if (!filled[it->second][1]) pair.whichpath = t;
            } else {
                pair.whichpath = t;
                if (!filled[it->second][0]) pair.interference = t;
            }
            filled[it->second][slot] = true;
        } catch (const nlohmann::json::exception &e) {
            throw PlotInputError(where + ": " + e.what());
        } catch (const circuit::CircuitError &e) {
            throw PlotInputError(where + ": " + e.what());
        }
    }
    return pairs;
}

std::string plot_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlotInputError(path + ": cannot open input");
    const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (!json) return trajectories_svg(read_trajectory_csv(in, path));
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw PlotInputError(path + ": invalid JSON at byte " + std::to_string(e.byte));
    }
    bool raf = true;
    try {
        auto pairs = read_record_pairs(doc, raf);
        return circuit::records_svg(pairs, raf);
    } catch (const PlotInputError &e) {
        throw PlotInputError(path + ": " + e.what());
    }
}

}  // namespace qfound::cli
