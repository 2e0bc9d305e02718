#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "config.h"
#include "emit.h"
#include "plot.h"
#include "scenarios.h"
#include "schemas.h"

namespace {

constexpr int kOk = 0, kUsage = 1, kRuntime = 2, kMismatch = 3;

struct Flags {
    std::string config;
    std::string scenario;
    std::map<std::string, std::string> values;
};

void add_value(CLI::App &app, Flags &f, const std::string &key, const std::string &help) {
    std::string flag = "--" + key;
    for (auto &ch : flag)
        if (ch == '_') ch = '-';
    app.add_option_function<std::string>(flag, [&f, key](const std::string &v) { f.values[key] = v; }, help);
}

int run(const Flags &f) {
    using namespace qfound::cli;
    ScenarioConfig cfg = [&] {
        nlohmann::json file;
        if (!f.config.empty()) file = ScenarioConfig::parse_file(f.config);
        nlohmann::json flags = nlohmann::json::object();
        if (!f.scenario.empty()) flags["scenario"] = f.scenario;
        for (const auto &[k, v] : f.values) flags[k] = flag_value(k, v);
        return ScenarioConfig::resolve(file, flags, f.config.empty() ? "config" : f.config);
    }();
    RunOutput out = run_scenario(cfg);
    write_artifacts(cfg.out(), out.files, manifest(cfg.scenario(), cfg.echo(), out.files));
    for (const auto &a : out.files) std::cout << cfg.out() << "/" << a.path << "\n";
    std::cout << cfg.out() << "/manifest.json\n";
    if (out.mismatches) {
        std::cerr << "claims suite: " << out.mismatches << " verdict mismatch(es)\n";
        return kMismatch;
    }
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qfound: interpretation-comparison simulator"};
    app.require_subcommand(1);

    Flags flags;
    auto *run_cmd = app.add_subcommand("run", "Run a scenario and write its outputs");
    run_cmd->add_option("scenario", flags.scenario,
                        "eraser|double_slit|free_packet|harmonic|repeatability|bell_chsh|claims_suite");
    run_cmd->add_option("--config", flags.config, "JSON config file");
    add_value(*run_cmd, flags, "seed", "64-bit master seed");
    add_value(*run_cmd, flags, "trials", "Monte-Carlo trial count");
    add_value(*run_cmd, flags, "mode", "analytic|montecarlo");
    add_value(*run_cmd, flags, "out", "Output directory");
    add_value(*run_cmd, flags, "format", "Comma-separated subset of csv,json,svg");
    add_value(*run_cmd, flags, "workers", "Worker threads");
    for (const auto &key : qfound::cli::config_fields()) {
        if (key == "scenario" || key == "formats" || flags.values.count(key)) continue;
        if (key == "seed" || key == "trials" || key == "mode" || key == "out" || key == "workers") continue;
        add_value(*run_cmd, flags, key, "Scenario parameter '" + key + "'");
    }

    std::string input, output;
    auto *plot_cmd = app.add_subcommand("plot", "Render a trajectory CSV or path-record JSON as SVG");
    plot_cmd->add_option("input", input, "Input file (.csv or .json)")->required();
    plot_cmd->add_option("-o,--output", output, "Output SVG path (default: stdout)");

    std::string schema_name;
    auto *schema_cmd = app.add_subcommand("schema", "Print the JSON schemas");
    schema_cmd->add_option("name", schema_name, "Schema name (default: list all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*run_cmd) {
            if (flags.values.count("format")) {
                flags.values["formats"] = flags.values["format"];
                flags.values.erase("format");
            }
            return run(flags);
        }
        if (*plot_cmd) {
            const std::string svg = qfound::cli::plot_file(input);
            if (output.empty()) {
                std::cout << svg;
            } else {
                std::ofstream out(output, std::ios::binary);
                out << svg;
                if (!out) {
                    std::cerr << output << ": write failed\n";
                    return kRuntime;
                }
            }
            return kOk;
        }
        if (*schema_cmd) {
            if (schema_name.empty()) {
                for (const auto &[name, text] : qfound::cli::schemas()) std::cout << name << "\n";
                return kOk;
            }
            for (const auto &[name, text] : qfound::cli::schemas()) {
                if (name == schema_name || name == schema_name + ".schema.json") {
                    std::cout << text;
                    return kOk;
                }
            }
            std::cerr << "unknown schema '" << schema_name << "'\n";
            return kUsage;
        }
    } catch (const qfound::cli::ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const qfound::cli::PlotInputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception &e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
