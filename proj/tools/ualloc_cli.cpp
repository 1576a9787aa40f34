// SPDX-License-Identifier: Apache-2.0
//
// ualloc: run allocation experiments from a preset or a JSON config and write
// trace / summary artifacts. Talks to the library through the C API only.
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ualloc/ualloc.h"

namespace {

struct ConfigDeleter {
    void operator()(ua_config* c) const { ua_config_free(c); }
};
using ConfigPtr = std::unique_ptr<ua_config, ConfigDeleter>;

struct StringDeleter {
    void operator()(char* s) const { ua_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

int report(ua_status status, const std::string& context) {
    std::cerr << "ualloc: " << context << ": " << ua_status_string(status);
    const std::string detail = ua_last_error();
    if (!detail.empty()) std::cerr << "\n" << detail;
    std::cerr << '\n';
    return static_cast<int>(status);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw CLI::ValidationError("--gamma", "not a number: " + item);
        values.push_back(v);
    }
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed unit-demand resource allocation simulator"};
    app.set_version_flag("--version", std::string(ua_version()));

    std::string preset;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> steps;
    std::optional<std::uint64_t> snapshot_every;
    std::optional<unsigned> threads;
    std::string gamma;
    std::string out_dir = "ualloc-out";
    bool oracle = false;
    bool constant_omega = false;
    bool snapshots = false;
    bool no_trace = false;
    bool print_config = false;

    auto* preset_opt = app.add_option("--preset", preset, "ev-charging | single-resource-theorem2 | custom");
    auto* config_opt = app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    preset_opt->excludes(config_opt);
    app.add_option("--seed", seed, "master seed (overrides config)");
    app.add_option("--steps", steps, "number of time steps (overrides config)")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_flag("--oracle", oracle, "compare against the oracle solvers and write oracle.json");
    app.add_flag("--constant-omega", constant_omega, "freeze Omega at its initial value");
    app.add_option("--snapshot-every", snapshot_every, "per-agent snapshot period (0 = final step only)");
    app.add_option("--gamma", gamma, "damping per resource, e.g. 0.95,0.98");
    app.add_option("--threads", threads, "worker threads for agent updates")->check(CLI::PositiveNumber);
    app.add_flag("--snapshots", snapshots, "write per-agent snapshots.csv");
    app.add_flag("--no-trace", no_trace, "skip trace.csv");
    app.add_flag("--print-config", print_config, "print the resolved config as JSON and exit");

    CLI11_PARSE(app, argc, argv);

    if (preset.empty() && config_path.empty()) {
        std::cerr << "ualloc: one of --preset or --config is required\n";
        return 2;
    }
    if (preset == "custom" && config_path.empty()) {
        std::cerr << "ualloc: preset 'custom' needs --config PATH\n";
        return 2;
    }

    ua_config* raw = nullptr;
    const std::string source = config_path.empty() ? preset : config_path;
    ua_status status = config_path.empty() ? ua_config_from_preset(preset.c_str(), &raw)
                                           : ua_config_from_file(config_path.c_str(), &raw);
    if (status != UA_OK) return report(status, "loading " + source);
    ConfigPtr config(raw);

    // Flags override whatever the preset or file set.
    if (seed) status = ua_config_set_seed(config.get(), *seed);
    if (status == UA_OK && steps) status = ua_config_set_steps(config.get(), *steps);
    if (status == UA_OK && constant_omega) status = ua_config_set_constant_omega(config.get(), 1);
    if (status == UA_OK && snapshot_every) status = ua_config_set_snapshot_every(config.get(), *snapshot_every);
    if (status == UA_OK && threads) status = ua_config_set_threads(config.get(), *threads);
    if (status == UA_OK && !gamma.empty()) {
        std::vector<double> values;
        try {
            values = parse_list(gamma);
        } catch (const std::exception& e) {
            std::cerr << "ualloc: bad --gamma list: " << e.what() << '\n';
            return 2;
        }
        status = ua_config_set_gamma(config.get(), values.data(), values.size());
    }
    if (status != UA_OK) return report(status, "applying overrides");

    if (print_config) {
        char* text = nullptr;
        status = ua_config_to_json(config.get(), &text);
        if (status != UA_OK) return report(status, "serialising config");
        OwnedString owned(text);
        std::cout << owned.get() << '\n';
        return 0;
    }

    unsigned flags = 0;
    if (!no_trace) flags |= UA_EMIT_TRACE;
    if (snapshots) flags |= UA_EMIT_SNAPSHOTS;
    if (oracle) flags |= UA_EMIT_ORACLE;

    char* summary = nullptr;
    status = ua_run_experiment(config.get(), source.c_str(), out_dir.c_str(), flags, &summary);
    OwnedString owned_summary(summary);
    if (status != UA_OK) return report(status, "running experiment");

    std::cout << "wrote " << out_dir << "/summary.json";
    if (flags & UA_EMIT_TRACE) std::cout << ", " << out_dir << "/trace.csv";
    if (flags & UA_EMIT_SNAPSHOTS) std::cout << ", " << out_dir << "/snapshots.csv";
    if (flags & UA_EMIT_ORACLE) std::cout << ", " << out_dir << "/oracle.json";
    std::cout << '\n';
    return 0;
}
