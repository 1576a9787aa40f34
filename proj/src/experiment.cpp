// SPDX-License-Identifier: Apache-2.0
#include "ualloc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ualloc/controller.hpp"
#include "ualloc/error.hpp"
#include "ualloc/oracle.hpp"
#include "ualloc/serialization.hpp"

namespace ualloc {

using nlohmann::json;

namespace {

constexpr std::uint64_t kBroadcastFloatBits = 64;

SimConfig ev_preset() {
    SimConfig c;
    c.n = 1200;
    c.m = 2;
    c.steps = 2000;
    c.seed = 1;
    c.linear = LinearTerms::Exclude;
    c.snapshot_every = 10;
    c.summary_window = 60;
    c.resources = {
        ResourceSpec{.capacity = 400, .tau = 0.0002275, .gamma = 1.0, .omega0 = 0.328},
        ResourceSpec{.capacity = 500, .tau = 0.0002125, .gamma = 1.0, .omega0 = 0.35},
    };
    c.population.kind = PopulationKind::Ev;
    c.population.class_sizes = {300, 300, 300, 300};
    return c;
}

SimConfig theorem2_preset() {
    SimConfig c;
    c.n = 100;
    c.m = 1;
    c.steps = 50000;
    c.seed = 1;
    c.linear = LinearTerms::Include;
    c.constant_omega = true;
    c.snapshot_every = 1000;
    c.summary_window = 60;
    c.population.kind = PopulationKind::Quadratic;
    c.population.coeff_min = 1.0;
    c.population.coeff_max = 3.0;
    // The capacity implied by the fixed point: sum_i Omega / (2 c_i).
    constexpr double omega = 0.5;
    double implied = 0.0;
    for (std::size_t i = 0; i < c.n; ++i) {
        const double coeff = 1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(c.n - 1);
        implied += omega / (2.0 * coeff);
    }
    c.resources = {ResourceSpec{.capacity = implied, .tau = 1e-3, .gamma = 1.0, .omega0 = omega}};
    return c;
}

// The cost the dynamics actually optimise: without linear terms the agents
// respond to the gradient of the monomials alone.
Population driven_costs(const Population& population, LinearTerms lin) {
    if (lin == LinearTerms::Include) return population;
    Population out;
    out.reserve(population.size());
    for (const CostFunction& g : population) {
        out.emplace_back(std::vector<double>(g.resources(), 0.0),
                         std::vector<Monomial>(g.monomials().begin(), g.monomials().end()));
    }
    return out;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace

std::vector<std::string> preset_names() {
    return {std::string(kPresetEv), std::string(kPresetTheorem2), std::string(kPresetCustom)};
}

SimConfig preset_config(std::string_view name) {
    if (name == kPresetEv) return ev_preset();
    if (name == kPresetTheorem2) return theorem2_preset();
    if (name == kPresetCustom) {
        throw Error(ErrorCode::Config, "preset 'custom' needs a config file");
    }
    throw Error(ErrorCode::Config, "unknown preset '" + std::string(name) + "' (expected ev-charging, "
                                   "single-resource-theorem2 or custom)");
}

SimConfig parse_config(std::string_view text, std::string_view source) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, std::string(source) + ": " + e.what());
    }
    try {
        return config_from_json(doc);
    } catch (const Error& e) {
        throw Error(e.code(), std::string(source) + ": " + e.what());
    }
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << 'k';
    for (std::size_t j = 0; j < trace.m; ++j) {
        out << ",omega_" << j << ",sum_xi_" << j << ",sum_y_" << j << ",grad_min_" << j << ",grad_max_" << j
            << ",clamps_" << j;
    }
    out << '\n';
    for (const TraceRecord& rec : trace.records) {
        out << rec.step;
        for (const ResourceObservables& r : rec.resources) {
            out << ',' << format_double(r.omega) << ',' << r.sum_xi << ',' << format_double(r.sum_y) << ','
                << format_double(r.grad_min) << ',' << format_double(r.grad_max) << ',' << r.clamps;
        }
        out << '\n';
    }
}

void write_snapshots_csv(std::ostream& out, const Trace& trace) {
    out << "k,agent";
    for (std::size_t j = 0; j < trace.m; ++j) out << ",y_" << j;
    out << '\n';
    for (const Snapshot& snap : trace.snapshots) {
        for (std::size_t i = 0; i < trace.n; ++i) {
            out << snap.step << ',' << i;
            for (std::size_t j = 0; j < trace.m; ++j) out << ',' << format_double(snap.y[i * trace.m + j]);
            out << '\n';
        }
    }
}

ExperimentResult run_experiment(const RunManifest& manifest) {
    const SimConfig& config = manifest.config;
    const auto started = std::chrono::steady_clock::now();

    ExperimentResult result;
    json& summary = result.summary;
    summary["schema"] = "ualloc.summary";
    summary["schema_version"] = kSchemaVersion;
    summary["source"] = manifest.source;
    summary["config"] = config_to_json(config);
    summary["artifacts"] = json::object();

    std::error_code ec;
    std::filesystem::create_directories(manifest.out_dir, ec);
    if (ec || !std::filesystem::is_directory(manifest.out_dir)) {
        throw Error(ErrorCode::Io, "cannot create output directory " + manifest.out_dir.string());
    }
    const auto summary_path = manifest.out_dir / "summary.json";

    try {
        config.validate();
        const Trace trace = run(config);

        if (manifest.emit.trace) {
            std::ofstream out(manifest.out_dir / "trace.csv");
            if (!out) throw Error(ErrorCode::Io, "cannot write trace.csv");
            write_trace_csv(out, trace);
            summary["artifacts"]["trace"] = "trace.csv";
        }
        if (manifest.emit.snapshots) {
            std::ofstream out(manifest.out_dir / "snapshots.csv");
            if (!out) throw Error(ErrorCode::Io, "cannot write snapshots.csv");
            write_snapshots_csv(out, trace);
            summary["artifacts"]["snapshots"] = "snapshots.csv";
        }

        const Population population = build_population(config.population, config.n, config.m, config.seed);
        const Snapshot& final_snap = trace.snapshots.back();
        const TraceRecord& last = trace.records.back();
        const std::uint64_t window = std::min(config.summary_window, config.steps);

        json resources = json::array();
        for (std::size_t j = 0; j < config.m; ++j) {
            const CapacityMetrics cap = capacity_metrics(trace, j, window);
            const ConsensusSpread spread = consensus_spread(trace, population, final_snap.step, j, config.linear);
            double mean_grad = 0.0;
            for (std::size_t i = 0; i < config.n; ++i) {
                mean_grad += population[i].grad_at(j, final_snap.y[i * config.m + j], config.linear);
            }
            mean_grad /= static_cast<double>(config.n);
            resources.push_back({
                {"index", j},
                {"capacity", config.resources[j].capacity},
                {"omega_final", last.resources[j].omega},
                {"sum_xi_final", last.resources[j].sum_xi},
                {"sum_y_final", last.resources[j].sum_y},
                {"capacity_window", window},
                {"mean_abs_xi_error", cap.mean_abs_xi_error},
                {"final_abs_y_error", cap.final_abs_y_error},
                {"consensus",
                 {{"min", spread.min},
                  {"max", spread.max},
                  {"spread", spread.spread},
                  {"mean", mean_grad},
                  {"relative_spread", mean_grad > 0.0 ? spread.spread / mean_grad : 0.0}}},
                {"clamps", trace.total_clamps(j)},
                {"omega_floor_hits", trace.floor_hits[j]},
                {"omega_ceiling_hits", trace.ceiling_hits[j]},
            });
        }
        summary["steps_completed"] = config.steps;
        summary["resources"] = resources;
        summary["overhead_bits_per_step"] = report_overhead_bits(kBroadcastFloatBits, config.m);

        if (manifest.emit.oracle) {
            json oracle;
            json oracle_file;
            if (config.constant_omega) {
                std::vector<double> omega;
                for (const ResourceSpec& r : config.resources) omega.push_back(r.omega0);
                const Allocation y_star = solve_fixed_point(population, omega, config.linear);
                json per_agent = json::array();
                std::vector<double> max_err(config.m, 0.0);
                for (std::size_t i = 0; i < config.n; ++i) {
                    std::vector<double> row(config.m);
                    for (std::size_t j = 0; j < config.m; ++j) {
                        row[j] = std::abs(final_snap.y[i * config.m + j] - y_star(i, j));
                        max_err[j] = std::max(max_err[j], row[j]);
                    }
                    per_agent.push_back(row);
                }
                oracle = {{"kind", "fixed_point"},
                          {"omega", omega},
                          {"max_abs_error", max_err},
                          {"per_agent_abs_error", per_agent}};
                json rows = json::array();
                for (std::size_t i = 0; i < config.n; ++i) {
                    const auto r = y_star.row(i);
                    rows.push_back(std::vector<double>(r.begin(), r.end()));
                }
                oracle_file = {{"kind", "fixed_point"}, {"omega", omega}, {"y_star", rows}};
            } else {
                std::vector<double> capacities;
                for (const ResourceSpec& r : config.resources) capacities.push_back(r.capacity);
                const Population driven = driven_costs(population, config.linear);
                const OracleSolution sol = solve_social_optimum(driven, capacities);
                std::vector<double> max_err(config.m, 0.0);
                std::vector<double> mean_err(config.m, 0.0);
                for (std::size_t i = 0; i < config.n; ++i) {
                    for (std::size_t j = 0; j < config.m; ++j) {
                        const double e = std::abs(final_snap.y[i * config.m + j] - sol.y_star(i, j));
                        max_err[j] = std::max(max_err[j], e);
                        mean_err[j] += e / static_cast<double>(config.n);
                    }
                }
                double simulated_cost = 0.0;
                for (std::size_t i = 0; i < config.n; ++i) {
                    simulated_cost += driven[i].eval(std::span(final_snap.y).subspan(i * config.m, config.m));
                }
                oracle = {{"kind", "social_optimum"},
                          {"include_linear", config.linear == LinearTerms::Include},
                          {"mu", sol.mu},
                          {"max_abs_error", max_err},
                          {"mean_abs_error", mean_err},
                          {"objective_optimum", sol.objective},
                          {"objective_simulated", simulated_cost}};
                oracle_file = oracle_to_json(sol);
                oracle_file["kind"] = "social_optimum";
            }
            write_json_file(manifest.out_dir / "oracle.json", oracle_file);
            summary["artifacts"]["oracle"] = "oracle.json";
            summary["oracle"] = oracle;
        }
        summary["status"] = "ok";
        result.exit_code = 0;
    } catch (const Error& e) {
        summary["status"] = "failed";
        summary["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
        summary["partial"] = true;
        result.exit_code = 1;
    }

    summary["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json_file(summary_path, summary);
    return result;
}

}  // namespace ualloc
