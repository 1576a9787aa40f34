// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: presets, config files, and the artifacts written by a
// run (trace CSV, per-agent snapshot CSV, summary JSON, oracle JSON).
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ualloc/engine.hpp"

namespace ualloc {

inline constexpr std::string_view kPresetEv = "ev-charging";
inline constexpr std::string_view kPresetTheorem2 = "single-resource-theorem2";
inline constexpr std::string_view kPresetCustom = "custom";

std::vector<std::string> preset_names();

/// Built-in configurations. "custom" has no built-in form and is rejected here.
SimConfig preset_config(std::string_view name);

/// Parses and validates a JSON config file. Parse errors carry line and
/// column; validation errors list every violated invariant.
SimConfig load_config(const std::filesystem::path& path);
SimConfig parse_config(std::string_view text, std::string_view source = "<string>");

struct EmitFlags {
    bool trace = true;
    bool snapshots = false;
    bool oracle = false;
};

struct RunManifest {
    SimConfig config;
    /// preset name or config path, echoed in the summary
    std::string source;
    std::filesystem::path out_dir;
    EmitFlags emit;
};

struct ExperimentResult {
    int exit_code = 0;
    nlohmann::json summary;
};

/// Runs the simulation and writes artifacts into manifest.out_dir. Fatal engine
/// or oracle errors give a nonzero exit code and a summary with status
/// "failed"; whatever was written before the failure is listed there.
ExperimentResult run_experiment(const RunManifest& manifest);

/// 17 significant digits, '.' decimal point, independent of locale.
std::string format_double(double value);

/// Columns: k, then per resource j: omega_j, sum_xi_j, sum_y_j, grad_min_j,
/// grad_max_j, clamps_j.
void write_trace_csv(std::ostream& out, const Trace& trace);
/// Columns: k, agent, y_0 .. y_{m-1}.
void write_snapshots_csv(std::ostream& out, const Trace& trace);

}  // namespace ualloc
