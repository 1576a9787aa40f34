// SPDX-License-Identifier: Apache-2.0
//
// The coupled feedback loops: the control unit broadcasts Omega(k), every
// agent draws xi(k+1) from (Omega(k), y(k)), and the control unit turns the
// aggregate sum_i xi_i(k) into Omega(k+1).
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ualloc/agent.hpp"
#include "ualloc/controller.hpp"
#include "ualloc/cost_model.hpp"

namespace ualloc {

enum class PopulationKind {
    Explicit,   // costs listed one by one
    Ev,         // four EV charging classes
    Quadratic,  // g_i(y) = c_i y^2, c_i evenly spaced over [coeff_min, coeff_max]
};

struct PopulationSpec {
    PopulationKind kind = PopulationKind::Explicit;
    Population costs;
    std::array<std::size_t, 4> class_sizes{};
    /// Seed of the EV factor draws; the master seed when unset.
    std::optional<std::uint64_t> seed;
    double coeff_min = 1.0;
    double coeff_max = 3.0;
};

Population build_population(const PopulationSpec& spec, std::size_t n, std::size_t m,
                            std::uint64_t master_seed);

struct SimConfig {
    std::size_t n = 1;
    std::size_t m = 1;
    std::uint64_t steps = 1;
    std::uint64_t seed = 0;
    std::vector<ResourceSpec> resources;
    PopulationSpec population;
    LinearTerms linear = LinearTerms::Include;
    /// Freeze Omega at omega0 (fixed-point experiments).
    bool constant_omega = false;
    /// Per-agent y snapshots every S steps; 0 keeps only the final step.
    std::uint64_t snapshot_every = 10;
    std::uint64_t summary_window = 60;
    unsigned threads = 1;

    /// Throws Error(Config) listing every violated invariant.
    void validate() const;
};

struct ResourceObservables {
    double omega = 0.0;
    std::uint64_t sum_xi = 0;
    double sum_y = 0.0;
    double grad_min = 0.0;
    double grad_max = 0.0;
    /// Clamped probabilities in the transition that produced xi(k).
    std::uint64_t clamps = 0;

    double spread() const { return grad_max - grad_min; }
};

struct TraceRecord {
    std::uint64_t step = 0;
    std::vector<ResourceObservables> resources;
};

struct Snapshot {
    std::uint64_t step = 0;
    /// y[i * m + j]
    std::vector<double> y;
};

struct Trace {
    std::size_t n = 0;
    std::size_t m = 0;
    LinearTerms linear = LinearTerms::Include;
    std::vector<double> capacities;
    /// records[k] describes step k, for k = 0..steps.
    std::vector<TraceRecord> records;
    std::vector<Snapshot> snapshots;
    std::vector<std::uint64_t> floor_hits;
    std::vector<std::uint64_t> ceiling_hits;

    const Snapshot* snapshot_at(std::uint64_t step) const;
    std::uint64_t total_clamps(std::size_t j) const;
};

/// Step-by-step driver behind run().
class Simulation {
public:
    explicit Simulation(SimConfig config);

    const SimConfig& config() const noexcept { return config_; }
    const Population& population() const noexcept { return *population_; }
    const std::vector<Agent>& agents() const noexcept { return agents_; }
    const ControllerState& controller() const noexcept { return controller_; }

    std::uint64_t step() const noexcept { return step_; }
    std::span<const double> omega() const noexcept { return controller_.omega; }
    std::span<const std::uint64_t> totals() const noexcept { return totals_; }
    std::span<const double> sum_y() const noexcept { return sum_y_; }

    /// Observables of the current step.
    TraceRecord observe() const;
    Snapshot snapshot() const;

    /// k -> k + 1.
    void advance();

    /// Replaces the broadcast Omega(k) of the current step.
    void override_omega(std::span<const double> omega);

private:
    void aggregate();

    SimConfig config_;
    std::shared_ptr<const Population> population_;
    std::vector<Agent> agents_;
    ControllerState controller_;
    std::vector<std::uint64_t> totals_;
    std::vector<double> sum_y_;
    std::vector<std::uint64_t> last_clamps_;
    std::uint64_t step_ = 0;
};

/// Runs config.steps transitions; bitwise deterministic under config.seed for
/// any thread count.
Trace run(const SimConfig& config);

struct ConsensusSpread {
    double min = 0.0;
    double max = 0.0;
    double spread = 0.0;
};

/// Min / max over agents of grad_j g_i(y_i(k)); needs a snapshot at step k.
ConsensusSpread consensus_spread(const Trace& trace, const Population& population, std::uint64_t step,
                                 std::size_t j, LinearTerms lin);

struct CapacityMetrics {
    /// mean |sum_i xi_i^j - C^j| over the last `window` steps
    double mean_abs_xi_error = 0.0;
    /// |sum_i y_i^j - C^j| at the final step
    double final_abs_y_error = 0.0;
};

CapacityMetrics capacity_metrics(const Trace& trace, std::size_t j, std::uint64_t window);

struct MartingaleResidual {
    std::size_t agent = 0;
    std::size_t resource = 0;
    double sigma = 0.0;
    double mean_residual = 0.0;
    double z = 0.0;
    /// sigma in {0, 1}: zero variance, no z-score.
    bool skipped = false;
};

struct MartingaleReport {
    std::uint64_t replicas = 0;
    std::vector<MartingaleResidual> entries;

    std::size_t tested() const;
    /// Fraction of non-skipped pairs with |z| <= bound.
    double fraction_within(double bound) const;
};

using UniformSource = std::function<double()>;

/// Runs `config` for config.steps steps, freezes the state, and draws the next
/// xi R times from it. Each agent uses its own stream unless `uniform` is set.
MartingaleReport martingale_residual_test(const SimConfig& config, std::uint64_t replicas,
                                          const UniformSource& uniform = {});

}  // namespace ualloc
