// SPDX-License-Identifier: Apache-2.0
//
// Control unit: one integral controller per resource on the normalization
// factor Omega_j, driven only by the aggregate utilization sum_i xi_i^j(k).
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ualloc/cost_model.hpp"

namespace ualloc {

struct ResourceSpec {
    double capacity = 1.0;
    double tau = 1e-3;
    /// Damping in (0, 1]; the controller targets gamma * capacity.
    double gamma = 1.0;
    double omega0 = 0.35;
    double omega_min = 0.0;
    double omega_max = 1e3;

    /// Throws Error(Config) naming the first violated invariant.
    void validate() const;

    friend bool operator==(const ResourceSpec&, const ResourceSpec&) = default;
};

struct ControllerState {
    std::vector<double> omega;
    std::uint64_t step = 0;
    /// Number of updates that hit omega_min / omega_max, per resource.
    std::vector<std::uint64_t> floor_hits;
    std::vector<std::uint64_t> ceiling_hits;

    static ControllerState initial(std::span<const ResourceSpec> specs);

    std::uint64_t saturations(std::size_t j) const { return floor_hits[j] + ceiling_hits[j]; }
};

/// Omega_j(k+1) = clamp(Omega_j(k) - tau_j (total_j - gamma_j C_j), omega_min, omega_max).
ControllerState update_omega(const ControllerState& state, std::span<const ResourceSpec> specs,
                             std::span<const std::uint64_t> totals);

struct TauBound {
    /// 1 / max over the grid of sum_i y / grad_j g_i(y). Upper bound for tau_j.
    double bound = 0.0;
    double max_sum_ratio = 0.0;
    /// Some agent's ratio diverges as y -> 0; the bound only covers [epsilon, 1].
    bool divergent = false;
    std::size_t divergent_agents = 0;
};

/// Separability reduces the scan to a 1-D maximisation per agent, so the
/// maximum of the sum is the sum of per-agent maxima.
TauBound estimate_tau_bound(const Population& population, std::size_t j, std::size_t grid_points,
                            LinearTerms lin, double epsilon = kDefaultGridEpsilon);

/// Broadcast cost: mu bits per float times m resources, per time step.
std::uint64_t report_overhead_bits(std::uint64_t mu_bits_per_float, std::uint64_t m);

}  // namespace ualloc
