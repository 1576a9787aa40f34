// SPDX-License-Identifier: Apache-2.0
#include "ualloc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ualloc/error.hpp"

namespace ualloc {

void ResourceSpec::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::Config, what); };
    if (!(std::isfinite(capacity) && capacity > 0.0)) fail("capacity must be positive");
    if (!(std::isfinite(tau) && tau > 0.0)) fail("tau must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
    if (!(omega_min >= 0.0)) fail("omega_min must be nonnegative");
    if (!(omega_max >= omega_min)) fail("omega_max must be >= omega_min");
    if (!(omega0 >= omega_min && omega0 <= omega_max)) fail("omega0 must lie in [omega_min, omega_max]");
}

ControllerState ControllerState::initial(std::span<const ResourceSpec> specs) {
    ControllerState state;
    state.omega.reserve(specs.size());
    for (const ResourceSpec& spec : specs) {
        spec.validate();
        state.omega.push_back(spec.omega0);
    }
    state.floor_hits.assign(specs.size(), 0);
    state.ceiling_hits.assign(specs.size(), 0);
    return state;
}

ControllerState update_omega(const ControllerState& state, std::span<const ResourceSpec> specs,
                             std::span<const std::uint64_t> totals) {
    if (specs.size() != state.omega.size() || totals.size() != state.omega.size()) {
        throw Error(ErrorCode::DimensionMismatch, "update_omega: resource count mismatch");
    }
    ControllerState next = state;
    for (std::size_t j = 0; j < specs.size(); ++j) {
        const ResourceSpec& spec = specs[j];
        const double error = static_cast<double>(totals[j]) - spec.gamma * spec.capacity;
        const double raw = state.omega[j] - spec.tau * error;
        if (raw < spec.omega_min) {
            next.omega[j] = spec.omega_min;
            ++next.floor_hits[j];
        } else if (raw > spec.omega_max) {
            next.omega[j] = spec.omega_max;
            ++next.ceiling_hits[j];
        } else {
            next.omega[j] = raw;
        }
    }
    ++next.step;
    return next;
}

TauBound estimate_tau_bound(const Population& population, std::size_t j, std::size_t grid_points,
                            LinearTerms lin, double epsilon) {
    if (population.empty()) {
        throw Error(ErrorCode::InvalidArgument, "estimate_tau_bound: empty population");
    }
    if (grid_points < 2 || !(epsilon > 0.0 && epsilon < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "estimate_tau_bound: bad grid");
    }
    TauBound result;
    for (const CostFunction& g : population) {
        double best = 0.0;
        for (std::size_t k = 0; k < grid_points; ++k) {
            const double z =
                epsilon + (1.0 - epsilon) * static_cast<double>(k) / static_cast<double>(grid_points - 1);
            best = std::max(best, g.ratio_at(j, z, lin));
        }
        result.max_sum_ratio += best;
        if (zero_limit(g, j, lin) == ZeroLimit::Divergent) {
            ++result.divergent_agents;
        }
    }
    result.divergent = result.divergent_agents > 0;
    result.bound = 1.0 / result.max_sum_ratio;
    return result;
}

std::uint64_t report_overhead_bits(std::uint64_t mu_bits_per_float, std::uint64_t m) {
    if (mu_bits_per_float < 1) {
        throw Error(ErrorCode::InvalidArgument, "report_overhead_bits: mu must be >= 1");
    }
    return mu_bits_per_float * m;
}

}  // namespace ualloc
