// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ualloc/cost_model.hpp"
#include "ualloc/rng.hpp"

namespace ualloc {

struct AgentStepRecord {
    std::vector<double> sigma;
    /// clamped[j] is set when the raw probability fell outside [0, 1].
    std::vector<std::uint8_t> clamped;
    std::vector<std::uint8_t> xi_next;

    std::size_t clamp_count() const;
};

/// One agent of the unit-demand allocation scheme.
///
/// Starts from xi(0) = 1 and y(0) = 1, so y_j(k) >= 1 / (k + 1) for all k and
/// the response probability is always defined. The cost function is private to
/// the agent; nothing here is reachable from the controller.
class Agent {
public:
    /// `cost` must outlive the agent.
    Agent(std::size_t id, const CostFunction& cost, std::uint64_t master_seed);

    std::size_t id() const noexcept { return id_; }
    std::size_t resources() const noexcept { return y_.size(); }
    std::uint64_t step() const noexcept { return step_; }
    const CostFunction& cost() const noexcept { return *cost_; }

    std::span<const std::uint8_t> xi() const noexcept { return xi_; }
    std::span<const double> y() const noexcept { return y_; }
    /// Exact count of ones drawn so far on each resource, xi(0) included.
    std::span<const std::uint64_t> ones() const noexcept { return ones_; }

    /// sigma_j = clamp(omega_j * y_j / grad_j g(y), 0, 1). Fills sigma and
    /// clamped; xi_next is left empty.
    AgentStepRecord compute_sigma(std::span<const double> omega, LinearTerms lin) const;

    /// One independent Bernoulli(sigma_j) per resource from the private
    /// stream; always consumes exactly resources() variates.
    std::vector<std::uint8_t> draw(std::span<const double> sigma);

    /// Same, with an externally supplied uniform source on [0, 1).
    template <class UniformSource>
    std::vector<std::uint8_t> draw_with(std::span<const double> sigma, UniformSource&& uniform) const {
        std::vector<std::uint8_t> out(sigma.size());
        for (std::size_t j = 0; j < sigma.size(); ++j) {
            out[j] = uniform() < sigma[j] ? 1 : 0;
        }
        return out;
    }

    /// y(k+1) = ((k+1)/(k+2)) y(k) + xi(k+1)/(k+2); advances step to k+1.
    void update_average(std::span<const std::uint8_t> xi_next);

    /// compute_sigma, draw and update_average in sequence.
    AgentStepRecord advance(std::span<const double> omega, LinearTerms lin);

private:
    std::size_t id_;
    const CostFunction* cost_;
    std::vector<std::uint8_t> xi_;
    std::vector<double> y_;
    std::vector<std::uint64_t> ones_;
    std::uint64_t step_ = 0;
    RandomStream rng_;
};

}  // namespace ualloc
