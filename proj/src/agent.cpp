// SPDX-License-Identifier: Apache-2.0
#include "ualloc/agent.hpp"

#include <algorithm>
#include <string>

#include "ualloc/error.hpp"

namespace ualloc {

std::size_t AgentStepRecord::clamp_count() const {
    return static_cast<std::size_t>(std::count(clamped.begin(), clamped.end(), std::uint8_t{1}));
}

Agent::Agent(std::size_t id, const CostFunction& cost, std::uint64_t master_seed)
    : id_(id),
      cost_(&cost),
      xi_(cost.resources(), 1),
      y_(cost.resources(), 1.0),
      ones_(cost.resources(), 1),
      rng_(master_seed, id) {}

AgentStepRecord Agent::compute_sigma(std::span<const double> omega, LinearTerms lin) const {
    if (omega.size() != resources()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "agent " + std::to_string(id_) + ": omega has " + std::to_string(omega.size()) +
                        " entries, expected " + std::to_string(resources()));
    }
    AgentStepRecord rec;
    rec.sigma.resize(resources());
    rec.clamped.resize(resources());
    for (std::size_t j = 0; j < resources(); ++j) {
        const double raw = omega[j] * cost_->ratio_at(j, y_[j], lin);
        rec.sigma[j] = std::clamp(raw, 0.0, 1.0);
        rec.clamped[j] = (raw < 0.0 || raw > 1.0) ? 1 : 0;
    }
    return rec;
}

std::vector<std::uint8_t> Agent::draw(std::span<const double> sigma) {
    return draw_with(sigma, [this] { return rng_.uniform(); });
}

void Agent::update_average(std::span<const std::uint8_t> xi_next) {
    if (xi_next.size() != resources()) {
        throw Error(ErrorCode::DimensionMismatch, "update_average: dimension mismatch");
    }
    const double keep = static_cast<double>(step_ + 1) / static_cast<double>(step_ + 2);
    const double gain = 1.0 / static_cast<double>(step_ + 2);
    for (std::size_t j = 0; j < resources(); ++j) {
        y_[j] = keep * y_[j] + gain * static_cast<double>(xi_next[j]);
        xi_[j] = xi_next[j];
        ones_[j] += xi_next[j];
    }
    ++step_;
}

AgentStepRecord Agent::advance(std::span<const double> omega, LinearTerms lin) {
    AgentStepRecord rec = compute_sigma(omega, lin);
    rec.xi_next = draw(rec.sigma);
    update_average(rec.xi_next);
    return rec;
}

}  // namespace ualloc
