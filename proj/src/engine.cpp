// SPDX-License-Identifier: Apache-2.0
#include "ualloc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "ualloc/error.hpp"

namespace ualloc {

Population build_population(const PopulationSpec& spec, std::size_t n, std::size_t m,
                            std::uint64_t master_seed) {
    switch (spec.kind) {
        case PopulationKind::Explicit:
            return spec.costs;
        case PopulationKind::Ev:
            if (m != 2) {
                throw Error(ErrorCode::Config, "EV population needs m = 2");
            }
            return make_ev_population(n, spec.seed.value_or(master_seed), spec.class_sizes);
        case PopulationKind::Quadratic: {
            Population population;
            population.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
                const double c = spec.coeff_min + (spec.coeff_max - spec.coeff_min) * t;
                std::vector<Monomial> monomials;
                for (std::size_t j = 0; j < m; ++j) {
                    monomials.push_back({j, c, 2.0});
                }
                population.emplace_back(std::vector<double>(m, 0.0), std::move(monomials));
            }
            return population;
        }
    }
    throw Error(ErrorCode::Config, "unknown population kind");
}

void SimConfig::validate() const {
    std::vector<std::string> problems;
    if (n < 1) problems.emplace_back("n must be >= 1");
    if (m < 1) problems.emplace_back("m must be >= 1");
    if (steps < 1) problems.emplace_back("steps must be >= 1");
    if (threads < 1) problems.emplace_back("threads must be >= 1");
    if (summary_window < 1) problems.emplace_back("summary_window must be >= 1");
    if (resources.size() != m) {
        problems.push_back("resources has " + std::to_string(resources.size()) + " entries but m = " +
                           std::to_string(m));
    }
    for (std::size_t j = 0; j < resources.size(); ++j) {
        try {
            resources[j].validate();
        } catch (const Error& e) {
            problems.push_back("resources[" + std::to_string(j) + "]: " + e.what());
        }
    }
    switch (population.kind) {
        case PopulationKind::Explicit:
            if (population.costs.size() != n) {
                problems.push_back("population lists " + std::to_string(population.costs.size()) +
                                   " costs but n = " + std::to_string(n));
            }
            for (std::size_t i = 0; i < population.costs.size(); ++i) {
                if (population.costs[i].resources() != m) {
                    problems.push_back("population cost " + std::to_string(i) + " has " +
                                       std::to_string(population.costs[i].resources()) + " resources, expected " +
                                       std::to_string(m));
                }
            }
            break;
        case PopulationKind::Ev: {
            if (m != 2) problems.emplace_back("EV population needs m = 2");
            const auto& sizes = population.class_sizes;
            if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) != n) {
                problems.emplace_back("EV class_sizes must sum to n");
            }
            break;
        }
        case PopulationKind::Quadratic:
            if (!(population.coeff_min > 0.0 && population.coeff_max >= population.coeff_min)) {
                problems.emplace_back("quadratic population needs 0 < coeff_min <= coeff_max");
            }
            break;
    }
    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) {
            msg += "\n  - " + p;
        }
        throw Error(ErrorCode::Config, msg);
    }
}

// ---------------------------------------------------------------------------

const Snapshot* Trace::snapshot_at(std::uint64_t step) const {
    auto it = std::lower_bound(snapshots.begin(), snapshots.end(), step,
                               [](const Snapshot& s, std::uint64_t k) { return s.step < k; });
    return (it != snapshots.end() && it->step == step) ? &*it : nullptr;
}

std::uint64_t Trace::total_clamps(std::size_t j) const {
    std::uint64_t total = 0;
    for (const TraceRecord& rec : records) {
        total += rec.resources[j].clamps;
    }
    return total;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(SimConfig config) : config_(std::move(config)) {
    config_.validate();
    population_ = std::make_shared<const Population>(
        build_population(config_.population, config_.n, config_.m, config_.seed));
    agents_.reserve(config_.n);
    for (std::size_t i = 0; i < config_.n; ++i) {
        agents_.emplace_back(i, (*population_)[i], config_.seed);
    }
    controller_ = ControllerState::initial(config_.resources);
    last_clamps_.assign(config_.m, 0);
    aggregate();
}

void Simulation::aggregate() {
    totals_.assign(config_.m, 0);
    sum_y_.assign(config_.m, 0.0);
    // fixed id order keeps floating-point sums reproducible
    for (const Agent& agent : agents_) {
        for (std::size_t j = 0; j < config_.m; ++j) {
            totals_[j] += agent.xi()[j];
            sum_y_[j] += agent.y()[j];
        }
    }
}

TraceRecord Simulation::observe() const {
    TraceRecord rec;
    rec.step = step_;
    rec.resources.resize(config_.m);
    for (std::size_t j = 0; j < config_.m; ++j) {
        ResourceObservables& obs = rec.resources[j];
        obs.omega = controller_.omega[j];
        obs.sum_xi = totals_[j];
        obs.sum_y = sum_y_[j];
        obs.clamps = last_clamps_[j];
        obs.grad_min = std::numeric_limits<double>::infinity();
        obs.grad_max = -std::numeric_limits<double>::infinity();
        for (const Agent& agent : agents_) {
            const double d = agent.cost().grad_at(j, agent.y()[j], config_.linear);
            obs.grad_min = std::min(obs.grad_min, d);
            obs.grad_max = std::max(obs.grad_max, d);
        }
    }
    return rec;
}

Snapshot Simulation::snapshot() const {
    Snapshot snap;
    snap.step = step_;
    snap.y.reserve(config_.n * config_.m);
    for (const Agent& agent : agents_) {
        snap.y.insert(snap.y.end(), agent.y().begin(), agent.y().end());
    }
    return snap;
}

void Simulation::override_omega(std::span<const double> omega) {
    if (omega.size() != config_.m) {
        throw Error(ErrorCode::DimensionMismatch, "override_omega: dimension mismatch");
    }
    controller_.omega.assign(omega.begin(), omega.end());
}

void Simulation::advance() {
    // Omega(k+1) from xi(k); the agents still respond to Omega(k).
    ControllerState next =
        config_.constant_omega ? controller_ : update_omega(controller_, config_.resources, totals_);
    const std::span<const double> broadcast = controller_.omega;

    const std::size_t n = agents_.size();
    const std::size_t workers = std::min<std::size_t>(config_.threads, n);
    std::vector<std::vector<std::uint64_t>> clamps(workers, std::vector<std::uint64_t>(config_.m, 0));

    auto work = [&](std::size_t w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        for (std::size_t i = begin; i < end; ++i) {
            const AgentStepRecord rec = agents_[i].advance(broadcast, config_.linear);
            for (std::size_t j = 0; j < config_.m; ++j) {
                clamps[w][j] += rec.clamped[j];
            }
        }
    };

    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        work(w);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    last_clamps_.assign(config_.m, 0);
    for (const auto& per_worker : clamps) {
        for (std::size_t j = 0; j < config_.m; ++j) {
            last_clamps_[j] += per_worker[j];
        }
    }
    controller_ = std::move(next);
    ++step_;
    aggregate();
}

Trace run(const SimConfig& config) {
    Simulation sim(config);
    Trace trace;
    trace.n = config.n;
    trace.m = config.m;
    trace.linear = config.linear;
    for (const ResourceSpec& r : config.resources) {
        trace.capacities.push_back(r.capacity);
    }
    trace.records.reserve(config.steps + 1);

    auto wants_snapshot = [&](std::uint64_t k) {
        return k == config.steps || (config.snapshot_every > 0 && k % config.snapshot_every == 0);
    };

    trace.records.push_back(sim.observe());
    if (wants_snapshot(0)) trace.snapshots.push_back(sim.snapshot());
    for (std::uint64_t k = 0; k < config.steps; ++k) {
        sim.advance();
        trace.records.push_back(sim.observe());
        if (wants_snapshot(sim.step())) trace.snapshots.push_back(sim.snapshot());
    }
    trace.floor_hits = sim.controller().floor_hits;
    trace.ceiling_hits = sim.controller().ceiling_hits;
    return trace;
}

ConsensusSpread consensus_spread(const Trace& trace, const Population& population, std::uint64_t step,
                                 std::size_t j, LinearTerms lin) {
    const Snapshot* snap = trace.snapshot_at(step);
    if (snap == nullptr) {
        throw Error(ErrorCode::InvalidArgument, "no per-agent snapshot at step " + std::to_string(step));
    }
    if (j >= trace.m || population.size() != trace.n) {
        throw Error(ErrorCode::DimensionMismatch, "consensus_spread: population does not match trace");
    }
    ConsensusSpread out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < trace.n; ++i) {
        const double d = population[i].grad_at(j, snap->y[i * trace.m + j], lin);
        out.min = std::min(out.min, d);
        out.max = std::max(out.max, d);
    }
    out.spread = out.max - out.min;
    return out;
}

CapacityMetrics capacity_metrics(const Trace& trace, std::size_t j, std::uint64_t window) {
    if (j >= trace.m) {
        throw Error(ErrorCode::InvalidArgument, "capacity_metrics: resource out of range");
    }
    if (window < 1 || window > trace.records.size() - 1) {
        throw Error(ErrorCode::InvalidArgument, "capacity_metrics: window must lie in [1, steps]");
    }
    const double capacity = trace.capacities[j];
    CapacityMetrics out;
    const std::size_t first = trace.records.size() - window;
    for (std::size_t k = first; k < trace.records.size(); ++k) {
        out.mean_abs_xi_error += std::abs(static_cast<double>(trace.records[k].resources[j].sum_xi) - capacity);
    }
    out.mean_abs_xi_error /= static_cast<double>(window);
    out.final_abs_y_error = std::abs(trace.records.back().resources[j].sum_y - capacity);
    return out;
}

std::size_t MartingaleReport::tested() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const MartingaleResidual& e) { return !e.skipped; }));
}

double MartingaleReport::fraction_within(double bound) const {
    const std::size_t total = tested();
    if (total == 0) return 0.0;
    const auto ok = std::count_if(entries.begin(), entries.end(), [&](const MartingaleResidual& e) {
        return !e.skipped && std::abs(e.z) <= bound;
    });
    return static_cast<double>(ok) / static_cast<double>(total);
}

MartingaleReport martingale_residual_test(const SimConfig& config, std::uint64_t replicas,
                                          const UniformSource& uniform) {
    if (replicas < 100) {
        throw Error(ErrorCode::InvalidArgument, "martingale_residual_test needs at least 100 replicas");
    }
    Simulation sim(config);
    for (std::uint64_t k = 0; k < config.steps; ++k) {
        sim.advance();
    }

    MartingaleReport report;
    report.replicas = replicas;
    const double r = static_cast<double>(replicas);
    for (const Agent& frozen : sim.agents()) {
        const AgentStepRecord rec = frozen.compute_sigma(sim.omega(), config.linear);
        Agent replica = frozen;
        std::vector<std::uint64_t> hits(config.m, 0);
        for (std::uint64_t t = 0; t < replicas; ++t) {
            const auto xi = uniform ? replica.draw_with(rec.sigma, uniform) : replica.draw(rec.sigma);
            for (std::size_t j = 0; j < config.m; ++j) hits[j] += xi[j];
        }
        for (std::size_t j = 0; j < config.m; ++j) {
            MartingaleResidual e;
            e.agent = frozen.id();
            e.resource = j;
            e.sigma = rec.sigma[j];
            e.mean_residual = static_cast<double>(hits[j]) / r - e.sigma;
            e.skipped = e.sigma <= 0.0 || e.sigma >= 1.0;
            if (!e.skipped) {
                e.z = e.mean_residual / std::sqrt(e.sigma * (1.0 - e.sigma) / r);
            }
            report.entries.push_back(e);
        }
    }
    return report;
}

}  // namespace ualloc
