// SPDX-License-Identifier: Apache-2.0
#include "ualloc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ualloc/error.hpp"

namespace ualloc {

namespace {

constexpr int kMaxBisection = 200;

void check_shapes(const Population& population, std::size_t m) {
    if (population.empty()) {
        throw Error(ErrorCode::InvalidArgument, "oracle: empty population");
    }
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (population[i].resources() != m) {
            throw Error(ErrorCode::DimensionMismatch,
                        "oracle: agent " + std::to_string(i) + " has " + std::to_string(population[i].resources()) +
                            " resources, expected " + std::to_string(m));
        }
    }
}

// Euclidean projection of x onto {sum y = total, 0 <= y <= 1}.
void project_capped_simplex(std::span<const double> x, double total, std::span<double> out) {
    auto mass = [&](double shift) {
        double s = 0.0;
        for (double xi : x) s += std::clamp(xi - shift, 0.0, 1.0);
        return s;
    };
    double lo = *std::min_element(x.begin(), x.end()) - 1.0;  // mass(lo) = n
    double hi = *std::max_element(x.begin(), x.end());        // mass(hi) = 0
    for (int it = 0; it < kMaxBisection; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (mass(mid) > total ? lo : hi) = mid;
    }
    const double shift = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i] - shift, 0.0, 1.0);
}

void fill_diagnostics(const Population& population, std::span<const double> capacities, OracleSolution& sol) {
    const std::size_t n = population.size();
    const std::size_t m = capacities.size();
    sol.lambda.assign(m, 0.0);
    sol.achieved.assign(m, 0.0);
    sol.capacity_residual.assign(m, 0.0);
    sol.consensus_spread.assign(m, 0.0);
    sol.at_lower.assign(n * m, 0);
    sol.at_upper.assign(n * m, 0);
    sol.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sol.objective += population[i].eval(sol.y_star.row(i));
    }
    for (std::size_t j = 0; j < m; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double y = sol.y_star(i, j);
            sol.achieved[j] += y;
            sol.at_lower[i * m + j] = y <= 0.0 ? 1 : 0;
            sol.at_upper[i * m + j] = y >= 1.0 ? 1 : 0;
            if (y > 0.0 && y < 1.0) {
                const double d = population[i].grad_at(j, y, LinearTerms::Include);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
        sol.capacity_residual[j] = sol.achieved[j] - capacities[j];
        sol.consensus_spread[j] = hi >= lo ? hi - lo : 0.0;
    }
}

}  // namespace

double inverse_gradient(const CostFunction& g, std::size_t j, double target, LinearTerms lin) {
    if (target <= g.grad_at(j, 0.0, lin)) return 0.0;
    if (target >= g.grad_at(j, 1.0, lin)) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < kMaxBisection; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (g.grad_at(j, mid, lin) < target ? lo : hi) = mid;
    }
    const double err_lo = std::abs(g.grad_at(j, lo, lin) - target);
    const double err_hi = std::abs(g.grad_at(j, hi, lin) - target);
    return err_lo < err_hi ? lo : hi;
}

Allocation solve_fixed_point(const Population& population, std::span<const double> omega, LinearTerms lin) {
    check_shapes(population, omega.size());
    Allocation y(population.size(), omega.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        const CostFunction& g = population[i];
        for (std::size_t j = 0; j < omega.size(); ++j) {
            const double at_zero = g.grad_at(j, 0.0, lin);
            const double at_one = g.grad_at(j, 1.0, lin);
            if (!(omega[j] > at_zero && omega[j] <= at_one)) {
                throw Error(ErrorCode::NoRoot, "no fixed point for agent " + std::to_string(i) + ", resource " +
                                                   std::to_string(j) + ": omega " + std::to_string(omega[j]) +
                                                   " outside gradient range (" + std::to_string(at_zero) + ", " +
                                                   std::to_string(at_one) + "]");
            }
            y(i, j) = inverse_gradient(g, j, omega[j], lin);
        }
    }
    return y;
}

OracleSolution solve_social_optimum(const Population& population, std::span<const double> capacities,
                                    OptimumMethod method) {
    const std::size_t m = capacities.size();
    check_shapes(population, m);
    const std::size_t n = population.size();
    for (std::size_t j = 0; j < m; ++j) {
        if (!(capacities[j] > 0.0 && capacities[j] <= static_cast<double>(n))) {
            throw Error(ErrorCode::Infeasible, "capacity " + std::to_string(capacities[j]) + " of resource " +
                                                   std::to_string(j) + " outside (0, n]");
        }
    }

    OracleSolution sol;
    sol.method = method;
    sol.y_star = Allocation(n, m);
    sol.mu.assign(m, 0.0);

    if (method == OptimumMethod::DualBisection) {
        for (std::size_t j = 0; j < m; ++j) {
            auto supply = [&](double mu) {
                double s = 0.0;
                for (const CostFunction& g : population) s += inverse_gradient(g, j, mu, LinearTerms::Include);
                return s;
            };
            double lo = std::numeric_limits<double>::infinity();
            double hi = 0.0;
            for (const CostFunction& g : population) {
                lo = std::min(lo, g.grad_at(j, 0.0, LinearTerms::Include));
                hi = std::max(hi, g.grad_at(j, 1.0, LinearTerms::Include));
            }
            double s_lo = supply(lo);
            double s_hi = supply(hi);
            for (int it = 0; it < kMaxBisection; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const double s = supply(mid);
                if (s < s_lo || s > s_hi) {
                    throw Error(ErrorCode::NonMonotone, "aggregate inverse gradient is not monotone in mu");
                }
                if (s < capacities[j]) {
                    lo = mid;
                    s_lo = s;
                } else {
                    hi = mid;
                    s_hi = s;
                }
                ++sol.iterations;
            }
            const double mu = std::abs(s_lo - capacities[j]) < std::abs(s_hi - capacities[j]) ? lo : hi;
            sol.mu[j] = mu;
            for (std::size_t i = 0; i < n; ++i) {
                sol.y_star(i, j) = inverse_gradient(population[i], j, mu, LinearTerms::Include);
            }
        }
    } else {
        constexpr std::size_t kMaxIterations = 500000;
        for (std::size_t j = 0; j < m; ++j) {
            double curvature = 0.0;
            for (const CostFunction& g : population) curvature = std::max(curvature, g.curvature_at(j, 1.0));
            const double step = 1.0 / curvature;
            std::vector<double> y(n, capacities[j] / static_cast<double>(n));
            std::vector<double> x(n);
            std::vector<double> next(n);
            for (std::size_t it = 0; it < kMaxIterations; ++it) {
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] = y[i] - step * population[i].grad_at(j, y[i], LinearTerms::Include);
                }
                project_capped_simplex(x, capacities[j], next);
                double change = 0.0;
                for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - y[i]));
                y.swap(next);
                ++sol.iterations;
                if (change < 1e-15) break;
            }
            double mu_sum = 0.0;
            std::size_t interior = 0;
            for (std::size_t i = 0; i < n; ++i) {
                sol.y_star(i, j) = y[i];
                if (y[i] > 0.0 && y[i] < 1.0) {
                    mu_sum += population[i].grad_at(j, y[i], LinearTerms::Include);
                    ++interior;
                }
            }
            sol.mu[j] = interior > 0 ? mu_sum / static_cast<double>(interior) : 0.0;
        }
    }
    fill_diagnostics(population, capacities, sol);
    return sol;
}

OdeTrajectory integrate_mean_ode(const Population& population, std::span<const double> omega,
                                 const Allocation& y0, double h, double horizon, LinearTerms lin,
                                 std::size_t sample_every, double margin) {
    const std::size_t m = omega.size();
    check_shapes(population, m);
    const std::size_t n = population.size();
    if (y0.n != n || y0.m != m) {
        throw Error(ErrorCode::DimensionMismatch, "integrate_mean_ode: y0 shape does not match population");
    }
    if (!(h > 0.0) || !(horizon >= 0.0) || sample_every < 1) {
        throw Error(ErrorCode::InvalidArgument, "integrate_mean_ode: need h > 0, horizon >= 0, sample_every >= 1");
    }
    for (double v : y0.values) {
        if (!(v > 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "integrate_mean_ode: y0 must lie in (0, 1]");
        }
    }

    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double yij = y[i * m + j];
                dy[i * m + j] = omega[j] * population[i].ratio_at(j, yij, lin) - yij;
            }
        }
    };

    OdeTrajectory traj;
    std::vector<double> y = y0.values;
    std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    auto sample = [&](double t) {
        Allocation a(n, m);
        a.values = y;
        traj.times.push_back(t);
        traj.states.push_back(std::move(a));
    };
    sample(0.0);
    for (std::size_t s = 1; s <= steps; ++s) {
        rhs(y, k1);
        for (std::size_t q = 0; q < y.size(); ++q) tmp[q] = y[q] + 0.5 * h * k1[q];
        rhs(tmp, k2);
        for (std::size_t q = 0; q < y.size(); ++q) tmp[q] = y[q] + 0.5 * h * k2[q];
        rhs(tmp, k3);
        for (std::size_t q = 0; q < y.size(); ++q) tmp[q] = y[q] + h * k3[q];
        rhs(tmp, k4);
        for (std::size_t q = 0; q < y.size(); ++q) {
            y[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            if (!std::isfinite(y[q]) || y[q] < 0.0 || y[q] > 1.0 + margin) {
                throw Error(ErrorCode::Divergence, "mean-field ODE left [0, 1 + margin] at t = " +
                                                       std::to_string(static_cast<double>(s) * h) +
                                                       " (component " + std::to_string(q) + ")");
            }
        }
        if (s % sample_every == 0 || s == steps) sample(static_cast<double>(s) * h);
    }
    return traj;
}

}  // namespace ualloc
