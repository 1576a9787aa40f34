// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth solvers that do not touch the stochastic simulation:
// the per-agent fixed point grad_j g_i(y) = Omega_j, the social optimum
//
//     min sum_i g_i(y_i)  s.t.  sum_i y_i^j = C^j,  0 <= y_i^j <= 1,
//
// and the mean-field flow dy/dt = Omega v(y) - y.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ualloc/cost_model.hpp"

namespace ualloc {

/// Row-major n x m matrix of allocations.
struct Allocation {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> values;

    Allocation() = default;
    Allocation(std::size_t rows, std::size_t cols, double fill = 0.0)
        : n(rows), m(cols), values(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * m + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * m + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * m, m}; }
};

/// Smallest y in [0, 1] with grad_j g(y) >= target, by bisection to machine
/// precision. Clips to 0 / 1 when target lies outside the gradient range.
double inverse_gradient(const CostFunction& g, std::size_t j, double target, LinearTerms lin);

/// y*_ij solving grad_j g_i(y) = Omega_j on (0, 1]. Throws Error(NoRoot) when
/// Omega_j lies outside [grad at 0+, grad at 1].
Allocation solve_fixed_point(const Population& population, std::span<const double> omega, LinearTerms lin);

enum class OptimumMethod { DualBisection, ProjectedGradient };

struct OracleSolution {
    Allocation y_star;
    /// Capacity multipliers; the common value of grad_j g_i over interior agents.
    std::vector<double> mu;
    /// Nonnegativity multipliers, reported as zero (interior solutions).
    std::vector<double> lambda;
    std::vector<double> achieved;
    std::vector<double> capacity_residual;
    /// max_i - min_i of grad_j g_i(y*_i) over agents strictly inside (0, 1).
    std::vector<double> consensus_spread;
    /// Active-set flags per (i, j): y* pinned at 0 or at 1.
    std::vector<std::uint8_t> at_lower;
    std::vector<std::uint8_t> at_upper;
    double objective = 0.0;
    std::size_t iterations = 0;
    OptimumMethod method = OptimumMethod::DualBisection;
};

/// Uses the full gradient (linear terms included): this is the social cost
/// itself. Throws Error(Infeasible) unless 0 < C_j <= n.
OracleSolution solve_social_optimum(const Population& population, std::span<const double> capacities,
                                    OptimumMethod method = OptimumMethod::DualBisection);

struct OdeTrajectory {
    std::vector<double> times;
    /// states[s] is an n x m allocation at times[s]
    std::vector<Allocation> states;

    const Allocation& final_state() const { return states.back(); }
};

/// Classic fixed-step RK4 on the decoupled equations
/// dy_ij/dt = Omega_j v_i(y_ij) - y_ij. Samples every `sample_every` steps
/// (and the endpoint). Throws Error(Divergence) if a state leaves
/// [0, 1 + margin].
OdeTrajectory integrate_mean_ode(const Population& population, std::span<const double> omega,
                                 const Allocation& y0, double h, double horizon, LinearTerms lin,
                                 std::size_t sample_every = 1, double margin = 0.5);

}  // namespace ualloc
