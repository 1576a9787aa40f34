// SPDX-License-Identifier: Apache-2.0
//
// Agent cost functions: convex, increasing polynomials that are separable
// across resources,
//
//     g(y) = sum_j linear_j * y_j + sum_t coeff_t * y_{r_t} ^ exp_t,
//
// with every exponent >= 2. Also hosts the admissibility checker and the
// EV-charging cost population.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ualloc {

/// Whether partial derivatives include the linear coefficient. The EV preset
/// drops it: it shifts every agent's derivative by the same constant, which
/// leaves the consensus point unchanged.
enum class LinearTerms { Include, Exclude };

struct Monomial {
    std::size_t resource = 0;  // 0-based
    double coeff = 0.0;
    double exponent = 2.0;

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

class CostFunction {
public:
    /// Throws Error(InvalidArgument) unless every coefficient is nonnegative,
    /// every monomial has positive coeff and exponent >= 2, and each resource
    /// carries at least one monomial.
    CostFunction(std::vector<double> linear, std::vector<Monomial> monomials);

    std::size_t resources() const noexcept { return linear_.size(); }
    std::span<const double> linear() const noexcept { return linear_; }
    std::span<const Monomial> monomials() const noexcept { return monomials_; }

    double eval(std::span<const double> y) const;

    /// Partial derivative with respect to resource j at y.
    double grad(std::span<const double> y, std::size_t j, LinearTerms lin) const;

    /// Separable form of grad: the j-th partial depends on y_j only.
    double grad_at(std::size_t j, double yj, LinearTerms lin) const;

    /// Second derivative along resource j.
    double curvature_at(std::size_t j, double yj) const;

    /// y_j / grad_j. Returns 0 when y_j == 0 and grad > 0; throws
    /// Error(IndeterminateRatio) when both vanish.
    double ratio(std::span<const double> y, std::size_t j, LinearTerms lin) const;
    double ratio_at(std::size_t j, double yj, LinearTerms lin) const;

    /// Smallest exponent among the monomials on resource j.
    double min_exponent(std::size_t j) const;

    friend bool operator==(const CostFunction&, const CostFunction&) = default;

private:
    std::vector<double> linear_;
    std::vector<Monomial> monomials_;
    // monomial indices grouped by resource
    std::vector<std::vector<std::size_t>> by_resource_;
};

using Population = std::vector<CostFunction>;

/// Free function forms of the CostFunction members.
double eval(const CostFunction& g, std::span<const double> y);
double grad(const CostFunction& g, std::span<const double> y, std::size_t j, LinearTerms lin);
double v(const CostFunction& g, std::span<const double> y, std::size_t j, LinearTerms lin);

// ---------------------------------------------------------------------------
// Admissibility

/// Behaviour of v(z) = z / g'(z) as z -> 0+.
enum class ZeroLimit { Zero, Finite, Divergent };

const char* to_string(ZeroLimit limit);

ZeroLimit zero_limit(const CostFunction& g, std::size_t j, LinearTerms lin);

struct AdmissibilityEntry {
    double min_sigma = 0.0;
    double max_sigma = 0.0;
    ZeroLimit limit_at_zero = ZeroLimit::Finite;
    bool pass = false;
};

struct AdmissibilityReport {
    std::size_t agents = 0;
    std::size_t resources = 0;
    std::size_t grid_points = 0;
    double epsilon = 0.0;
    /// entries[i * resources + j]
    std::vector<AdmissibilityEntry> entries;
    /// Global min / max of Omega_j * v_i over the grid; a <= b.
    double a = 0.0;
    double b = 0.0;
    bool pass = false;

    const AdmissibilityEntry& at(std::size_t agent, std::size_t j) const {
        return entries[agent * resources + j];
    }
};

inline constexpr double kDefaultGridEpsilon = 1e-3;

/// Samples sigma = Omega_j * v_i(z) on the grid [epsilon, 1] for every agent
/// and resource. Separability makes a 1-D scan per (agent, resource) exact.
/// pass holds iff every sampled value lies strictly inside (0, 1).
AdmissibilityReport check_admissible(const Population& population, std::span<const double> omega,
                                     std::size_t grid_points, LinearTerms lin,
                                     double epsilon = kDefaultGridEpsilon);

// ---------------------------------------------------------------------------
// EV charging population

inline constexpr double kEvLevel1Rate = 2.9;   // a
inline constexpr double kEvLevel2Rate = 8.51;  // b

enum class EvClass { I = 0, II = 1, III = 2, IV = 3 };

struct EvProfile {
    EvClass cls = EvClass::I;
    double f1 = 1.0;  // uniform on [1, 1.5]
    double f2 = 1.0;  // uniform on [1, 2]
};

/// The four two-resource cost classes of the EV charging example.
CostFunction ev_cost(const EvProfile& profile);

/// Class assignment is contiguous by agent id; f factors are drawn per agent
/// from a stream keyed by seed.
std::vector<EvProfile> draw_ev_profiles(std::size_t n, std::uint64_t seed,
                                        const std::array<std::size_t, 4>& class_sizes);

Population make_ev_population(std::size_t n, std::uint64_t seed,
                              const std::array<std::size_t, 4>& class_sizes);

/// Emission of one charging session in kg: power * hours * rate.
double co2_of_session(double power_kw, double hours, double emission_rate);

inline constexpr double kEuEmissionRate = 0.443;  // kg CO2 per kWh

}  // namespace ualloc
