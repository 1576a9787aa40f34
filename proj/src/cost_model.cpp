// SPDX-License-Identifier: Apache-2.0
#include "ualloc/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ualloc/error.hpp"
#include "ualloc/rng.hpp"

namespace ualloc {

namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) {
        throw Error(code, what);
    }
}

}  // namespace

CostFunction::CostFunction(std::vector<double> linear, std::vector<Monomial> monomials)
    : linear_(std::move(linear)), monomials_(std::move(monomials)), by_resource_(linear_.size()) {
    require(!linear_.empty(), ErrorCode::InvalidArgument, "cost function needs at least one resource");
    for (double c : linear_) {
        require(std::isfinite(c) && c >= 0.0, ErrorCode::InvalidArgument,
                "linear coefficients must be finite and nonnegative");
    }
    for (std::size_t t = 0; t < monomials_.size(); ++t) {
        const Monomial& mono = monomials_[t];
        require(mono.resource < linear_.size(), ErrorCode::InvalidArgument,
                "monomial resource index " + std::to_string(mono.resource) + " out of range");
        require(std::isfinite(mono.coeff) && mono.coeff > 0.0, ErrorCode::InvalidArgument,
                "monomial coefficients must be finite and positive");
        require(std::isfinite(mono.exponent) && mono.exponent >= 2.0, ErrorCode::InvalidArgument,
                "monomial exponents must be >= 2");
        by_resource_[mono.resource].push_back(t);
    }
    for (std::size_t j = 0; j < by_resource_.size(); ++j) {
        require(!by_resource_[j].empty(), ErrorCode::InvalidArgument,
                "resource " + std::to_string(j) + " has no monomial of exponent >= 2");
    }
}

double CostFunction::eval(std::span<const double> y) const {
    require(y.size() == resources(), ErrorCode::DimensionMismatch,
            "eval: expected " + std::to_string(resources()) + " coordinates, got " + std::to_string(y.size()));
    double total = 0.0;
    for (std::size_t j = 0; j < linear_.size(); ++j) {
        total += linear_[j] * y[j];
    }
    for (const Monomial& mono : monomials_) {
        total += mono.coeff * std::pow(y[mono.resource], mono.exponent);
    }
    return total;
}

double CostFunction::grad(std::span<const double> y, std::size_t j, LinearTerms lin) const {
    require(y.size() == resources(), ErrorCode::DimensionMismatch, "grad: dimension mismatch");
    return grad_at(j, y[j], lin);
}

double CostFunction::grad_at(std::size_t j, double yj, LinearTerms lin) const {
    require(j < resources(), ErrorCode::InvalidArgument, "resource index " + std::to_string(j) + " out of range");
    double d = lin == LinearTerms::Include ? linear_[j] : 0.0;
    for (std::size_t t : by_resource_[j]) {
        const Monomial& mono = monomials_[t];
        d += mono.coeff * mono.exponent * std::pow(yj, mono.exponent - 1.0);
    }
    return d;
}

double CostFunction::curvature_at(std::size_t j, double yj) const {
    require(j < resources(), ErrorCode::InvalidArgument, "resource index " + std::to_string(j) + " out of range");
    double d2 = 0.0;
    for (std::size_t t : by_resource_[j]) {
        const Monomial& mono = monomials_[t];
        d2 += mono.coeff * mono.exponent * (mono.exponent - 1.0) * std::pow(yj, mono.exponent - 2.0);
    }
    return d2;
}

double CostFunction::ratio(std::span<const double> y, std::size_t j, LinearTerms lin) const {
    require(y.size() == resources(), ErrorCode::DimensionMismatch, "v: dimension mismatch");
    return ratio_at(j, y[j], lin);
}

double CostFunction::ratio_at(std::size_t j, double yj, LinearTerms lin) const {
    const double d = grad_at(j, yj, lin);
    if (yj == 0.0) {
        require(d > 0.0, ErrorCode::IndeterminateRatio,
                "v is 0/0 at y_" + std::to_string(j) + " = 0 without a linear term");
        return 0.0;
    }
    return yj / d;
}

double CostFunction::min_exponent(std::size_t j) const {
    require(j < resources(), ErrorCode::InvalidArgument, "resource index out of range");
    double e = std::numeric_limits<double>::infinity();
    for (std::size_t t : by_resource_[j]) {
        e = std::min(e, monomials_[t].exponent);
    }
    return e;
}

double eval(const CostFunction& g, std::span<const double> y) { return g.eval(y); }

double grad(const CostFunction& g, std::span<const double> y, std::size_t j, LinearTerms lin) {
    return g.grad(y, j, lin);
}

double v(const CostFunction& g, std::span<const double> y, std::size_t j, LinearTerms lin) {
    return g.ratio(y, j, lin);
}

// ---------------------------------------------------------------------------

const char* to_string(ZeroLimit limit) {
    switch (limit) {
        case ZeroLimit::Zero: return "zero";
        case ZeroLimit::Finite: return "finite";
        case ZeroLimit::Divergent: return "divergent";
    }
    return "unknown";
}

ZeroLimit zero_limit(const CostFunction& g, std::size_t j, LinearTerms lin) {
    if (lin == LinearTerms::Include && g.linear()[j] > 0.0) {
        return ZeroLimit::Zero;
    }
    // g'(z) ~ c e z^(e-1) for the lowest exponent, so v(z) ~ z^(2-e) / (c e).
    return g.min_exponent(j) == 2.0 ? ZeroLimit::Finite : ZeroLimit::Divergent;
}

AdmissibilityReport check_admissible(const Population& population, std::span<const double> omega,
                                     std::size_t grid_points, LinearTerms lin, double epsilon) {
    require(grid_points >= 2, ErrorCode::InvalidArgument, "admissibility grid needs at least 2 points");
    require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::InvalidArgument, "grid epsilon must lie in (0, 1)");
    for (double w : omega) {
        require(w > 0.0, ErrorCode::InvalidArgument, "omega must be positive");
    }

    AdmissibilityReport report;
    report.agents = population.size();
    report.resources = omega.size();
    report.grid_points = grid_points;
    report.epsilon = epsilon;
    report.entries.resize(report.agents * report.resources);
    report.a = std::numeric_limits<double>::infinity();
    report.b = -std::numeric_limits<double>::infinity();
    report.pass = true;

    for (std::size_t i = 0; i < population.size(); ++i) {
        const CostFunction& g = population[i];
        require(g.resources() == omega.size(), ErrorCode::DimensionMismatch,
                "agent " + std::to_string(i) + " has a different resource count than omega");
        for (std::size_t j = 0; j < omega.size(); ++j) {
            AdmissibilityEntry& entry = report.entries[i * report.resources + j];
            entry.min_sigma = std::numeric_limits<double>::infinity();
            entry.max_sigma = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < grid_points; ++k) {
                const double z = epsilon + (1.0 - epsilon) * static_cast<double>(k) /
                                               static_cast<double>(grid_points - 1);
                const double sigma = omega[j] * g.ratio_at(j, z, lin);
                entry.min_sigma = std::min(entry.min_sigma, sigma);
                entry.max_sigma = std::max(entry.max_sigma, sigma);
            }
            entry.limit_at_zero = zero_limit(g, j, lin);
            entry.pass = entry.min_sigma > 0.0 && entry.max_sigma < 1.0;
            report.a = std::min(report.a, entry.min_sigma);
            report.b = std::max(report.b, entry.max_sigma);
            report.pass = report.pass && entry.pass;
        }
    }
    if (report.entries.empty()) {
        report.a = report.b = 0.0;
        report.pass = false;
    }
    return report;
}

// ---------------------------------------------------------------------------

CostFunction ev_cost(const EvProfile& p) {
    constexpr double a = kEvLevel1Rate;
    constexpr double b = kEvLevel2Rate;
    std::vector<double> linear{a, b};
    switch (p.cls) {
        case EvClass::I:
            return CostFunction(linear, {{0, a * p.f1, 2.0}, {1, b * p.f2, 4.0}});
        case EvClass::II:
            return CostFunction(linear, {{0, a * p.f1 / 2.0, 4.0}, {1, b * p.f2, 2.0}});
        case EvClass::III:
            return CostFunction(linear, {{0, a * p.f1 / 3.0, 4.0}, {0, a * p.f1, 6.0}, {1, b * p.f2, 4.0}});
        case EvClass::IV:
            return CostFunction(linear, {{0, a * p.f1, 2.0}, {1, b * p.f2, 6.0}});
    }
    throw Error(ErrorCode::InvalidArgument, "unknown EV class");
}

std::vector<EvProfile> draw_ev_profiles(std::size_t n, std::uint64_t seed,
                                        const std::array<std::size_t, 4>& class_sizes) {
    const std::size_t total = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
    require(total == n, ErrorCode::InvalidArgument,
            "EV class sizes sum to " + std::to_string(total) + ", expected " + std::to_string(n));

    RandomStream stream(seed, 0xe5c0'0000'0000'0001ull);
    std::vector<EvProfile> profiles;
    profiles.reserve(n);
    for (std::size_t c = 0; c < class_sizes.size(); ++c) {
        for (std::size_t k = 0; k < class_sizes[c]; ++k) {
            EvProfile p;
            p.cls = static_cast<EvClass>(c);
            p.f1 = 1.0 + 0.5 * stream.uniform();
            p.f2 = 1.0 + stream.uniform();
            profiles.push_back(p);
        }
    }
    return profiles;
}

Population make_ev_population(std::size_t n, std::uint64_t seed, const std::array<std::size_t, 4>& class_sizes) {
    Population population;
    population.reserve(n);
    for (const EvProfile& p : draw_ev_profiles(n, seed, class_sizes)) {
        population.push_back(ev_cost(p));
    }
    return population;
}

double co2_of_session(double power_kw, double hours, double emission_rate) {
    require(power_kw >= 0.0 && hours >= 0.0 && emission_rate >= 0.0, ErrorCode::InvalidArgument,
            "co2_of_session inputs must be nonnegative");
    return power_kw * hours * emission_rate;
}

}  // namespace ualloc
