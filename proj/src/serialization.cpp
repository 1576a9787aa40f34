// SPDX-License-Identifier: Apache-2.0
#include "ualloc/serialization.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>

#include "ualloc/error.hpp"

namespace ualloc {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::Config, where + ": " + what);
}

void expect_object(const json& in, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!in.is_object()) config_error(where, "expected an object");
    for (const auto& item : in.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            config_error(where, "unknown field '" + item.key() + "'");
        }
    }
}

const json& field(const json& in, const std::string& key, const std::string& where) {
    auto it = in.find(key);
    if (it == in.end()) config_error(where, "missing required field '" + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) config_error(where, "expected a number");
    return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) config_error(where, "expected a nonnegative integer");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    config_error(where, "expected a nonnegative integer");
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) config_error(where, "expected true or false");
    return v.get<bool>();
}

double number_or(const json& in, const std::string& key, double fallback, const std::string& where) {
    auto it = in.find(key);
    return it == in.end() ? fallback : as_number(*it, where + "." + key);
}

}  // namespace

json cost_to_json(const CostFunction& g) {
    json monomials = json::array();
    for (const Monomial& mono : g.monomials()) {
        monomials.push_back({{"resource", mono.resource}, {"coeff", mono.coeff}, {"exp", mono.exponent}});
    }
    return {{"linear", std::vector<double>(g.linear().begin(), g.linear().end())}, {"monomials", monomials}};
}

CostFunction cost_from_json(const json& in, const std::string& where) {
    expect_object(in, where, {"linear", "monomials"});
    const json& linear = field(in, "linear", where);
    if (!linear.is_array()) config_error(where + ".linear", "expected an array");
    std::vector<double> coeffs;
    for (std::size_t j = 0; j < linear.size(); ++j) {
        coeffs.push_back(as_number(linear[j], where + ".linear[" + std::to_string(j) + "]"));
    }
    const json& monos = field(in, "monomials", where);
    if (!monos.is_array()) config_error(where + ".monomials", "expected an array");
    std::vector<Monomial> monomials;
    for (std::size_t t = 0; t < monos.size(); ++t) {
        const std::string at = where + ".monomials[" + std::to_string(t) + "]";
        expect_object(monos[t], at, {"resource", "coeff", "exp"});
        Monomial mono;
        mono.resource = static_cast<std::size_t>(as_count(field(monos[t], "resource", at), at + ".resource"));
        mono.coeff = as_number(field(monos[t], "coeff", at), at + ".coeff");
        mono.exponent = as_number(field(monos[t], "exp", at), at + ".exp");
        monomials.push_back(mono);
    }
    try {
        return CostFunction(std::move(coeffs), std::move(monomials));
    } catch (const Error& e) {
        config_error(where, e.what());
    }
}

json resource_to_json(const ResourceSpec& r) {
    return {{"capacity", r.capacity},   {"tau", r.tau},
            {"gamma", r.gamma},         {"omega0", r.omega0},
            {"omega_min", r.omega_min}, {"omega_max", r.omega_max}};
}

ResourceSpec resource_from_json(const json& in, const std::string& where) {
    expect_object(in, where, {"capacity", "tau", "gamma", "omega0", "omega_min", "omega_max"});
    ResourceSpec r;
    r.capacity = as_number(field(in, "capacity", where), where + ".capacity");
    r.tau = as_number(field(in, "tau", where), where + ".tau");
    r.omega0 = as_number(field(in, "omega0", where), where + ".omega0");
    r.gamma = number_or(in, "gamma", r.gamma, where);
    r.omega_min = number_or(in, "omega_min", r.omega_min, where);
    r.omega_max = number_or(in, "omega_max", r.omega_max, where);
    return r;
}

json config_to_json(const SimConfig& c) {
    json resources = json::array();
    for (const ResourceSpec& r : c.resources) resources.push_back(resource_to_json(r));

    json population;
    switch (c.population.kind) {
        case PopulationKind::Explicit: {
            json costs = json::array();
            for (const CostFunction& g : c.population.costs) costs.push_back(cost_to_json(g));
            population = {{"kind", "explicit"}, {"costs", costs}};
            break;
        }
        case PopulationKind::Ev:
            population = {{"kind", "ev"}, {"class_sizes", c.population.class_sizes}};
            if (c.population.seed) population["seed"] = *c.population.seed;
            break;
        case PopulationKind::Quadratic:
            population = {{"kind", "quadratic"},
                          {"coeff_min", c.population.coeff_min},
                          {"coeff_max", c.population.coeff_max}};
            break;
    }

    return {{"schema_version", kSchemaVersion},
            {"n", c.n},
            {"m", c.m},
            {"steps", c.steps},
            {"seed", c.seed},
            {"include_linear", c.linear == LinearTerms::Include},
            {"constant_omega", c.constant_omega},
            {"snapshot_every", c.snapshot_every},
            {"summary_window", c.summary_window},
            {"threads", c.threads},
            {"resources", resources},
            {"population", population}};
}

SimConfig config_from_json(const json& in) {
    const std::string root = "config";
    expect_object(in, root,
                  {"schema_version", "n", "m", "steps", "seed", "include_linear", "constant_omega", "snapshot_every",
                   "summary_window", "threads", "resources", "population"});
    if (auto it = in.find("schema_version"); it != in.end()) {
        if (as_count(*it, root + ".schema_version") != static_cast<std::uint64_t>(kSchemaVersion)) {
            config_error(root + ".schema_version", "unsupported version (expected " +
                                                       std::to_string(kSchemaVersion) + ")");
        }
    }

    SimConfig c;
    c.n = static_cast<std::size_t>(as_count(field(in, "n", root), root + ".n"));
    c.m = static_cast<std::size_t>(as_count(field(in, "m", root), root + ".m"));
    c.steps = as_count(field(in, "steps", root), root + ".steps");
    if (auto it = in.find("seed"); it != in.end()) c.seed = as_count(*it, root + ".seed");
    if (auto it = in.find("constant_omega"); it != in.end()) c.constant_omega = as_bool(*it, root + ".constant_omega");
    if (auto it = in.find("snapshot_every"); it != in.end()) c.snapshot_every = as_count(*it, root + ".snapshot_every");
    if (auto it = in.find("summary_window"); it != in.end()) c.summary_window = as_count(*it, root + ".summary_window");
    if (auto it = in.find("threads"); it != in.end()) {
        c.threads = static_cast<unsigned>(as_count(*it, root + ".threads"));
    }

    const json& resources = field(in, "resources", root);
    if (!resources.is_array()) config_error(root + ".resources", "expected an array");
    for (std::size_t j = 0; j < resources.size(); ++j) {
        c.resources.push_back(resource_from_json(resources[j], root + ".resources[" + std::to_string(j) + "]"));
    }

    const std::string pw = root + ".population";
    const json& pop = field(in, "population", root);
    if (!pop.is_object()) config_error(pw, "expected an object");
    const json& kind = field(pop, "kind", pw);
    if (!kind.is_string()) config_error(pw + ".kind", "expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "explicit") {
        expect_object(pop, pw, {"kind", "costs"});
        c.population.kind = PopulationKind::Explicit;
        const json& costs = field(pop, "costs", pw);
        if (!costs.is_array()) config_error(pw + ".costs", "expected an array");
        for (std::size_t i = 0; i < costs.size(); ++i) {
            c.population.costs.push_back(cost_from_json(costs[i], pw + ".costs[" + std::to_string(i) + "]"));
        }
    } else if (k == "ev") {
        expect_object(pop, pw, {"kind", "class_sizes", "seed"});
        c.population.kind = PopulationKind::Ev;
        const json& sizes = field(pop, "class_sizes", pw);
        if (!sizes.is_array() || sizes.size() != 4) config_error(pw + ".class_sizes", "expected 4 counts");
        for (std::size_t q = 0; q < 4; ++q) {
            c.population.class_sizes[q] =
                static_cast<std::size_t>(as_count(sizes[q], pw + ".class_sizes[" + std::to_string(q) + "]"));
        }
        if (auto it = pop.find("seed"); it != pop.end()) c.population.seed = as_count(*it, pw + ".seed");
    } else if (k == "quadratic") {
        expect_object(pop, pw, {"kind", "coeff_min", "coeff_max"});
        c.population.kind = PopulationKind::Quadratic;
        c.population.coeff_min = number_or(pop, "coeff_min", c.population.coeff_min, pw);
        c.population.coeff_max = number_or(pop, "coeff_max", c.population.coeff_max, pw);
    } else {
        config_error(pw + ".kind", "unknown population kind '" + k + "' (expected explicit, ev or quadratic)");
    }

    // EV costs drop the linear terms from derivatives unless told otherwise.
    const bool default_linear = c.population.kind != PopulationKind::Ev;
    bool include_linear = default_linear;
    if (auto it = in.find("include_linear"); it != in.end()) include_linear = as_bool(*it, root + ".include_linear");
    c.linear = include_linear ? LinearTerms::Include : LinearTerms::Exclude;

    c.validate();
    return c;
}

json oracle_to_json(const OracleSolution& sol) {
    json rows = json::array();
    for (std::size_t i = 0; i < sol.y_star.n; ++i) {
        const auto row = sol.y_star.row(i);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return {{"method", sol.method == OptimumMethod::DualBisection ? "dual-bisection" : "projected-gradient"},
            {"y_star", rows},
            {"mu", sol.mu},
            {"lambda", sol.lambda},
            {"achieved", sol.achieved},
            {"capacity_residual", sol.capacity_residual},
            {"consensus_spread", sol.consensus_spread},
            {"at_lower", sol.at_lower},
            {"at_upper", sol.at_upper},
            {"objective", sol.objective},
            {"iterations", sol.iterations}};
}

}  // namespace ualloc
