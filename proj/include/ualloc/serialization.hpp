// SPDX-License-Identifier: Apache-2.0
//
// JSON forms of the library's value types. Field names are part of the file
// formats and must not change without bumping kSchemaVersion.
#pragma once

#include "json.hpp"

#include "ualloc/controller.hpp"
#include "ualloc/cost_model.hpp"
#include "ualloc/engine.hpp"
#include "ualloc/oracle.hpp"

namespace ualloc {

inline constexpr int kSchemaVersion = 1;

/// {"linear": [..], "monomials": [{"resource": j, "coeff": c, "exp": e}, ..]}
nlohmann::json cost_to_json(const CostFunction& g);
/// Rejects unknown fields; `where` prefixes error messages.
CostFunction cost_from_json(const nlohmann::json& in, const std::string& where = "cost");

nlohmann::json resource_to_json(const ResourceSpec& r);
ResourceSpec resource_from_json(const nlohmann::json& in, const std::string& where = "resource");

nlohmann::json config_to_json(const SimConfig& config);
/// Validates the result; unknown fields and type mismatches raise Error(Config)
/// naming the offending field.
SimConfig config_from_json(const nlohmann::json& in);

nlohmann::json oracle_to_json(const OracleSolution& sol);

}  // namespace ualloc
