// SPDX-License-Identifier: Apache-2.0
#include "ualloc/ualloc.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "ualloc/controller.hpp"
#include "ualloc/cost_model.hpp"
#include "ualloc/engine.hpp"
#include "ualloc/error.hpp"
#include "ualloc/experiment.hpp"
#include "ualloc/serialization.hpp"

struct ua_config {
    ualloc::SimConfig config;
};

struct ua_sim {
    explicit ua_sim(ualloc::SimConfig c) : sim(std::move(c)) {}
    ualloc::Simulation sim;
};

namespace {

thread_local std::string last_error;

ua_status to_status(ualloc::ErrorCode code) {
    using ualloc::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument: return UA_ERR_INVALID_ARGUMENT;
        case ErrorCode::DimensionMismatch: return UA_ERR_DIMENSION;
        case ErrorCode::IndeterminateRatio: return UA_ERR_INDETERMINATE;
        case ErrorCode::NoRoot: return UA_ERR_NO_ROOT;
        case ErrorCode::Infeasible: return UA_ERR_INFEASIBLE;
        case ErrorCode::NonMonotone: return UA_ERR_NON_MONOTONE;
        case ErrorCode::Config: return UA_ERR_CONFIG;
        case ErrorCode::Divergence: return UA_ERR_DIVERGENCE;
        case ErrorCode::Io: return UA_ERR_IO;
    }
    return UA_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
ua_status guarded(Fn&& fn) noexcept {
    last_error.clear();
    try {
        return fn();
    } catch (const ualloc::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return UA_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return UA_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return UA_ERR_INTERNAL;
    }
}

ua_status null_argument(const char* what) {
    last_error = std::string("null argument: ") + what;
    return UA_ERR_INVALID_ARGUMENT;
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ua_status wrap_config(ualloc::SimConfig config, ua_config** out) {
    *out = new ua_config{std::move(config)};
    return UA_OK;
}

template <class T, class Span>
ua_status copy_out(const Span& values, T* out, size_t m) {
    if (out == nullptr) return null_argument("out");
    if (m != values.size()) {
        last_error = "output buffer has " + std::to_string(m) + " slots, expected " + std::to_string(values.size());
        return UA_ERR_DIMENSION;
    }
    for (size_t j = 0; j < m; ++j) out[j] = static_cast<T>(values[j]);
    return UA_OK;
}

}  // namespace

extern "C" {

const char* ua_version(void) { return "1.0.0"; }

const char* ua_status_string(ua_status status) {
    switch (status) {
        case UA_OK: return "ok";
        case UA_ERR_INVALID_ARGUMENT: return "invalid argument";
        case UA_ERR_DIMENSION: return "dimension mismatch";
        case UA_ERR_INDETERMINATE: return "indeterminate ratio";
        case UA_ERR_NO_ROOT: return "no root";
        case UA_ERR_INFEASIBLE: return "infeasible";
        case UA_ERR_NON_MONOTONE: return "non-monotone inverse";
        case UA_ERR_CONFIG: return "configuration error";
        case UA_ERR_DIVERGENCE: return "divergence";
        case UA_ERR_IO: return "i/o error";
        case UA_ERR_EXPERIMENT_FAILED: return "experiment failed";
        case UA_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ua_last_error(void) { return last_error.c_str(); }

void ua_string_free(char* str) { std::free(str); }

ua_status ua_config_from_preset(const char* name, ua_config** out) {
    if (name == nullptr) return null_argument("name");
    if (out == nullptr) return null_argument("out");
    return guarded([&] { return wrap_config(ualloc::preset_config(name), out); });
}

ua_status ua_config_from_file(const char* path, ua_config** out) {
    if (path == nullptr) return null_argument("path");
    if (out == nullptr) return null_argument("out");
    return guarded([&] { return wrap_config(ualloc::load_config(path), out); });
}

ua_status ua_config_from_json(const char* json_text, ua_config** out) {
    if (json_text == nullptr) return null_argument("json_text");
    if (out == nullptr) return null_argument("out");
    return guarded([&] { return wrap_config(ualloc::parse_config(json_text), out); });
}

void ua_config_free(ua_config* config) { delete config; }

ua_status ua_config_to_json(const ua_config* config, char** out_json) {
    if (config == nullptr) return null_argument("config");
    if (out_json == nullptr) return null_argument("out_json");
    return guarded([&] {
        *out_json = duplicate(ualloc::config_to_json(config->config).dump(2));
        return UA_OK;
    });
}

ua_status ua_config_dims(const ua_config* config, size_t* n, size_t* m) {
    if (config == nullptr) return null_argument("config");
    if (n != nullptr) *n = config->config.n;
    if (m != nullptr) *m = config->config.m;
    return UA_OK;
}

ua_status ua_config_set_seed(ua_config* config, uint64_t seed) {
    if (config == nullptr) return null_argument("config");
    config->config.seed = seed;
    return UA_OK;
}

ua_status ua_config_set_steps(ua_config* config, uint64_t steps) {
    if (config == nullptr) return null_argument("config");
    if (steps < 1) {
        last_error = "steps must be >= 1";
        return UA_ERR_CONFIG;
    }
    config->config.steps = steps;
    return UA_OK;
}

ua_status ua_config_set_constant_omega(ua_config* config, int enabled) {
    if (config == nullptr) return null_argument("config");
    config->config.constant_omega = enabled != 0;
    return UA_OK;
}

ua_status ua_config_set_snapshot_every(ua_config* config, uint64_t every) {
    if (config == nullptr) return null_argument("config");
    config->config.snapshot_every = every;
    return UA_OK;
}

ua_status ua_config_set_threads(ua_config* config, unsigned threads) {
    if (config == nullptr) return null_argument("config");
    if (threads < 1) {
        last_error = "threads must be >= 1";
        return UA_ERR_CONFIG;
    }
    config->config.threads = threads;
    return UA_OK;
}

ua_status ua_config_set_gamma(ua_config* config, const double* gamma, size_t count) {
    if (config == nullptr) return null_argument("config");
    if (gamma == nullptr && count > 0) return null_argument("gamma");
    return guarded([&] {
        if (count != config->config.resources.size()) {
            throw ualloc::Error(ualloc::ErrorCode::DimensionMismatch,
                                "gamma needs " + std::to_string(config->config.resources.size()) + " values, got " +
                                    std::to_string(count));
        }
        for (size_t j = 0; j < count; ++j) {
            if (!(gamma[j] > 0.0 && gamma[j] <= 1.0)) {
                throw ualloc::Error(ualloc::ErrorCode::Config, "gamma must lie in (0, 1]");
            }
        }
        for (size_t j = 0; j < count; ++j) config->config.resources[j].gamma = gamma[j];
        return UA_OK;
    });
}

ua_status ua_run_experiment(const ua_config* config, const char* source, const char* out_dir,
                            unsigned emit_flags, char** out_summary) {
    if (config == nullptr) return null_argument("config");
    if (out_dir == nullptr) return null_argument("out_dir");
    return guarded([&] {
        ualloc::RunManifest manifest;
        manifest.config = config->config;
        manifest.source = source != nullptr ? source : "";
        manifest.out_dir = out_dir;
        manifest.emit.trace = (emit_flags & UA_EMIT_TRACE) != 0;
        manifest.emit.snapshots = (emit_flags & UA_EMIT_SNAPSHOTS) != 0;
        manifest.emit.oracle = (emit_flags & UA_EMIT_ORACLE) != 0;
        const ualloc::ExperimentResult result = ualloc::run_experiment(manifest);
        if (out_summary != nullptr) *out_summary = duplicate(result.summary.dump(2));
        if (result.exit_code != 0) {
            last_error = result.summary.value(nlohmann::json::json_pointer("/error/message"), std::string("experiment failed"));
            return UA_ERR_EXPERIMENT_FAILED;
        }
        return UA_OK;
    });
}

ua_status ua_sim_create(const ua_config* config, ua_sim** out) {
    if (config == nullptr) return null_argument("config");
    if (out == nullptr) return null_argument("out");
    return guarded([&] {
        *out = new ua_sim(config->config);
        return UA_OK;
    });
}

void ua_sim_free(ua_sim* sim) { delete sim; }

ua_status ua_sim_advance(ua_sim* sim, uint64_t steps) {
    if (sim == nullptr) return null_argument("sim");
    return guarded([&] {
        for (uint64_t k = 0; k < steps; ++k) sim->sim.advance();
        return UA_OK;
    });
}

ua_status ua_sim_step(const ua_sim* sim, uint64_t* out_step) {
    if (sim == nullptr) return null_argument("sim");
    if (out_step == nullptr) return null_argument("out_step");
    *out_step = sim->sim.step();
    return UA_OK;
}

ua_status ua_sim_omega(const ua_sim* sim, double* out, size_t m) {
    if (sim == nullptr) return null_argument("sim");
    return copy_out(sim->sim.omega(), out, m);
}

ua_status ua_sim_totals(const ua_sim* sim, uint64_t* out, size_t m) {
    if (sim == nullptr) return null_argument("sim");
    return copy_out(sim->sim.totals(), out, m);
}

ua_status ua_sim_sum_y(const ua_sim* sim, double* out, size_t m) {
    if (sim == nullptr) return null_argument("sim");
    return copy_out(sim->sim.sum_y(), out, m);
}

ua_status ua_overhead_bits(uint64_t mu_bits_per_float, uint64_t m, uint64_t* out_bits) {
    if (out_bits == nullptr) return null_argument("out_bits");
    return guarded([&] {
        *out_bits = ualloc::report_overhead_bits(mu_bits_per_float, m);
        return UA_OK;
    });
}

ua_status ua_co2_of_session(double power_kw, double hours, double emission_rate, double* out_kg) {
    if (out_kg == nullptr) return null_argument("out_kg");
    return guarded([&] {
        *out_kg = ualloc::co2_of_session(power_kw, hours, emission_rate);
        return UA_OK;
    });
}

}  // extern "C"
