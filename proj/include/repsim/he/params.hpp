// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

#include "repsim/common/error.hpp"

namespace repsim::he {

enum class BackendKind { simulation, lattice };

inline std::string to_string(BackendKind k) {
    return k == BackendKind::simulation ? "simulation" : "lattice";
}

inline BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "simulation" || s == "sim") return BackendKind::simulation;
    if (s == "lattice") return BackendKind::lattice;
    fail(Errc::invalid_params, "unknown backend kind '" + s + "'");
}

/// Parameters shared by every homomorphic backend.
///
/// `slot_count`  — real-valued slots packed per ciphertext
/// `depth_budget`— ciphertext-ciphertext multiplications a fresh ciphertext
///                 can absorb before DepthExhausted
/// `epsilon`     — per-operation approximation-error bound for values in [0,1]
struct HeParams {
    size_t slot_count = 8;
    unsigned depth_budget = 2;
    double epsilon = 1e-6;
    BackendKind backend_kind = BackendKind::simulation;

    void validate() const {
        if (slot_count < 1) fail(Errc::invalid_params, "slot_count must be >= 1");
        // the rating pipeline needs one multiplication plus margin
        if (depth_budget < 2) fail(Errc::invalid_params, "depth_budget must be >= 2");
        if (epsilon < 0.0) fail(Errc::invalid_params, "epsilon must be >= 0");
    }

    nlohmann::json to_json() const {
        return {{"slot_count", slot_count},
                {"depth_budget", depth_budget},
                {"epsilon", epsilon},
                {"backend_kind", to_string(backend_kind)}};
    }

    static HeParams from_json(const nlohmann::json& j) {
        HeParams p;
        p.slot_count = j.at("slot_count").get<size_t>();
        p.depth_budget = j.at("depth_budget").get<unsigned>();
        p.epsilon = j.at("epsilon").get<double>();
        if (j.contains("backend_kind")) {
            p.backend_kind = backend_kind_from_string(j.at("backend_kind").get<std::string>());
        }
        p.validate();
        return p;
    }
};

} // namespace repsim::he
