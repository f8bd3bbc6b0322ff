// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/common/bytes.hpp"
#include "repsim/common/error.hpp"

namespace repsim::he {

struct PlainVector {
    std::vector<double> values;

    PlainVector() = default;
    PlainVector(std::initializer_list<double> v) : values(v) {}
    explicit PlainVector(std::vector<double> v) : values(std::move(v)) {}

    size_t size() const { return values.size(); }

    void check_finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) fail(Errc::invalid_params, "plaintext slot not finite");
        }
    }
};

/// Opaque homomorphic payload with level and approximation-error accounting.
/// The envelope is what travels in messages and event logs; it survives
/// process restarts byte-for-byte.
struct Ciphertext {
    std::string key_id;
    unsigned level = 0;       // remaining ciphertext-ciphertext multiplications
    double error_bound = 0.0; // accumulated worst-case approximation error
    Bytes payload;

    std::string payload_digest() const { return digest_of(payload); }

    nlohmann::json to_json() const {
        return {{"key_id", key_id},
                {"level", level},
                {"error_bound", error_bound},
                {"payload", to_base64(payload)}};
    }

    static Ciphertext from_json(const nlohmann::json& j) {
        Ciphertext ct;
        ct.key_id = j.at("key_id").get<std::string>();
        ct.level = j.at("level").get<unsigned>();
        ct.error_bound = j.at("error_bound").get<double>();
        ct.payload = from_base64(j.at("payload").get<std::string>());
        return ct;
    }
};

} // namespace repsim::he
