// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/he/factory.hpp"
#include "repsim/protocol/signature.hpp"

namespace repsim::bench {

struct TimingRow {
    std::string name;
    size_t iterations = 0;
    double mean_us = 0.0;
    double p50_us = 0.0;
    double p95_us = 0.0;

    nlohmann::json to_json() const {
        return {{"name", name},
                {"iterations", iterations},
                {"mean_us", mean_us},
                {"p50_us", p50_us},
                {"p95_us", p95_us}};
    }
};

struct TimingTable {
    std::string backend;
    he::HeParams params;
    std::vector<TimingRow> rows;

    const TimingRow* find(const std::string& name) const {
        for (const auto& r : rows) {
            if (r.name == name) return &r;
        }
        return nullptr;
    }

    nlohmann::json to_json() const {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& r : rows) jr.push_back(r.to_json());
        return {{"backend", backend}, {"he_params", params.to_json()}, {"rows", jr}};
    }

    static TimingTable from_json(const nlohmann::json& j) {
        TimingTable t;
        t.backend = j.at("backend").get<std::string>();
        t.params = he::HeParams::from_json(j.at("he_params"));
        for (const auto& jr : j.at("rows")) {
            t.rows.push_back(TimingRow{jr.at("name").get<std::string>(),
                                       jr.at("iterations").get<size_t>(),
                                       jr.at("mean_us").get<double>(),
                                       jr.at("p50_us").get<double>(),
                                       jr.at("p95_us").get<double>()});
        }
        return t;
    }
};

namespace detail {

template <typename F>
TimingRow time_op(const std::string& name, size_t iterations, F&& body) {
    using clock = std::chrono::steady_clock;
    for (size_t i = 0; i < 3; ++i) body(i); // warm caches before sampling
    std::vector<double> samples;
    samples.reserve(iterations);
    for (size_t i = 0; i < iterations; ++i) {
        auto t0 = clock::now();
        body(i);
        auto t1 = clock::now();
        double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
        samples.push_back(std::max(us, 0.001)); // keep timings strictly positive
    }
    std::sort(samples.begin(), samples.end());
    double sum = 0.0;
    for (double s : samples) sum += s;
    TimingRow row;
    row.name = name;
    row.iterations = iterations;
    row.mean_us = sum / static_cast<double>(iterations);
    row.p50_us = samples[(iterations - 1) / 2];
    row.p95_us = samples[std::min(iterations - 1, static_cast<size_t>((iterations - 1) * 95 + 50) / 100)];
    return row;
}

} // namespace detail

/// Times the primitive operations a rating session is built from: the six HE
/// ops plus the signature pair the protocol wraps around them.
inline TimingTable bench_he(const he::HeParams& params, size_t iterations, uint64_t seed = 1) {
    if (iterations < 30) fail(Errc::invalid_params, "benchmark needs at least 30 iterations");
    auto backend = he::make_backend(params, seed);
    Rng rng(seed, "bench");

    TimingTable table;
    table.backend = he::to_string(params.backend_kind);
    table.params = params;

    he::KeyMaterial keys = backend->keygen();
    auto random_vector = [&](Rng& r) {
        std::vector<double> v(params.slot_count);
        for (auto& x : v) x = r.uniform();
        return he::PlainVector(v);
    };
    he::Ciphertext ct_a = backend->encrypt(keys.public_key, random_vector(rng));
    he::Ciphertext ct_b = backend->encrypt(keys.public_key, random_vector(rng));

    table.rows.push_back(detail::time_op("keygen", iterations, [&](size_t) { backend->keygen(); }));
    table.rows.push_back(detail::time_op("encrypt", iterations, [&](size_t) {
        backend->encrypt(keys.public_key, random_vector(rng));
    }));
    table.rows.push_back(detail::time_op("decrypt", iterations, [&](size_t) {
        backend->decrypt(keys.secret_key, ct_a);
    }));
    table.rows.push_back(detail::time_op("he_add", iterations, [&](size_t) {
        backend->add(ct_a, ct_b);
    }));
    table.rows.push_back(detail::time_op("he_mul", iterations, [&](size_t) {
        backend->mul(ct_a, ct_b, keys.eval_key);
    }));
    he::PlainVector plain = random_vector(rng);
    table.rows.push_back(detail::time_op("he_scalar", iterations, [&](size_t) {
        backend->scalar(he::ScalarOp::add, ct_a, plain);
    }));

    SigningKey sk = make_signing_key(rng);
    std::string message(256, 'x');
    Bytes sig = sign_detached(sk, message);
    table.rows.push_back(detail::time_op("sign", iterations, [&](size_t) {
        sign_detached(sk, message);
    }));
    table.rows.push_back(detail::time_op("verify", iterations, [&](size_t) {
        verify_detached(sk.public_key, message, sig);
    }));
    return table;
}

} // namespace repsim::bench
