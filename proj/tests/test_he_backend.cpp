// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "he_trees.hpp"
#include "repsim/he/factory.hpp"

using namespace repsim;
using namespace repsim::he;

namespace {

HeParams sim_params(size_t slots = 8, unsigned depth = 3, double eps = 1e-6) {
    HeParams p;
    p.slot_count = slots;
    p.depth_budget = depth;
    p.epsilon = eps;
    p.backend_kind = BackendKind::simulation;
    return p;
}

} // namespace

TEST_CASE("params are validated") {
    HeParams p = sim_params();
    p.slot_count = 0;
    CHECK_THROWS_AS(SimBackend(p), Error);
    p = sim_params();
    p.epsilon = -1.0;
    CHECK_THROWS_AS(SimBackend(p), Error);
    p = sim_params();
    p.depth_budget = 1;
    CHECK_THROWS_AS(SimBackend(p), Error);
}

TEST_CASE("keygen yields fresh key ids and a working roundtrip") {
    SimBackend be(sim_params(8, 3, 1e-6), 11);
    KeyMaterial k1 = be.keygen();
    KeyMaterial k2 = be.keygen();
    CHECK(k1.key_id != k2.key_id);

    Ciphertext ct = be.encrypt(k1.public_key, PlainVector{0.5});
    PlainVector pt = be.decrypt(k1.secret_key, ct);
    CHECK(std::abs(pt.values[0] - 0.5) <= 1e-6);

    try {
        be.decrypt(k2.secret_key, ct);
        FAIL("decrypt across keys must fail");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::key_mismatch);
    }
}

TEST_CASE("encrypt contract: level, bound, key id, probabilistic payloads") {
    SimBackend be(sim_params(), 12);
    KeyMaterial k = be.keygen();
    Ciphertext ct = be.encrypt(k.public_key, PlainVector{0.8, 0.6});
    CHECK(ct.level == be.params().depth_budget);
    CHECK(ct.error_bound == be.params().epsilon);
    CHECK(ct.key_id == k.public_key.key_id);

    Ciphertext a = be.encrypt(k.public_key, PlainVector{0.8});
    Ciphertext b = be.encrypt(k.public_key, PlainVector{0.8});
    CHECK(a.payload != b.payload);
    CHECK(std::abs(be.decrypt(k.secret_key, a).values[0] - 0.8) <= 1e-6);
    CHECK(std::abs(be.decrypt(k.secret_key, b).values[0] - 0.8) <= 1e-6);

    std::vector<double> nine(9, 0.1);
    try {
        be.encrypt(k.public_key, PlainVector(nine));
        FAIL("9 slots into 8 must fail");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::vector_too_long);
    }
}

TEST_CASE("decrypt zero and additive oracle") {
    SimBackend be(sim_params(), 13);
    KeyMaterial k = be.keygen();
    PlainVector z = be.decrypt(k.secret_key, be.encrypt(k.public_key, PlainVector{0.0}));
    CHECK(std::abs(z.values[0]) <= 1e-6);

    Ciphertext sum = be.add(be.encrypt(k.public_key, PlainVector{0.3}),
                            be.encrypt(k.public_key, PlainVector{0.4}));
    CHECK(std::abs(be.decrypt(k.secret_key, sum).values[0] - 0.7) <= 2e-6);
    CHECK(sum.error_bound == Catch::Approx(2e-6));
}

TEST_CASE("corrupted payloads are rejected") {
    SimBackend be(sim_params(), 14);
    KeyMaterial k = be.keygen();
    Ciphertext ct = be.encrypt(k.public_key, PlainVector{0.5});
    ct.payload[10] ^= 0x01;
    try {
        be.decrypt(k.secret_key, ct);
        FAIL("tampered payload must not decrypt");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::corrupted_payload);
    }
}

TEST_CASE("he_add semantics") {
    SimBackend be(sim_params(), 15);
    KeyMaterial k = be.keygen();
    Ciphertext a = be.encrypt(k.public_key, PlainVector{0.2});
    Ciphertext zero = be.encrypt(k.public_key, PlainVector{0.0});
    CHECK(std::abs(be.decrypt(k.secret_key, be.add(a, zero)).values[0] - 0.2) <= 2e-6);

    Ciphertext sum = be.add(be.encrypt(k.public_key, PlainVector{0.25}),
                            be.encrypt(k.public_key, PlainVector{0.5}));
    CHECK(std::abs(be.decrypt(k.secret_key, sum).values[0] - 0.75) <= 2e-6);

    KeyMaterial other = be.keygen();
    Ciphertext foreign = be.encrypt(other.public_key, PlainVector{0.1});
    CHECK_THROWS_AS(be.add(a, foreign), Error);
}

TEST_CASE("he_mul semantics and depth accounting") {
    SimBackend be(sim_params(8, 3, 1e-6), 16);
    KeyMaterial k = be.keygen();
    Ciphertext one = be.encrypt(k.public_key, PlainVector{1.0});
    Ciphertext x = be.encrypt(k.public_key, PlainVector{0.7});
    Ciphertext prod = be.mul(one, x, k.eval_key);
    CHECK(std::abs(be.decrypt(k.secret_key, prod).values[0] - 0.7) <= prod.error_bound);

    Ciphertext half = be.encrypt(k.public_key, PlainVector{0.5});
    Ciphertext sq = be.mul(half, half, k.eval_key);
    CHECK(sq.level == half.level - 1);
    CHECK(std::abs(be.decrypt(k.secret_key, sq).values[0] - 0.25) <= sq.error_bound);

    // chaining depth_budget + 1 multiplications fails exactly at the last one
    Ciphertext acc = be.encrypt(k.public_key, PlainVector{0.9});
    unsigned failure_index = 0;
    for (unsigned i = 1; i <= be.params().depth_budget + 1; ++i) {
        try {
            acc = be.mul(acc, be.encrypt(k.public_key, PlainVector{0.9}), k.eval_key);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::depth_exhausted);
            failure_index = i;
            break;
        }
    }
    CHECK(failure_index == be.params().depth_budget + 1);
}

TEST_CASE("he_scalar semantics") {
    SimBackend be(sim_params(), 17);
    KeyMaterial k = be.keygen();
    Ciphertext x = be.encrypt(k.public_key, PlainVector{0.4});
    Ciphertext same = be.scalar(ScalarOp::add, x, PlainVector{0.0});
    CHECK(std::abs(be.decrypt(k.secret_key, same).values[0] - 0.4) <= same.error_bound);

    Ciphertext doubled = be.scalar(ScalarOp::mul, x, PlainVector{2.0});
    CHECK(std::abs(be.decrypt(k.secret_key, doubled).values[0] - 0.8) <= doubled.error_bound);
    CHECK(doubled.level == x.level); // plain ops are depth-free here
    CHECK(be.scalar_mul_depth_cost() == 0);

    CHECK_THROWS_AS(be.scalar(ScalarOp::add, x, PlainVector{0.1, 0.2}), Error);
}

TEST_CASE("noise_report tracks the documented composition") {
    SimBackend be(sim_params(8, 3, 1e-6), 18);
    KeyMaterial k = be.keygen();
    Ciphertext fresh = be.encrypt(k.public_key, PlainVector{0.5});
    NoiseReport r0 = be.noise_report(fresh);
    CHECK(r0.level == 3);
    CHECK(r0.error_bound == 1e-6);

    Ciphertext after_mul = be.mul(fresh, be.encrypt(k.public_key, PlainVector{0.5}), k.eval_key);
    CHECK(be.noise_report(after_mul).level == 2);

    // k additions of fresh ciphertexts: bound = (k+1) * eps
    Ciphertext acc = be.encrypt(k.public_key, PlainVector{0.1});
    for (int i = 1; i <= 10; ++i) {
        acc = be.add(acc, be.encrypt(k.public_key, PlainVector{0.1}));
        CHECK(acc.error_bound == Catch::Approx((i + 1) * 1e-6));
    }
}

TEST_CASE("level never increases along any chain") {
    SimBackend be(sim_params(8, 2, 1e-6), 19);
    KeyMaterial k = be.keygen();
    Rng rng(19, "levels");
    Ciphertext ct = be.encrypt(k.public_key, PlainVector{0.5});
    unsigned last = ct.level;
    for (int i = 0; i < 40; ++i) {
        if (rng.coin(0.3) && ct.level >= 1) {
            ct = be.mul(ct, be.encrypt(k.public_key, PlainVector{0.9}), k.eval_key);
        } else if (rng.coin(0.5)) {
            ct = be.add(ct, be.encrypt(k.public_key, PlainVector{0.1}));
        } else {
            ct = be.scalar(ScalarOp::add, ct, PlainVector{0.05});
        }
        CHECK(ct.level <= last);
        last = ct.level;
    }
}

TEST_CASE("ciphertext envelope survives serialization") {
    SimBackend be(sim_params(), 20);
    KeyMaterial k = be.keygen();
    Ciphertext ct = be.encrypt(k.public_key, PlainVector{0.31, 0.62});
    Ciphertext back = Ciphertext::from_json(ct.to_json());
    CHECK(back.key_id == ct.key_id);
    CHECK(back.level == ct.level);
    CHECK(back.error_bound == ct.error_bound);
    CHECK(back.payload == ct.payload);
    CHECK(std::abs(be.decrypt(k.secret_key, back).values[0] - 0.31) <= 1e-6);
}

TEST_CASE("oracle equivalence over random expression trees") {
    SimBackend be(sim_params(4, 2, 1e-6), 21);
    auto result = testing::run_tree_suite(be, 200, 99, 50, 2);
    INFO(result.first_failure);
    CHECK(result.trees == 200);
    CHECK(result.violations == 0);
    CHECK(result.worst_error > 0.0);
}

TEST_CASE("backend factory dispatches by kind") {
    HeParams p = sim_params();
    auto be = make_backend(p, 5);
    KeyMaterial k = be->keygen();
    CHECK(std::abs(be->decrypt(k.secret_key, be->encrypt(k.public_key, PlainVector{0.9}))
                       .values[0] -
                   0.9) <= 1e-6);
}
