// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Random expression trees over encrypted slots, checked against plain
// evaluation: the independent oracle for the homomorphic contract.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "repsim/common/rng.hpp"
#include "repsim/he/backend.hpp"

namespace repsim::testing {

struct TreeSuiteResult {
    size_t trees = 0;
    size_t violations = 0;
    double worst_error = 0.0;
    double worst_margin = 0.0; // max over trees of |err| / bound
    std::string first_failure;
};

/// Evaluates random add/mul circuits (multiplicative depth bounded by the
/// params' budget, additions bounded by max_adds) both homomorphically and in
/// plain doubles, and checks the decrypted result against the tracked
/// error_bound slot by slot.
inline TreeSuiteResult run_tree_suite(he::Backend& backend, size_t tree_count, uint64_t seed,
                                      size_t max_adds = 50, size_t max_muls = 2) {
    Rng rng(seed, "he-trees");
    const size_t slots = backend.params().slot_count;
    TreeSuiteResult result;

    for (size_t t = 0; t < tree_count; ++t) {
        he::KeyMaterial keys = backend.keygen();
        struct Node {
            he::Ciphertext ct;
            std::vector<double> plain;
        };
        auto fresh_leaf = [&]() {
            std::vector<double> v(slots);
            for (auto& x : v) x = rng.uniform();
            Node n;
            n.plain = v;
            n.ct = backend.encrypt(keys.public_key, he::PlainVector(v));
            return n;
        };
        std::vector<Node> pool;
        size_t leaves = 1 + rng.uniform_int(1, 4);
        for (size_t i = 0; i < leaves; ++i) pool.push_back(fresh_leaf());

        size_t adds = rng.uniform_int(0, max_adds);
        size_t muls = rng.uniform_int(0, max_muls);
        auto pick = [&]() -> size_t { return rng.uniform_int(0, pool.size() - 1); };

        for (size_t op = 0; op < adds + muls; ++op) {
            bool do_mul = op >= adds;
            size_t i = pick();
            if (do_mul) {
                // multiply with a fresh leaf so the depth budget bounds the
                // tree's multiplicative depth
                if (pool[i].ct.level == 0) continue;
                Node leaf = fresh_leaf();
                Node out;
                out.ct = backend.mul(pool[i].ct, leaf.ct, keys.eval_key);
                out.plain.resize(slots);
                for (size_t k = 0; k < slots; ++k) out.plain[k] = pool[i].plain[k] * leaf.plain[k];
                pool[i] = std::move(out);
            } else {
                size_t j = pick();
                Node out;
                out.ct = backend.add(pool[i].ct, pool[j].ct);
                out.plain.resize(slots);
                for (size_t k = 0; k < slots; ++k) out.plain[k] = pool[i].plain[k] + pool[j].plain[k];
                pool[i] = std::move(out);
            }
        }

        const Node& final_node = pool[pick()];
        he::PlainVector dec = backend.decrypt(keys.secret_key, final_node.ct);
        ++result.trees;
        for (size_t k = 0; k < slots && k < dec.size(); ++k) {
            double err = std::abs(dec.values[k] - final_node.plain[k]);
            result.worst_error = std::max(result.worst_error, err);
            if (final_node.ct.error_bound > 0.0) {
                result.worst_margin = std::max(result.worst_margin, err / final_node.ct.error_bound);
            }
            if (err > final_node.ct.error_bound) {
                ++result.violations;
                if (result.first_failure.empty()) {
                    result.first_failure = "tree " + std::to_string(t) + " slot " +
                                           std::to_string(k) + ": err " + std::to_string(err) +
                                           " > bound " + std::to_string(final_node.ct.error_bound);
                }
                break;
            }
        }
    }
    return result;
}

} // namespace repsim::testing
