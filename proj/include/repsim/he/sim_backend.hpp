// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "repsim/common/rng.hpp"
#include "repsim/he/backend.hpp"

namespace repsim::he {

/// Deterministic stand-in for the lattice scheme. It keeps the working
/// plaintext inside an obfuscated payload (keystream XOR + integrity tag, not
/// real cryptography), injects seeded pseudo-random error of at most epsilon
/// per operation, and enforces the full backend contract: key discipline,
/// level accounting, probabilistic payloads.
///
/// Error-bound composition (documented formula for this backend):
///   encrypt:      bound = eps
///   add:          bound = bound_a + bound_b
///   mul:          bound = bound_a + bound_b + eps
///   scalar add:   bound = bound_a + eps
///   scalar mul:   bound = bound_a * max|p| + eps
/// Plaintext multiplication consumes no depth.
class SimBackend final : public Backend {
  public:
    explicit SimBackend(HeParams params, uint64_t seed = 1)
        : Backend(params), rng_(seed, "he-sim") {}

    KeyMaterial keygen() override {
        notify(CryptoOp::keygen, "");
        KeyMaterial km;
        km.key_id = "key-" + std::to_string(next_key_index_++) + "-" + rng_.hex(8);
        Bytes secret(32);
        for (auto& b : secret) b = static_cast<uint8_t>(rng_.next_u64());
        km.secret_key = {km.key_id, secret};
        Bytes pub(16);
        for (auto& b : pub) b = static_cast<uint8_t>(rng_.next_u64());
        km.public_key = {km.key_id, pub};
        Bytes eval(16);
        for (auto& b : eval) b = static_cast<uint8_t>(rng_.next_u64());
        km.eval_key = {km.key_id, eval};
        secrets_[km.key_id] = secret;
        return km;
    }

    Ciphertext encrypt(const PublicKey& pk, const PlainVector& pt) override {
        if (pt.size() > params_.slot_count) {
            fail(Errc::vector_too_long,
                 "plaintext has " + std::to_string(pt.size()) + " slots, limit " +
                     std::to_string(params_.slot_count));
        }
        pt.check_finite();
        notify(CryptoOp::encrypt, pk.key_id);
        Slots s;
        s.exact = pt.values;
        s.err.resize(pt.size());
        for (auto& e : s.err) e = rng_.symmetric(params_.epsilon);
        return seal(pk.key_id, params_.depth_budget, params_.epsilon, s);
    }

    PlainVector decrypt(const SecretKey& sk, const Ciphertext& ct) override {
        if (sk.key_id != ct.key_id) {
            fail(Errc::key_mismatch, "decrypt with key " + sk.key_id + " on ciphertext under " + ct.key_id);
        }
        notify(CryptoOp::decrypt, ct.key_id);
        Slots s = open_with(sk.material, ct);
        PlainVector out;
        out.values.resize(s.exact.size());
        for (size_t i = 0; i < s.exact.size(); ++i) out.values[i] = s.exact[i] + s.err[i];
        return out;
    }

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) override {
        require_same_key(a, b, "he_add");
        notify(CryptoOp::he_add, a.key_id);
        Slots sa = open(a), sb = open(b);
        size_t n = std::max(sa.exact.size(), sb.exact.size());
        Slots out;
        out.exact.assign(n, 0.0);
        out.err.assign(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            out.exact[i] = at(sa.exact, i) + at(sb.exact, i);
            out.err[i] = at(sa.err, i) + at(sb.err, i);
        }
        return seal(a.key_id, std::min(a.level, b.level), a.error_bound + b.error_bound, out);
    }

    Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const EvalKey& ek) override {
        require_same_key(a, b, "he_mul");
        if (ek.key_id != a.key_id) {
            fail(Errc::key_mismatch, "eval key " + ek.key_id + " does not match ciphertext key " + a.key_id);
        }
        unsigned lvl = std::min(a.level, b.level);
        if (lvl == 0) fail(Errc::depth_exhausted, "multiplicative depth exhausted");
        notify(CryptoOp::he_mul, a.key_id);
        Slots sa = open(a), sb = open(b);
        size_t n = std::max(sa.exact.size(), sb.exact.size());
        Slots out;
        out.exact.assign(n, 0.0);
        out.err.assign(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            out.exact[i] = at(sa.exact, i) * at(sb.exact, i);
            out.err[i] = at(sa.err, i) + at(sb.err, i) + rng_.symmetric(params_.epsilon);
        }
        return seal(a.key_id, lvl - 1, a.error_bound + b.error_bound + params_.epsilon, out);
    }

    Ciphertext scalar(ScalarOp op, const Ciphertext& a, const PlainVector& p) override {
        Slots sa = open(a);
        if (p.size() != sa.exact.size()) {
            fail(Errc::length_mismatch, "plain operand has " + std::to_string(p.size()) +
                                            " slots, ciphertext uses " + std::to_string(sa.exact.size()));
        }
        p.check_finite();
        notify(CryptoOp::he_scalar, a.key_id);
        Slots out = sa;
        double bound;
        if (op == ScalarOp::add) {
            for (size_t i = 0; i < out.exact.size(); ++i) {
                out.exact[i] += p.values[i];
                out.err[i] += rng_.symmetric(params_.epsilon);
            }
            bound = a.error_bound + params_.epsilon;
        } else {
            double pmax = 0.0;
            for (size_t i = 0; i < out.exact.size(); ++i) {
                out.exact[i] *= p.values[i];
                out.err[i] = out.err[i] * p.values[i] + rng_.symmetric(params_.epsilon);
                pmax = std::max(pmax, std::abs(p.values[i]));
            }
            bound = a.error_bound * pmax + params_.epsilon;
        }
        return seal(a.key_id, a.level, bound, out);
    }

    unsigned scalar_mul_depth_cost() const override { return 0; }

  private:
    struct Slots {
        std::vector<double> exact;
        std::vector<double> err;
    };

    static double at(const std::vector<double>& v, size_t i) { return i < v.size() ? v[i] : 0.0; }

    static void require_same_key(const Ciphertext& a, const Ciphertext& b, const char* what) {
        if (a.key_id != b.key_id) {
            fail(Errc::key_mismatch,
                 std::string(what) + " across keys " + a.key_id + " and " + b.key_id);
        }
    }

    const Bytes& secret_for(const std::string& key_id) const {
        auto it = secrets_.find(key_id);
        if (it == secrets_.end()) {
            fail(Errc::key_mismatch, "key " + key_id + " is not known to this backend");
        }
        return it->second;
    }

    static void put_u64(Bytes& out, uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    static uint64_t get_u64(const Bytes& in, size_t off) {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[off + i]) << (8 * i);
        return v;
    }

    static void xor_stream(Bytes& body, const Bytes& secret, uint64_t nonce) {
        Bytes seed_input = secret;
        put_u64(seed_input, nonce);
        uint64_t x = fnv1a64(seed_input);
        uint64_t word = 0;
        int avail = 0;
        for (auto& b : body) {
            if (avail == 0) {
                uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
                z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
                z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
                word = z ^ (z >> 31);
                avail = 8;
            }
            b ^= static_cast<uint8_t>(word);
            word >>= 8;
            --avail;
        }
    }

    static uint64_t tag_of(const Bytes& secret, uint64_t nonce, const Bytes& body) {
        Bytes t = secret;
        put_u64(t, nonce);
        t.insert(t.end(), body.begin(), body.end());
        return fnv1a64(t);
    }

    Ciphertext seal(const std::string& key_id, unsigned level, double bound, const Slots& s) {
        const Bytes& secret = secret_for(key_id);
        uint64_t nonce = rng_.next_u64();
        Bytes body;
        put_u64(body, s.exact.size());
        for (double v : s.exact) {
            uint64_t bits;
            std::memcpy(&bits, &v, 8);
            put_u64(body, bits);
        }
        for (double v : s.err) {
            uint64_t bits;
            std::memcpy(&bits, &v, 8);
            put_u64(body, bits);
        }
        xor_stream(body, secret, nonce);
        Ciphertext ct;
        ct.key_id = key_id;
        ct.level = level;
        ct.error_bound = bound;
        put_u64(ct.payload, nonce);
        ct.payload.insert(ct.payload.end(), body.begin(), body.end());
        put_u64(ct.payload, tag_of(secret, nonce, body));
        return ct;
    }

    Slots open(const Ciphertext& ct) const { return open_with(secret_for(ct.key_id), ct); }

    Slots open_with(const Bytes& secret, const Ciphertext& ct) const {
        if (ct.payload.size() < 24) fail(Errc::corrupted_payload, "payload truncated");
        uint64_t nonce = get_u64(ct.payload, 0);
        Bytes body(ct.payload.begin() + 8, ct.payload.end() - 8);
        uint64_t tag = get_u64(ct.payload, ct.payload.size() - 8);
        if (tag != tag_of(secret, nonce, body)) {
            fail(Errc::corrupted_payload, "integrity tag mismatch");
        }
        xor_stream(body, secret, nonce);
        uint64_t used = get_u64(body, 0);
        if (body.size() != 8 + used * 16) fail(Errc::corrupted_payload, "slot count inconsistent");
        Slots s;
        s.exact.resize(used);
        s.err.resize(used);
        for (size_t i = 0; i < used; ++i) {
            uint64_t bits = get_u64(body, 8 + 8 * i);
            std::memcpy(&s.exact[i], &bits, 8);
            bits = get_u64(body, 8 + 8 * (used + i));
            std::memcpy(&s.err[i], &bits, 8);
        }
        return s;
    }

    Rng rng_;
    uint64_t next_key_index_ = 0;
    std::map<std::string, Bytes> secrets_;
};

} // namespace repsim::he
