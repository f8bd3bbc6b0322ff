// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once
#if REPSIM_HAVE_LATTICE

#include <algorithm>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "repsim/he/backend.hpp"
#include "repsim/he/lattice_ring.hpp"

namespace repsim::he {

/// RLWE backend with approximate fixed-point arithmetic over packed real
/// slots: ring Z_q[X]/(X^n+1), scale 2^40, modulus chain q_l = q0 * scale^l,
/// relinearization by modulus raising, one rescale per multiplication.
///
/// Parameters are deliberately tiny (n >= 32) so the full protocol suite can
/// run against real ring arithmetic; they carry NO security level. Production
/// parameter selection is out of scope.
///
/// Error-bound composition (documented formula for this backend, with M the
/// tracked magnitude cap of a ciphertext):
///   encrypt:      bound = eps,               M = max|pt| + eps
///   add:          bound = Ba + Bb,           M = Ma + Mb
///   mul:          bound = Ba*Mb + Bb*Ma + Ba*Bb + eps,   M = Ma*Mb
///   scalar add:   bound = Ba + eps,          M = Ma + max|p|
///   scalar mul:   bound = Ba*max|p| + eps*(1 + Ma*max|p|), M = Ma*max|p|
/// Plaintext multiplication consumes one level (it rescales).
/// Actual noise at these parameters sits orders of magnitude below eps, so
/// eps >= 1e-8 is enforced for the tracked bound to stay truthful.
class LatticeBackend final : public Backend {
  public:
    explicit LatticeBackend(HeParams params, uint64_t seed = 1)
        : Backend(params), rng_(seed, "he-lattice") {
        if (params_.epsilon < 1e-8) {
            fail(Errc::invalid_params, "lattice backend requires epsilon >= 1e-8");
        }
        ring_n_ = 32;
        while (ring_n_ / 2 < params_.slot_count) ring_n_ *= 2;
        scale_ = 1.0;
        mpz_class delta(1);
        delta <<= kScaleBits;
        scale_ = delta.get_d();
        moduli_.resize(params_.depth_budget + 1);
        mpz_class q0(1);
        q0 <<= kBaseBits;
        for (unsigned l = 0; l <= params_.depth_budget; ++l) {
            moduli_[l] = q0;
            q0 <<= kScaleBits;
        }
        relin_p_ = moduli_.back();
        encoder_ = std::make_unique<lattice::Encoder>(ring_n_, scale_);
    }

    KeyMaterial keygen() override {
        notify(CryptoOp::keygen, "");
        const mpz_class& q = top_modulus();
        mpz_class pq = relin_p_ * q;

        lattice::Poly s = lattice::sample_ternary(ring_n_, rng_);
        lattice::Poly a = lattice::sample_uniform(ring_n_, q, rng_);
        lattice::Poly e = lattice::sample_noise(ring_n_, q, rng_);
        // pk = (b, a) with b = -a*s + e
        lattice::Poly b = lattice::poly_add(negate(lattice::poly_mul(a, s, q), q), e, q);

        // evk = (b', a') over P*q with b' = -a'*s + e' + P*s^2
        lattice::Poly s2 = lattice::poly_mul(s, s, pq);
        lattice::Poly ap = lattice::sample_uniform(ring_n_, pq, rng_);
        lattice::Poly ep = lattice::sample_noise(ring_n_, pq, rng_);
        lattice::Poly bp = lattice::poly_add(negate(lattice::poly_mul(ap, s, pq), pq), ep, pq);
        for (size_t i = 0; i < ring_n_; ++i) {
            bp.c[i] = lattice::mod_canonical(bp.c[i] + relin_p_ * s2.c[i], pq);
        }

        KeyMaterial km;
        km.key_id = "key-" + std::to_string(next_key_index_++) + "-" + rng_.hex(8);
        km.secret_key = {km.key_id, to_bytes(serialize_secret(s))};
        km.public_key = {km.key_id, to_bytes(serialize_pair(b, a))};
        km.eval_key = {km.key_id, to_bytes(serialize_pair(bp, ap))};
        return km;
    }

    Ciphertext encrypt(const PublicKey& pk, const PlainVector& pt) override {
        if (pt.size() > params_.slot_count) {
            fail(Errc::vector_too_long, "plaintext exceeds slot_count");
        }
        pt.check_finite();
        notify(CryptoOp::encrypt, pk.key_id);
        const mpz_class& q = top_modulus();
        auto [b, a] = parse_pair(from_bytes(pk.material), q);

        lattice::Poly m = encoder_->encode(pt.values, q);
        lattice::Poly v = lattice::sample_ternary(ring_n_, rng_);
        lattice::Poly e0 = lattice::sample_noise(ring_n_, q, rng_);
        lattice::Poly e1 = lattice::sample_noise(ring_n_, q, rng_);
        lattice::Poly c0 = lattice::poly_add(lattice::poly_add(lattice::poly_mul(b, v, q), e0, q), m, q);
        lattice::Poly c1 = lattice::poly_add(lattice::poly_mul(a, v, q), e1, q);

        double maxabs = 0.0;
        for (double x : pt.values) maxabs = std::max(maxabs, std::abs(x));
        return seal(pk.key_id, params_.depth_budget, params_.epsilon, pt.size(),
                    maxabs + params_.epsilon, c0, c1);
    }

    PlainVector decrypt(const SecretKey& sk, const Ciphertext& ct) override {
        if (sk.key_id != ct.key_id) {
            fail(Errc::key_mismatch, "decrypt with key " + sk.key_id + " on ciphertext under " + ct.key_id);
        }
        notify(CryptoOp::decrypt, ct.key_id);
        Inner in = open(ct);
        const mpz_class& q = moduli_[ct.level];
        lattice::Poly s = parse_secret(from_bytes(sk.material));
        lattice::Poly m = lattice::poly_add(in.c0, lattice::poly_mul(in.c1, s, q), q);
        return PlainVector(encoder_->decode(m, q, in.used));
    }

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) override {
        require_same_key(a, b, "he_add");
        notify(CryptoOp::he_add, a.key_id);
        unsigned lvl = std::min(a.level, b.level);
        const mpz_class& q = moduli_[lvl];
        Inner ia = open_at(a, lvl), ib = open_at(b, lvl);
        Inner out;
        out.used = std::max(ia.used, ib.used);
        out.c0 = lattice::poly_add(ia.c0, ib.c0, q);
        out.c1 = lattice::poly_add(ia.c1, ib.c1, q);
        return seal(a.key_id, lvl, a.error_bound + b.error_bound, out.used, ia.mag + ib.mag,
                    out.c0, out.c1);
    }

    Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const EvalKey& ek) override {
        require_same_key(a, b, "he_mul");
        if (ek.key_id != a.key_id) {
            fail(Errc::key_mismatch, "eval key does not match ciphertext key");
        }
        unsigned lvl = std::min(a.level, b.level);
        if (lvl == 0) fail(Errc::depth_exhausted, "multiplicative depth exhausted");
        notify(CryptoOp::he_mul, a.key_id);
        const mpz_class& q = moduli_[lvl];
        mpz_class pq = relin_p_ * q;
        Inner ia = open_at(a, lvl), ib = open_at(b, lvl);
        auto [ekb, eka] = parse_pair(from_bytes(ek.material), pq);

        // tensor
        lattice::Poly d0 = lattice::poly_mul(ia.c0, ib.c0, q);
        lattice::Poly d1 = lattice::poly_add(lattice::poly_mul(ia.c0, ib.c1, q),
                                             lattice::poly_mul(ia.c1, ib.c0, q), q);
        lattice::Poly d2 = lattice::poly_mul(ia.c1, ib.c1, q);

        // relinearize d2 via the raised-modulus key, then divide by P
        lattice::Poly r0 = lattice::poly_mul(d2, ekb, pq);
        lattice::Poly r1 = lattice::poly_mul(d2, eka, pq);
        lattice::Poly c0(ring_n_), c1(ring_n_);
        for (size_t i = 0; i < ring_n_; ++i) {
            c0.c[i] = lattice::mod_canonical(
                d0.c[i] + lattice::div_round(lattice::center(r0.c[i], pq), relin_p_), q);
            c1.c[i] = lattice::mod_canonical(
                d1.c[i] + lattice::div_round(lattice::center(r1.c[i], pq), relin_p_), q);
        }

        // rescale from scale^2 back to scale, dropping one modulus rung
        mpz_class delta(1);
        delta <<= kScaleBits;
        const mpz_class& q_down = moduli_[lvl - 1];
        lattice::Poly o0 = lattice::poly_rescale(c0, q, delta, q_down);
        lattice::Poly o1 = lattice::poly_rescale(c1, q, delta, q_down);

        double bound = a.error_bound * ib.mag + b.error_bound * ia.mag +
                       a.error_bound * b.error_bound + params_.epsilon;
        return seal(a.key_id, lvl - 1, bound, std::max(ia.used, ib.used), ia.mag * ib.mag, o0, o1);
    }

    Ciphertext scalar(ScalarOp op, const Ciphertext& a, const PlainVector& p) override {
        Inner ia = open(a);
        if (p.size() != ia.used) {
            fail(Errc::length_mismatch, "plain operand length does not match used slots");
        }
        p.check_finite();
        notify(CryptoOp::he_scalar, a.key_id);
        const mpz_class& q = moduli_[a.level];
        double pmax = 0.0;
        for (double x : p.values) pmax = std::max(pmax, std::abs(x));

        if (op == ScalarOp::add) {
            lattice::Poly m = encoder_->encode(p.values, q);
            lattice::Poly c0 = lattice::poly_add(ia.c0, m, q);
            return seal(a.key_id, a.level, a.error_bound + params_.epsilon, ia.used,
                        ia.mag + pmax, c0, ia.c1);
        }

        if (a.level == 0) fail(Errc::depth_exhausted, "multiplicative depth exhausted");
        lattice::Poly m = encoder_->encode(p.values, q);
        mpz_class delta(1);
        delta <<= kScaleBits;
        const mpz_class& q_down = moduli_[a.level - 1];
        lattice::Poly c0 = lattice::poly_rescale(lattice::poly_mul(ia.c0, m, q), q, delta, q_down);
        lattice::Poly c1 = lattice::poly_rescale(lattice::poly_mul(ia.c1, m, q), q, delta, q_down);
        double bound = a.error_bound * pmax + params_.epsilon * (1.0 + ia.mag * pmax);
        return seal(a.key_id, a.level - 1, bound, ia.used, ia.mag * pmax, c0, c1);
    }

    unsigned scalar_mul_depth_cost() const override { return 1; }

  private:
    static constexpr int kScaleBits = 40;
    static constexpr int kBaseBits = 80;

    struct Inner {
        size_t used = 0;
        double mag = 0.0;
        lattice::Poly c0, c1;
    };

    const mpz_class& top_modulus() const { return moduli_[params_.depth_budget]; }

    lattice::Poly negate(const lattice::Poly& a, const mpz_class& q) const {
        lattice::Poly out(a.degree());
        for (size_t i = 0; i < a.degree(); ++i) out.c[i] = lattice::mod_canonical(-a.c[i], q);
        return out;
    }

    static void require_same_key(const Ciphertext& a, const Ciphertext& b, const char* what) {
        if (a.key_id != b.key_id) {
            fail(Errc::key_mismatch, std::string(what) + " across mismatched keys");
        }
    }

    static Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }
    static std::string from_bytes(const Bytes& b) { return std::string(b.begin(), b.end()); }

    std::string serialize_secret(const lattice::Poly& s) const {
        std::ostringstream os;
        os << ring_n_ << ";";
        for (size_t i = 0; i < s.degree(); ++i) {
            if (i) os << ",";
            os << s.c[i].get_si();
        }
        return os.str();
    }

    lattice::Poly parse_secret(const std::string& text) const {
        auto semi = text.find(';');
        if (semi == std::string::npos) fail(Errc::corrupted_payload, "secret key malformed");
        lattice::Poly s(ring_n_);
        size_t idx = 0, pos = semi + 1;
        while (pos <= text.size() && idx < ring_n_) {
            auto comma = text.find(',', pos);
            std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            s.c[idx++] = mpz_class(tok, 10);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (idx != ring_n_) fail(Errc::corrupted_payload, "secret key truncated");
        return s;
    }

    std::string serialize_pair(const lattice::Poly& x, const lattice::Poly& y) const {
        std::ostringstream os;
        os << ring_n_ << ";";
        append_poly(os, x);
        os << ";";
        append_poly(os, y);
        return os.str();
    }

    static void append_poly(std::ostringstream& os, const lattice::Poly& p) {
        for (size_t i = 0; i < p.degree(); ++i) {
            if (i) os << ",";
            os << p.c[i].get_str(16);
        }
    }

    std::pair<lattice::Poly, lattice::Poly> parse_pair(const std::string& text,
                                                       const mpz_class& q) const {
        auto first = text.find(';');
        auto second = text.find(';', first + 1);
        if (first == std::string::npos || second == std::string::npos) {
            fail(Errc::corrupted_payload, "key material malformed");
        }
        return {parse_poly(text.substr(first + 1, second - first - 1), q),
                parse_poly(text.substr(second + 1), q)};
    }

    lattice::Poly parse_poly(const std::string& text, const mpz_class& q) const {
        lattice::Poly p(ring_n_);
        size_t idx = 0, pos = 0;
        while (pos <= text.size() && idx < ring_n_) {
            auto comma = text.find(',', pos);
            std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            p.c[idx++] = lattice::mod_canonical(mpz_class(tok, 16), q);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (idx != ring_n_) fail(Errc::corrupted_payload, "polynomial truncated");
        return p;
    }

    Ciphertext seal(const std::string& key_id, unsigned level, double bound, size_t used,
                    double mag, const lattice::Poly& c0, const lattice::Poly& c1) {
        uint64_t mag_bits;
        std::memcpy(&mag_bits, &mag, 8);
        std::ostringstream os;
        os << used << ";" << hex_of(mag_bits) << ";";
        append_poly(os, c0);
        os << ";";
        append_poly(os, c1);
        std::string body = os.str();
        std::string tagged = body + ";" + hex_of(fnv1a64(body));
        Ciphertext ct;
        ct.key_id = key_id;
        ct.level = level;
        ct.error_bound = bound;
        ct.payload = to_bytes(tagged);
        return ct;
    }

    Inner open(const Ciphertext& ct) const { return open_at(ct, ct.level); }

    Inner open_at(const Ciphertext& ct, unsigned level) const {
        std::string text = from_bytes(ct.payload);
        auto tag_pos = text.rfind(';');
        if (tag_pos == std::string::npos) fail(Errc::corrupted_payload, "payload malformed");
        std::string body = text.substr(0, tag_pos);
        if (hex_of(fnv1a64(body)) != text.substr(tag_pos + 1)) {
            fail(Errc::corrupted_payload, "integrity tag mismatch");
        }
        auto p1 = body.find(';');
        auto p2 = body.find(';', p1 + 1);
        auto p3 = body.find(';', p2 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos) {
            fail(Errc::corrupted_payload, "payload malformed");
        }
        Inner in;
        in.used = std::stoul(body.substr(0, p1));
        uint64_t mag_bits = mpz_class(body.substr(p1 + 1, p2 - p1 - 1), 16).get_ui();
        std::memcpy(&in.mag, &mag_bits, 8);
        const mpz_class& q = moduli_[level];
        in.c0 = parse_poly(body.substr(p2 + 1, p3 - p2 - 1), q);
        in.c1 = parse_poly(body.substr(p3 + 1), q);
        return in;
    }

    Rng rng_;
    size_t ring_n_;
    double scale_;
    std::vector<mpz_class> moduli_;
    mpz_class relin_p_;
    std::unique_ptr<lattice::Encoder> encoder_;
    uint64_t next_key_index_ = 0;
};

} // namespace repsim::he

#endif // REPSIM_HAVE_LATTICE
