// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "repsim/he/ciphertext.hpp"
#include "repsim/he/params.hpp"

namespace repsim::he {

struct PublicKey {
    std::string key_id;
    Bytes material;
};

struct SecretKey {
    std::string key_id;
    Bytes material;
};

/// Relinearization material for ciphertext-ciphertext multiplication.
struct EvalKey {
    std::string key_id;
    Bytes material;
};

struct KeyMaterial {
    std::string key_id;
    PublicKey public_key;
    SecretKey secret_key;
    EvalKey eval_key;
};

struct NoiseReport {
    unsigned level;
    double error_bound;
};

enum class ScalarOp { add, mul };

/// Names of the primitive operations, used for tracing and benchmarks.
enum class CryptoOp { keygen, encrypt, decrypt, he_add, he_mul, he_scalar };

inline const char* op_name(CryptoOp op) {
    switch (op) {
        case CryptoOp::keygen: return "keygen";
        case CryptoOp::encrypt: return "encrypt";
        case CryptoOp::decrypt: return "decrypt";
        case CryptoOp::he_add: return "he_add";
        case CryptoOp::he_mul: return "he_mul";
        case CryptoOp::he_scalar: return "he_scalar";
    }
    return "?";
}

using OpObserver = std::function<void(CryptoOp, const std::string& key_id)>;

/// Contract every backend honors:
///  - decrypt(encrypt(x)) is within the ciphertext's tracked error_bound of x
///  - every ct-ct multiplication consumes exactly one level; DepthExhausted
///    is raised exactly when the level would go negative
///  - error_bound composes per the backend's documented formula and never
///    decreases along an operation chain
///  - all cross-key operations fail with KeyMismatch, never silent garbage
///  - encryption is probabilistic: equal plaintexts yield distinct payloads
/// Key material and ciphertexts are immutable values; operations are pure
/// given the backend's seeded randomness stream.
class Backend {
  public:
    virtual ~Backend() = default;

    const HeParams& params() const { return params_; }

    virtual KeyMaterial keygen() = 0;
    virtual Ciphertext encrypt(const PublicKey& pk, const PlainVector& pt) = 0;
    virtual PlainVector decrypt(const SecretKey& sk, const Ciphertext& ct) = 0;
    virtual Ciphertext add(const Ciphertext& a, const Ciphertext& b) = 0;
    virtual Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const EvalKey& ek) = 0;
    virtual Ciphertext scalar(ScalarOp op, const Ciphertext& a, const PlainVector& p) = 0;

    /// Levels a plaintext multiplication consumes (backend-documented rule).
    virtual unsigned scalar_mul_depth_cost() const = 0;

    NoiseReport noise_report(const Ciphertext& ct) const { return {ct.level, ct.error_bound}; }

    void set_observer(OpObserver obs) { observer_ = std::move(obs); }

  protected:
    explicit Backend(HeParams params) : params_(params) { params_.validate(); }

    void notify(CryptoOp op, const std::string& key_id) {
        if (observer_) observer_(op, key_id);
    }

    HeParams params_;
    OpObserver observer_;
};

} // namespace repsim::he
