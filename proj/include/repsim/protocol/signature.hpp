// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>

#include <sodium.h>

#include "repsim/common/bytes.hpp"
#include "repsim/common/error.hpp"
#include "repsim/common/rng.hpp"

namespace repsim {

// Ed25519 detached signatures (deterministic given key and message).
// Key pairs are derived from the run's seeded stream so whole runs replay
// bit-for-bit.

struct SigningKey {
    Bytes secret; // crypto_sign_SECRETKEYBYTES
    Bytes public_key;
};

inline void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) fail(Errc::io_error, "libsodium failed to initialize");
}

inline SigningKey make_signing_key(Rng& rng) {
    ensure_sodium();
    Bytes seed(crypto_sign_SEEDBYTES);
    for (auto& b : seed) b = static_cast<uint8_t>(rng.next_u64());
    SigningKey key;
    key.secret.resize(crypto_sign_SECRETKEYBYTES);
    key.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    crypto_sign_seed_keypair(key.public_key.data(), key.secret.data(), seed.data());
    return key;
}

inline Bytes sign_detached(const SigningKey& key, const std::string& message) {
    ensure_sodium();
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr,
                         reinterpret_cast<const unsigned char*>(message.data()), message.size(),
                         key.secret.data());
    return sig;
}

inline bool verify_detached(std::span<const uint8_t> public_key, const std::string& message,
                            std::span<const uint8_t> signature) {
    ensure_sodium();
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) {
        return false;
    }
    return crypto_sign_verify_detached(signature.data(),
                                       reinterpret_cast<const unsigned char*>(message.data()),
                                       message.size(), public_key.data()) == 0;
}

} // namespace repsim
