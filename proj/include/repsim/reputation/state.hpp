// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "repsim/he/backend.hpp"
#include "repsim/reputation/profile.hpp"
#include "repsim/reputation/rating.hpp"

namespace repsim::reputation {

/// Per-votee encrypted running pair. The score is numerator/denominator, a
/// division that happens only at decryption time; homomorphically the state
/// only ever absorbs additions.
struct ReputationState {
    he::Ciphertext numerator;   // per-dimension weighted rating sum
    he::Ciphertext denominator; // weight sum, broadcast over the dimensions
    std::string votee_key_id;
    uint64_t version = 0;
};

struct BootstrapPrior {
    double value = 0.5;
    double weight = 1.0;
};

/// Newcomer prior; the paper-side catalog never defines one, so it is plain
/// configuration. Folded into (N, D) at state creation.
inline BootstrapPrior bootstrap_reputation(const SystemProfile&,
                                           std::optional<BootstrapPrior> configured = {}) {
    return configured.value_or(BootstrapPrior{});
}

inline ReputationState bootstrap_state(he::Backend& backend, const he::PublicKey& pk,
                                       const BootstrapPrior& prior, size_t dims) {
    std::vector<double> n(dims, prior.value * prior.weight);
    std::vector<double> d(dims, prior.weight);
    ReputationState st;
    st.numerator = backend.encrypt(pk, he::PlainVector(n));
    st.denominator = backend.encrypt(pk, he::PlainVector(d));
    st.votee_key_id = pk.key_id;
    st.version = 1;
    return st;
}

struct CombineResult {
    he::Ciphertext s; // weighted combined rating
    he::Ciphertext w; // weight total
};

/// S = R_r*S_r (+ R_e*S_e when the self-rating is present), W = R_r (+ R_e).
/// All inputs must sit under the votee's key; consumes exactly one level.
inline CombineResult combine_encrypted(he::Backend& backend, const he::Ciphertext& s_r,
                                       const std::optional<he::Ciphertext>& s_e,
                                       const he::Ciphertext& r_r, const he::Ciphertext& r_e,
                                       const he::EvalKey& ek) {
    if (s_r.key_id != r_r.key_id || r_e.key_id != r_r.key_id ||
        (s_e && s_e->key_id != r_r.key_id)) {
        fail(Errc::key_mismatch, "combine inputs are not all under the votee key");
    }
    CombineResult out;
    he::Ciphertext voter_part = backend.mul(r_r, s_r, ek);
    if (s_e) {
        he::Ciphertext votee_part = backend.mul(r_e, *s_e, ek);
        out.s = backend.add(voter_part, votee_part);
        out.w = backend.add(r_r, r_e);
    } else {
        out.s = voter_part;
        out.w = r_r;
    }
    return out;
}

inline ReputationState update_state(he::Backend& backend, const ReputationState& st,
                                    const he::Ciphertext& s, const he::Ciphertext& w) {
    if (s.key_id != st.votee_key_id || w.key_id != st.votee_key_id) {
        fail(Errc::key_mismatch, "update under wrong key");
    }
    ReputationState out;
    out.numerator = backend.add(st.numerator, s);
    out.denominator = backend.add(st.denominator, w);
    out.votee_key_id = st.votee_key_id;
    out.version = st.version + 1;
    return out;
}

/// Decryption-time division, clamped to [0,1] per dimension. Only the key
/// manager can call this at protocol level.
inline RatingVector finalize_score(he::Backend& backend, const ReputationState& st,
                                   const he::SecretKey& sk) {
    if (sk.key_id != st.votee_key_id) fail(Errc::key_mismatch, "finalize under wrong key");
    he::PlainVector n = backend.decrypt(sk, st.numerator);
    he::PlainVector d = backend.decrypt(sk, st.denominator);
    RatingVector score;
    score.dims.resize(n.size());
    for (size_t i = 0; i < n.size(); ++i) {
        double den = i < d.size() ? d.values[i] : 0.0;
        if (den <= st.denominator.error_bound + 1e-9) {
            fail(Errc::empty_state, "no weight accumulated yet");
        }
        score.dims[i] = std::clamp(n.values[i] / den, 0.0, 1.0);
    }
    return score;
}

/// Scalar weight form of a score: clamped mean over dimensions. This is what
/// "current reputation used as weight" means in the encrypted pipeline.
inline double scalar_weight(const RatingVector& score) {
    return std::clamp(score.mean(), 0.0, 1.0);
}

} // namespace repsim::reputation
