// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "repsim/common/bytes.hpp"
#include "repsim/protocol/message.hpp"
#include "repsim/protocol/signature.hpp"

namespace repsim::protocol {

enum class EvidenceKind {
    bad_signature,
    replayed_token,
    replayed_ticket,
    tampered_update,
    depth_violation,
};

inline const char* evidence_name(EvidenceKind k) {
    switch (k) {
        case EvidenceKind::bad_signature: return "BadSignature";
        case EvidenceKind::replayed_token: return "ReplayedToken";
        case EvidenceKind::replayed_ticket: return "ReplayedTicket";
        case EvidenceKind::tampered_update: return "TamperedUpdate";
        case EvidenceKind::depth_violation: return "DepthViolation";
    }
    return "?";
}

/// Misbehavior evidence. Every object must be re-checkable from the event
/// log alone: offending_seq points at the log lines that prove it.
struct Evidence {
    EvidenceKind kind;
    std::vector<uint64_t> offending_seq;
    std::string session_id;
    std::string note;

    nlohmann::json to_json() const {
        return {{"kind", evidence_name(kind)},
                {"offending_seq", offending_seq},
                {"session_id", session_id},
                {"note", note}};
    }
};

/// Engine-signed proof a rating session produced a particular update.
/// Sufficient to prove tampering afterwards, which is what deters a
/// malicious-but-cautious entity.
struct RatingReceipt {
    std::string session_id;
    std::string votee_pseudonym;
    uint64_t version = 0; // version the update produced
    he::Ciphertext s;
    he::Ciphertext w;
    std::string engine_id;
    Bytes signature;

    nlohmann::json to_json() const {
        return {{"session_id", session_id}, {"votee_pseudonym", votee_pseudonym},
                {"version", version},       {"s", s.to_json()},
                {"w", w.to_json()},         {"engine_id", engine_id},
                {"signature", to_base64(signature)}};
    }
};

struct VerifyOk {};
using VerifyResult = std::variant<VerifyOk, Evidence>;

inline VerifyResult verify_receipt(const RatingReceipt& r, std::span<const uint8_t> engine_pub) {
    std::string bytes =
        rating_signing_bytes(r.s, r.w, r.session_id, r.votee_pseudonym, r.version);
    if (verify_detached(engine_pub, bytes, r.signature)) return VerifyOk{};
    Evidence ev;
    ev.kind = EvidenceKind::bad_signature;
    ev.session_id = r.session_id;
    ev.note = "receipt signature does not verify against engine key";
    return ev;
}

} // namespace repsim::protocol
