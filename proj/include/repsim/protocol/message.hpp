// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "repsim/common/error.hpp"
#include "repsim/he/ciphertext.hpp"

namespace repsim::protocol {

inline constexpr const char* kKeyManagerId = "key-manager";
inline constexpr const char* kRepManagerId = "rep-manager";

enum class MsgKind {
    key_request,
    key_response,
    rep_request,
    rep_response,
    rating_submission,
    self_rating_request,
    self_rating_response,
    signed_rating,
    reputation_update,
    query_request,
    query_response,
    threshold_request,
    threshold_response,
    transcrypt_request,
    transcrypt_response,
};

inline const char* kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::key_request: return "KeyRequest";
        case MsgKind::key_response: return "KeyResponse";
        case MsgKind::rep_request: return "RepRequest";
        case MsgKind::rep_response: return "RepResponse";
        case MsgKind::rating_submission: return "RatingSubmission";
        case MsgKind::self_rating_request: return "SelfRatingRequest";
        case MsgKind::self_rating_response: return "SelfRatingResponse";
        case MsgKind::signed_rating: return "SignedRating";
        case MsgKind::reputation_update: return "ReputationUpdate";
        case MsgKind::query_request: return "QueryRequest";
        case MsgKind::query_response: return "QueryResponse";
        case MsgKind::threshold_request: return "ThresholdRequest";
        case MsgKind::threshold_response: return "ThresholdResponse";
        case MsgKind::transcrypt_request: return "TranscryptRequest";
        case MsgKind::transcrypt_response: return "TranscryptResponse";
    }
    return "?";
}

inline MsgKind kind_from_name(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(MsgKind::transcrypt_response); ++k) {
        if (s == kind_name(static_cast<MsgKind>(k))) return static_cast<MsgKind>(k);
    }
    fail(Errc::malformed_payload, "unknown message kind '" + s + "'");
}

/// Typed protocol message. Business-originated messages carry pseudonym
/// handles in sender/receiver, never business identities. session_id is an
/// unguessable correlator; deliberately NOT shared between a rating session
/// and its token-redemption leg (that separation is what keeps the
/// reputation manager from linking voter and votee).
struct Message {
    MsgKind kind = MsgKind::key_request;
    std::string sender;
    std::string receiver;
    std::string session_id;
    nlohmann::json payload;
    int64_t tick = 0;  // stamped by the bus
    uint64_t seq = 0;  // stamped by the bus

    nlohmann::json to_json() const {
        return {{"kind", kind_name(kind)}, {"sender", sender},   {"receiver", receiver},
                {"session_id", session_id}, {"payload", payload}, {"tick", tick},
                {"seq", seq}};
    }

    static Message from_json(const nlohmann::json& j) {
        Message m;
        m.kind = kind_from_name(j.at("kind").get<std::string>());
        m.sender = j.at("sender").get<std::string>();
        m.receiver = j.at("receiver").get<std::string>();
        m.session_id = j.at("session_id").get<std::string>();
        m.payload = j.at("payload");
        m.tick = j.at("tick").get<int64_t>();
        m.seq = j.at("seq").get<uint64_t>();
        return m;
    }
};

/// Canonical byte serialization of the signed rating tuple. nlohmann::json
/// orders object keys lexicographically, which fixes the field order.
inline std::string rating_signing_bytes(const he::Ciphertext& s, const he::Ciphertext& w,
                                        const std::string& session_id, const std::string& votee,
                                        uint64_t version) {
    nlohmann::json j{{"s", s.to_json()},
                     {"session_id", session_id},
                     {"version", version},
                     {"votee", votee},
                     {"w", w.to_json()}};
    return j.dump();
}

} // namespace repsim::protocol
