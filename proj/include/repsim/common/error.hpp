// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace repsim {

enum class Errc {
    // he_backend
    invalid_params,
    key_mismatch,
    depth_exhausted,
    vector_too_long,
    length_mismatch,
    corrupted_payload,
    // identity
    duplicate_registration,
    unknown_business,
    self_contract,
    unknown_ticket,
    already_spent,
    expired_pseudonym,
    expired_ticket,
    invalid_pseudonym,
    already_redeemed,
    unknown_token,
    departed,
    // reputation
    empty_state,
    empty_history,
    rejected_by_profile,
    // protocol
    no_engines,
    unknown_session,
    unknown_votee,
    malformed_payload,
    bad_signature,
    version_conflict,
    replayed_authorization,
    // harness
    schema_violation,
    dangling_rating,
    unsupported_visibility,
    gap_detected,
    order_violation,
    log_mismatch,
    io_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_params: return "InvalidParams";
        case Errc::key_mismatch: return "KeyMismatch";
        case Errc::depth_exhausted: return "DepthExhausted";
        case Errc::vector_too_long: return "VectorTooLong";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::corrupted_payload: return "CorruptedPayload";
        case Errc::duplicate_registration: return "DuplicateRegistration";
        case Errc::unknown_business: return "UnknownBusiness";
        case Errc::self_contract: return "SelfContract";
        case Errc::unknown_ticket: return "UnknownTicket";
        case Errc::already_spent: return "AlreadySpent";
        case Errc::expired_pseudonym: return "ExpiredPseudonym";
        case Errc::expired_ticket: return "ExpiredTicket";
        case Errc::invalid_pseudonym: return "InvalidPseudonym";
        case Errc::already_redeemed: return "AlreadyRedeemed";
        case Errc::unknown_token: return "UnknownToken";
        case Errc::departed: return "Departed";
        case Errc::empty_state: return "EmptyState";
        case Errc::empty_history: return "EmptyHistory";
        case Errc::rejected_by_profile: return "RejectedByProfile";
        case Errc::no_engines: return "NoEngines";
        case Errc::unknown_session: return "UnknownSession";
        case Errc::unknown_votee: return "UnknownVotee";
        case Errc::malformed_payload: return "MalformedPayload";
        case Errc::bad_signature: return "BadSignature";
        case Errc::version_conflict: return "VersionConflict";
        case Errc::replayed_authorization: return "ReplayedAuthorization";
        case Errc::schema_violation: return "SchemaViolation";
        case Errc::dangling_rating: return "DanglingRating";
        case Errc::unsupported_visibility: return "UnsupportedVisibility";
        case Errc::gap_detected: return "GapDetected";
        case Errc::order_violation: return "OrderViolation";
        case Errc::log_mismatch: return "LogMismatch";
        case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace repsim
