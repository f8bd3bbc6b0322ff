// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "repsim/common/bytes.hpp"

namespace repsim::identity {

/// Long-term legal identity. Lives exclusively inside the authority's state;
/// it must never appear in any other entity's transcript.
struct BusinessId {
    std::string id;
    std::string jurisdiction;

    bool operator==(const BusinessId& o) const { return id == o.id; }
};

/// Temporary handle a business acts under. The handle-to-business mapping
/// exists only inside the authority.
struct Pseudonym {
    std::string handle;
    int64_t epoch = 0; // epoch of issuance; validity window is config-driven
    Bytes authority_signature;

    nlohmann::json to_json() const {
        return {{"handle", handle},
                {"epoch", epoch},
                {"authority_signature", to_base64(authority_signature)}};
    }

    static Pseudonym from_json(const nlohmann::json& j) {
        return {j.at("handle").get<std::string>(), j.at("epoch").get<int64_t>(),
                from_base64(j.at("authority_signature").get<std::string>())};
    }

    std::string signed_bytes() const { return handle + "|" + std::to_string(epoch); }
};

/// Single-use voting authorization, issued when a contract is established.
struct VotingTicket {
    std::string ticket_id;
    std::string voter_pseudonym;
    std::string votee_pseudonym;
    std::string contract_digest;
    bool spent = false;
    int64_t issued_tick = 0;
};

/// One-time credential that lets a reputation engine fetch the voter's
/// encrypted reputation record without learning who the voter is.
struct AccessToken {
    std::string token_id;
    std::string bound_reputation_ref; // opaque; resolvable only by the manager
    bool redeemed = false;
};

struct ContractEvent {
    BusinessId party_a;
    BusinessId party_b;
    std::string metadata;
    int64_t timestamp = 0;
};

/// Result of spending a ticket: references the votee only.
struct SessionAuthorization {
    std::string auth_id;
    std::string votee_pseudonym;
    std::string contract_digest;
    int64_t tick = 0;
};

struct AuthorityConfig {
    int64_t epoch_length = 100;            // logical ticks per epoch
    int64_t pseudonym_validity_epochs = 10;
    int64_t ticket_validity_ticks = 1000;  // "recent business relationship" window
};

} // namespace repsim::identity
