// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "repsim/common/error.hpp"
#include "repsim/common/rng.hpp"
#include "repsim/identity/types.hpp"
#include "repsim/protocol/signature.hpp"

namespace repsim::identity {

/// Registration, pseudonym and ticket issuance, one-time token minting.
///
/// This is the single serialization point of the identity fabric: spend and
/// mint are atomic check-and-set operations under one lock, and every issued
/// artifact is an immutable value afterwards. The pseudonym-to-business map
/// never leaves this class except through snapshot(), which the auditor
/// consumes under an explicit reveal flag.
///
/// Note: this artifact merges the pseudonym authority and the ticket issuer
/// into one entity; audit reports flag the merge.
class Authority {
  public:
    using ActionSink = std::function<void(const nlohmann::json&)>;

    Authority(uint64_t seed, AuthorityConfig config = {})
        : rng_(seed, "authority"), config_(config) {
        signing_key_ = make_signing_key(rng_);
    }

    void set_action_sink(ActionSink sink) { action_sink_ = std::move(sink); }

    const AuthorityConfig& config() const { return config_; }
    const Bytes& verify_key() const { return signing_key_.public_key; }

    int64_t epoch_of(int64_t tick) const { return tick / config_.epoch_length; }

    BusinessId register_business(const std::string& legal_identity,
                                 const std::string& jurisdiction = "") {
        std::lock_guard lock(mu_);
        if (by_legal_.count(legal_identity)) {
            fail(Errc::duplicate_registration, "identity already registered");
        }
        BusinessId id{"biz-" + rng_.hex(12), jurisdiction};
        Record rec;
        rec.legal_identity = legal_identity;
        rec.business = id;
        rec.anchor = sign_pseudonym("pn-" + rng_.hex(32), 0);
        records_[id.id] = rec;
        by_legal_[legal_identity] = id.id;
        handle_owner_[rec.anchor.handle] = id.id;
        anchors_.insert({rec.anchor.handle});
        emit({{"action", "register"},
              {"business_id", id.id},
              {"legal_identity", legal_identity},
              {"anchor", rec.anchor.handle}});
        return id;
    }

    /// Long-lived handle a business' reputation record is keyed by. Voter and
    /// requester pseudonyms rotate; this one persists so reputation survives
    /// epochs and departures.
    Pseudonym votee_anchor(const BusinessId& b) const {
        std::lock_guard lock(mu_);
        return record(b.id).anchor;
    }

    Pseudonym issue_pseudonym(const BusinessId& b, int64_t now_tick) {
        std::lock_guard lock(mu_);
        Record& rec = record_mut(b.id);
        if (rec.departed) fail(Errc::departed, "business has departed");
        Pseudonym p = sign_pseudonym("pn-" + rng_.hex(32), epoch_of(now_tick));
        rec.issued_handles.push_back(p.handle);
        handle_owner_[p.handle] = b.id;
        emit({{"action", "issue_pseudonym"},
              {"business_id", b.id},
              {"handle", p.handle},
              {"epoch", p.epoch}});
        return p;
    }

    /// Issues the two per-direction tickets for a freshly signed contract.
    std::pair<VotingTicket, VotingTicket> establish_contract(const ContractEvent& e) {
        std::lock_guard lock(mu_);
        if (e.party_a.id == e.party_b.id) fail(Errc::self_contract, "contract with self");
        Record& ra = record_mut(e.party_a.id);
        Record& rb = record_mut(e.party_b.id);
        if (ra.departed || rb.departed) fail(Errc::departed, "contract party has departed");

        std::string digest = digest_of("contract|" + e.metadata + "|" + std::to_string(e.timestamp) +
                                       "|" + rng_.hex(16));
        int64_t epoch = epoch_of(e.timestamp);
        Pseudonym voter_a = sign_pseudonym("pn-" + rng_.hex(32), epoch);
        Pseudonym voter_b = sign_pseudonym("pn-" + rng_.hex(32), epoch);
        ra.issued_handles.push_back(voter_a.handle);
        rb.issued_handles.push_back(voter_b.handle);
        handle_owner_[voter_a.handle] = e.party_a.id;
        handle_owner_[voter_b.handle] = e.party_b.id;

        VotingTicket t_ab{"tkt-" + rng_.hex(16), voter_a.handle, rb.anchor.handle, digest, false,
                          e.timestamp};
        VotingTicket t_ba{"tkt-" + rng_.hex(16), voter_b.handle, ra.anchor.handle, digest, false,
                          e.timestamp};
        tickets_[t_ab.ticket_id] = t_ab;
        tickets_[t_ba.ticket_id] = t_ba;
        pseudonym_epoch_[voter_a.handle] = epoch;
        pseudonym_epoch_[voter_b.handle] = epoch;
        emit({{"action", "contract"},
              {"party_a", e.party_a.id},
              {"party_b", e.party_b.id},
              {"contract_digest", digest},
              {"tickets", {t_ab.ticket_id, t_ba.ticket_id}},
              {"tick", e.timestamp}});
        return {t_ab, t_ba};
    }

    /// Atomic single-use spend. The authorization references the votee only.
    SessionAuthorization spend_ticket(const std::string& ticket_id, int64_t now_tick) {
        std::lock_guard lock(mu_);
        auto it = tickets_.find(ticket_id);
        if (it == tickets_.end()) {
            emit_spend_rejected(ticket_id, "UnknownTicket", now_tick);
            fail(Errc::unknown_ticket, "no such ticket");
        }
        VotingTicket& t = it->second;
        if (t.spent) {
            emit_spend_rejected(ticket_id, "AlreadySpent", now_tick);
            fail(Errc::already_spent, "ticket already spent");
        }
        auto ep = pseudonym_epoch_.find(t.voter_pseudonym);
        if (ep != pseudonym_epoch_.end() && !epoch_valid(ep->second, now_tick)) {
            emit_spend_rejected(ticket_id, "ExpiredPseudonym", now_tick);
            fail(Errc::expired_pseudonym, "voter pseudonym expired");
        }
        if (now_tick - t.issued_tick > config_.ticket_validity_ticks) {
            emit_spend_rejected(ticket_id, "ExpiredTicket", now_tick);
            fail(Errc::expired_ticket, "business relationship no longer recent");
        }
        t.spent = true;
        SessionAuthorization auth{"aut-" + rng_.hex(24), t.votee_pseudonym, t.contract_digest,
                                  now_tick};
        spent_auth_[auth.auth_id] = ticket_id;
        emit({{"action", "spend"},
              {"ticket_id", ticket_id},
              {"auth_id", auth.auth_id},
              {"tick", now_tick}});
        return auth;
    }

    struct MintedToken {
        AccessToken token;
        std::string anchor; // provisioned to the reputation manager, never to the redeemer
    };

    /// Mints a one-time access token bound to the requesting voter's
    /// reputation record. The token value has no structural relation to the
    /// pseudonym or the business.
    MintedToken mint_access_token(const Pseudonym& voter, int64_t now_tick) {
        std::lock_guard lock(mu_);
        auto owner = handle_owner_.find(voter.handle);
        if (owner == handle_owner_.end() || !signature_ok(voter)) {
            fail(Errc::invalid_pseudonym, "pseudonym not issued by this authority");
        }
        if (!anchors_.count(voter.handle) && !epoch_valid(voter.epoch, now_tick)) {
            fail(Errc::expired_pseudonym, "pseudonym expired");
        }
        const Record& rec = record(owner->second);
        AccessToken token{"tok-" + rng_.hex(32), "ref-" + rng_.hex(24), false};
        token_anchor_[token.token_id] = rec.anchor.handle;
        token_ref_[token.token_id] = token.bound_reputation_ref;
        emit({{"action", "mint_token"},
              {"token_id", token.token_id},
              {"ref", token.bound_reputation_ref},
              {"tick", now_tick}});
        return {token, rec.anchor.handle};
    }

    bool verify_pseudonym(const Pseudonym& p, int64_t now_tick) const {
        std::lock_guard lock(mu_);
        if (!signature_ok(p)) return false;
        if (anchors_.count(p.handle)) return true;
        return epoch_valid(p.epoch, now_tick);
    }

    void depart(const BusinessId& b, int64_t now_tick) {
        std::lock_guard lock(mu_);
        record_mut(b.id).departed = true;
        emit({{"action", "depart"}, {"business_id", b.id}, {"tick", now_tick}});
    }

    bool is_departed(const BusinessId& b) const {
        std::lock_guard lock(mu_);
        return record(b.id).departed;
    }

    /// Full state dump, secret mapping included. Auditor-only.
    nlohmann::json snapshot() const {
        std::lock_guard lock(mu_);
        nlohmann::json businesses = nlohmann::json::array();
        for (const auto& [id, rec] : records_) {
            businesses.push_back({{"business_id", id},
                                  {"legal_identity", rec.legal_identity},
                                  {"jurisdiction", rec.business.jurisdiction},
                                  {"anchor", rec.anchor.handle},
                                  {"departed", rec.departed},
                                  {"pseudonyms", rec.issued_handles}});
        }
        nlohmann::json tickets = nlohmann::json::array();
        for (const auto& [id, t] : tickets_) {
            tickets.push_back({{"ticket_id", id},
                               {"voter_pseudonym", t.voter_pseudonym},
                               {"votee_pseudonym", t.votee_pseudonym},
                               {"contract_digest", t.contract_digest},
                               {"spent", t.spent},
                               {"issued_tick", t.issued_tick}});
        }
        nlohmann::json tokens = nlohmann::json::array();
        for (const auto& [id, anchor] : token_anchor_) {
            tokens.push_back(
                {{"token_id", id}, {"anchor", anchor}, {"ref", token_ref_.at(id)}});
        }
        nlohmann::json auths = nlohmann::json::array();
        for (const auto& [auth, ticket] : spent_auth_) {
            auths.push_back({{"auth_id", auth}, {"ticket_id", ticket}});
        }
        return {{"verify_key", to_base64(signing_key_.public_key)},
                {"config",
                 {{"epoch_length", config_.epoch_length},
                  {"pseudonym_validity_epochs", config_.pseudonym_validity_epochs},
                  {"ticket_validity_ticks", config_.ticket_validity_ticks}}},
                {"businesses", businesses},
                {"tickets", tickets},
                {"tokens", tokens},
                {"authorizations", auths},
                {"merged_pseudonym_and_ticket_issuer", true}};
    }

  private:
    struct Record {
        std::string legal_identity;
        BusinessId business;
        Pseudonym anchor;
        bool departed = false;
        std::vector<std::string> issued_handles;
    };

    const Record& record(const std::string& id) const {
        auto it = records_.find(id);
        if (it == records_.end()) fail(Errc::unknown_business, "business not registered");
        return it->second;
    }

    Record& record_mut(const std::string& id) {
        auto it = records_.find(id);
        if (it == records_.end()) fail(Errc::unknown_business, "business not registered");
        return it->second;
    }

    Pseudonym sign_pseudonym(const std::string& handle, int64_t epoch) {
        Pseudonym p{handle, epoch, {}};
        p.authority_signature = sign_detached(signing_key_, p.signed_bytes());
        return p;
    }

    bool signature_ok(const Pseudonym& p) const {
        return verify_detached(signing_key_.public_key, p.signed_bytes(), p.authority_signature);
    }

    bool epoch_valid(int64_t issued_epoch, int64_t now_tick) const {
        int64_t now_epoch = epoch_of(now_tick);
        return now_epoch - issued_epoch < config_.pseudonym_validity_epochs;
    }

    void emit(nlohmann::json action) {
        if (action_sink_) action_sink_(action);
    }

    void emit_spend_rejected(const std::string& ticket_id, const char* reason, int64_t tick) {
        emit({{"action", "spend_rejected"},
              {"ticket_id", ticket_id},
              {"reason", reason},
              {"tick", tick}});
    }

    mutable std::mutex mu_;
    Rng rng_;
    AuthorityConfig config_;
    SigningKey signing_key_;
    ActionSink action_sink_;

    std::map<std::string, Record> records_;           // business_id -> record
    std::map<std::string, std::string> by_legal_;     // legal identity -> business_id
    std::map<std::string, std::string> handle_owner_; // pseudonym handle -> business_id
    std::map<std::string, int64_t> pseudonym_epoch_;  // ticket voter handles -> epoch
    std::set<std::string> anchors_;
    std::map<std::string, VotingTicket> tickets_;
    std::map<std::string, std::string> token_anchor_; // token -> anchor (secret)
    std::map<std::string, std::string> token_ref_;
    std::map<std::string, std::string> spent_auth_;   // auth_id -> ticket_id
};

} // namespace repsim::identity
