// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repsim/protocol/entities.hpp"
#include "repsim/reputation/rating.hpp"

namespace repsim::protocol {

/// Scripted deviations. A malicious-but-cautious party is modeled by the
/// detectable deviation it would leave behind, not by a strategy.
enum class Misbehavior {
    none,
    token_replay,
    ticket_replay,      // handled at the authority (re-spend attempt)
    ciphertext_tamper,  // voter flips a ciphertext byte after the engine signed
    forged_signature,   // voter swaps in a junk signature
    double_spend_race,  // handled at the authority (back-to-back spends)
    depth_violation,    // voter burns the rating ciphertext's levels
};

inline const char* misbehavior_name(Misbehavior m) {
    switch (m) {
        case Misbehavior::none: return "none";
        case Misbehavior::token_replay: return "token_replay";
        case Misbehavior::ticket_replay: return "ticket_replay";
        case Misbehavior::ciphertext_tamper: return "ciphertext_tamper";
        case Misbehavior::forged_signature: return "forged_signature";
        case Misbehavior::double_spend_race: return "double_spend_race";
        case Misbehavior::depth_violation: return "depth_violation";
    }
    return "?";
}

inline Misbehavior misbehavior_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Misbehavior::depth_violation); ++i) {
        if (s == misbehavior_name(static_cast<Misbehavior>(i))) return static_cast<Misbehavior>(i);
    }
    fail(Errc::schema_violation, "unknown misbehavior '" + s + "'");
}

struct RatingOutcome {
    std::string session_id;
    std::string votee;
    bool applied = false;
    std::string reason;
    uint64_t version = 0;
    std::optional<RatingReceipt> receipt;
};

struct QueryOutcome {
    std::string correlator;
    bool ok = false;
    std::string reason;
    nlohmann::json payload;
};

/// A business acting through its pseudonyms: drives rating sessions as a
/// voter, answers self-rating requests as a votee, and issues queries as a
/// requester. Holds its own self-rating source and nothing about anyone else.
class BusinessNode final : public Entity {
  public:
    BusinessNode(std::string anchor_handle, he::Backend& backend, EntityContext& ctx)
        : anchor_(std::move(anchor_handle)), backend_(backend), ctx_(ctx) {}

    std::string handle() const override { return anchor_; }

    void set_self_rating(reputation::RatingVector source, bool verified) {
        self_source_ = std::move(source);
        self_verified_ = verified;
    }
    bool has_self_rating() const { return self_source_.has_value(); }

    void set_departed(bool departed) { departed_ = departed; }
    bool departed() const { return departed_; }

    Message start_rating(const std::string& session_id, const std::string& votee_anchor,
                         const std::string& voter_pseudonym,
                         const identity::SessionAuthorization& auth,
                         const identity::AccessToken& token,
                         const reputation::RatingVector& rating, const std::string& engine,
                         bool with_self_rating, Misbehavior mis) {
        rating.validate_unit_range();
        Active a;
        a.session_id = session_id;
        a.votee = votee_anchor;
        a.voter_pseudonym = voter_pseudonym;
        a.rating = rating;
        a.engine = engine;
        a.token_id = token.token_id;
        a.auth_id = auth.auth_id;
        a.self_rating = with_self_rating;
        a.mis = mis;
        active_[session_id] = std::move(a);
        return make_msg(MsgKind::key_request, voter_pseudonym, kKeyManagerId, session_id,
                        {{"votee", votee_anchor}});
    }

    Message start_query(const std::string& correlator, const std::string& requester_json_handle,
                        const identity::Pseudonym& requester, const std::string& votee_anchor,
                        std::optional<double> threshold) {
        queries_[correlator] = QueryOutcome{correlator, false, "pending", {}};
        if (threshold) {
            return make_msg(MsgKind::threshold_request, requester_json_handle, kKeyManagerId,
                            correlator,
                            {{"votee", votee_anchor},
                             {"threshold", *threshold},
                             {"requester", requester.to_json()}});
        }
        return make_msg(MsgKind::query_request, requester_json_handle, kRepManagerId, correlator,
                        {{"votee", votee_anchor}, {"requester", requester.to_json()}});
    }

    std::vector<Message> handle_message(const Message& m) override {
        if (departed_) return {}; // a departed business stops responding
        switch (m.kind) {
            case MsgKind::key_response: return on_key_response(m);
            case MsgKind::rep_response: return on_rep_response(m);
            case MsgKind::signed_rating: return on_signed_rating(m);
            case MsgKind::reputation_update: return on_update_ack(m);
            case MsgKind::self_rating_request: return on_self_rating_request(m);
            case MsgKind::query_response: return on_query_result(m, MsgKind::query_response);
            case MsgKind::threshold_response: return on_query_result(m, MsgKind::threshold_response);
            default:
                fail(Errc::malformed_payload,
                     std::string("business node cannot handle ") + kind_name(m.kind));
        }
    }

    std::optional<RatingOutcome> take_rating_outcome(const std::string& session_id) {
        auto it = outcomes_.find(session_id);
        if (it == outcomes_.end()) return std::nullopt;
        RatingOutcome out = it->second;
        outcomes_.erase(it);
        return out;
    }

    std::optional<QueryOutcome> take_query_outcome(const std::string& correlator) {
        auto it = queries_.find(correlator);
        if (it == queries_.end() || it->second.reason == "pending") return std::nullopt;
        QueryOutcome out = it->second;
        queries_.erase(it);
        return out;
    }

  private:
    struct Active {
        std::string session_id;
        std::string votee;
        std::string voter_pseudonym;
        reputation::RatingVector rating;
        std::string engine;
        std::string token_id;
        std::string auth_id;
        bool self_rating = false;
        Misbehavior mis = Misbehavior::none;
        he::Ciphertext s_r;
        std::optional<he::PublicKey> votee_pk;
        std::optional<he::EvalKey> votee_ek;
        std::optional<Message> submission; // kept verbatim for token replay
        std::optional<RatingReceipt> receipt;
        bool replay_emitted = false;
    };

    std::vector<Message> on_key_response(const Message& m) {
        Active& a = active(m.session_id);
        a.votee_pk = he::PublicKey{m.payload.at("key_id").get<std::string>(),
                                   from_base64(m.payload.at("public_key").get<std::string>())};
        a.votee_ek = he::EvalKey{m.payload.at("key_id").get<std::string>(),
                                 from_base64(m.payload.at("eval_key").get<std::string>())};
        a.s_r = backend_.encrypt(*a.votee_pk, he::PlainVector(a.rating.dims));
        if (a.mis == Misbehavior::depth_violation) {
            // drain the multiplicative budget so the engine's combine step
            // trips DepthExhausted
            while (a.s_r.level > 0) {
                he::Ciphertext ones = backend_.encrypt(
                    *a.votee_pk,
                    he::PlainVector(std::vector<double>(a.rating.dims.size(), 1.0)));
                a.s_r = backend_.mul(a.s_r, ones, *a.votee_ek);
            }
        }
        return {make_msg(MsgKind::rep_request, a.voter_pseudonym, kRepManagerId, m.session_id,
                         {{"purpose", "rating"}, {"votee", a.votee}})};
    }

    std::vector<Message> on_rep_response(const Message& m) {
        Active& a = active(m.session_id);
        if (m.payload.at("status").get<std::string>() != "ok") {
            finish(a, false, "RepRequestRejected:" + m.payload.value("reason", "?"), 0, {});
            return {};
        }
        Message submission = make_msg(
            MsgKind::rating_submission, a.voter_pseudonym, a.engine, m.session_id,
            {{"votee", a.votee},
             {"s_r", a.s_r.to_json()},
             {"r_e", m.payload.at("reputation")},
             {"version", m.payload.at("version")},
             {"token_id", a.token_id},
             {"auth_id", a.auth_id},
             {"self_rating", a.self_rating}});
        if (a.mis == Misbehavior::token_replay) a.submission = submission;
        return {submission};
    }

    std::vector<Message> on_signed_rating(const Message& m) {
        Active& a = active(m.session_id);
        if (m.payload.at("status").get<std::string>() != "ok") {
            finish(a, false, m.payload.value("reason", "rejected"), 0, {});
            return {};
        }
        nlohmann::json signed_part{{"votee", m.payload.at("votee")},
                                   {"s", m.payload.at("s")},
                                   {"w", m.payload.at("w")},
                                   {"version", m.payload.at("version")},
                                   {"signature", m.payload.at("signature")},
                                   {"engine_id", m.payload.at("engine_id")}};
        RatingReceipt receipt;
        receipt.session_id = m.session_id;
        receipt.votee_pseudonym = m.payload.at("votee").get<std::string>();
        receipt.version = m.payload.at("version").get<uint64_t>();
        receipt.s = he::Ciphertext::from_json(m.payload.at("s"));
        receipt.w = he::Ciphertext::from_json(m.payload.at("w"));
        receipt.engine_id = m.payload.at("engine_id").get<std::string>();
        receipt.signature = from_base64(m.payload.at("signature").get<std::string>());
        a.receipt = receipt;

        if (a.mis == Misbehavior::ciphertext_tamper) {
            he::Ciphertext s = he::Ciphertext::from_json(signed_part.at("s"));
            s.payload[0] ^= 0xff;
            signed_part["s"] = s.to_json();
        } else if (a.mis == Misbehavior::forged_signature) {
            Bytes junk(receipt.signature.size(), 0x5a);
            signed_part["signature"] = to_base64(junk);
        }
        return {make_msg(MsgKind::reputation_update, a.voter_pseudonym, kRepManagerId,
                         m.session_id, {{"signed", signed_part}, {"auth_id", a.auth_id}})};
    }

    std::vector<Message> on_update_ack(const Message& m) {
        Active& a = active(m.session_id);
        bool applied = m.payload.at("status").get<std::string>() == "applied";
        std::vector<Message> out;
        if (applied && a.mis == Misbehavior::token_replay && !a.replay_emitted && a.submission) {
            a.replay_emitted = true;
            out.push_back(*a.submission); // byte-for-byte resubmission
        }
        finish(a, applied, applied ? "" : m.payload.value("reason", "rejected"),
               applied ? m.payload.at("version").get<uint64_t>() : 0, a.receipt);
        return out;
    }

    std::vector<Message> on_self_rating_request(const Message& m) {
        if (!self_source_) return {}; // nothing to report; harness never asks in this case
        he::PublicKey pk{m.payload.at("key_id").get<std::string>(),
                         from_base64(m.payload.at("public_key").get<std::string>())};
        he::Ciphertext s_e = backend_.encrypt(pk, he::PlainVector(self_source_->dims));
        return {make_msg(MsgKind::self_rating_response, anchor_, m.sender, m.session_id,
                         {{"s_e", s_e.to_json()}, {"verified", self_verified_}})};
    }

    std::vector<Message> on_query_result(const Message& m, MsgKind) {
        auto it = queries_.find(m.session_id);
        if (it == queries_.end()) fail(Errc::unknown_session, "unexpected query response");
        it->second.ok = m.payload.at("status").get<std::string>() == "ok";
        it->second.reason = it->second.ok ? "" : m.payload.value("reason", "rejected");
        it->second.payload = m.payload;
        return {};
    }

    void finish(Active& a, bool applied, const std::string& reason, uint64_t version,
                std::optional<RatingReceipt> receipt) {
        RatingOutcome out;
        out.session_id = a.session_id;
        out.votee = a.votee;
        out.applied = applied;
        out.reason = reason;
        out.version = version;
        out.receipt = std::move(receipt);
        outcomes_[a.session_id] = std::move(out);
    }

    Active& active(const std::string& session_id) {
        auto it = active_.find(session_id);
        if (it == active_.end()) fail(Errc::unknown_session, "no active session " + session_id);
        return it->second;
    }

    std::string anchor_;
    he::Backend& backend_;
    EntityContext& ctx_;
    bool departed_ = false;
    std::optional<reputation::RatingVector> self_source_;
    bool self_verified_ = false;
    std::map<std::string, Active> active_;
    std::map<std::string, RatingOutcome> outcomes_;
    std::map<std::string, QueryOutcome> queries_;
};

} // namespace repsim::protocol
