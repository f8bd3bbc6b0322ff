// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "repsim/he/backend.hpp"
#include "repsim/identity/types.hpp"
#include "repsim/protocol/evidence.hpp"
#include "repsim/protocol/message.hpp"
#include "repsim/protocol/signature.hpp"
#include "repsim/reputation/state.hpp"

namespace repsim::protocol {

/// Records crypto operations that are not backend primitives (signatures,
/// the transcrypt composite). Implemented by the harness; entities see it as
/// an optional sink.
class CryptoScribe {
  public:
    virtual ~CryptoScribe() = default;
    virtual void op(const std::string& name) = 0;
    virtual void composite_begin(const std::string& name) = 0;
    virtual void composite_end() = 0;
};

struct CompositeGuard {
    CryptoScribe* scribe;
    CompositeGuard(CryptoScribe* s, const std::string& name) : scribe(s) {
        if (scribe) scribe->composite_begin(name);
    }
    ~CompositeGuard() {
        if (scribe) scribe->composite_end();
    }
};

/// Public knowledge every entity is provisioned with at setup.
struct EntityContext {
    Bytes authority_verify_key;
    int64_t epoch_length = 100;
    int64_t pseudonym_validity_epochs = 10;
    size_t rating_dims = 2;
    reputation::SystemProfile profile;
    reputation::BootstrapPrior prior;
    CryptoScribe* scribe = nullptr;

    bool pseudonym_valid(const identity::Pseudonym& p, int64_t now_tick) const {
        if (!verify_detached(authority_verify_key, p.signed_bytes(), p.authority_signature)) {
            return false;
        }
        return now_tick / epoch_length - p.epoch < pseudonym_validity_epochs;
    }
};

class Entity {
  public:
    virtual ~Entity() = default;
    virtual std::string handle() const = 0;
    virtual std::vector<Message> handle_message(const Message& m) = 0;
};

inline Message make_msg(MsgKind kind, const std::string& sender, const std::string& receiver,
                        const std::string& session, nlohmann::json payload) {
    Message m;
    m.kind = kind;
    m.sender = sender;
    m.receiver = receiver;
    m.session_id = session;
    m.payload = std::move(payload);
    return m;
}

// ---------------------------------------------------------------------------
// Key manager: generates and custodies the per-votee key pairs, bridges keys
// by transcryption, and is the only decryption-capable party. It sees
// plaintext scores while transcrypting; audit reports flag that exposure.
// ---------------------------------------------------------------------------
class KeyManager final : public Entity {
  public:
    KeyManager(he::Backend& backend, EntityContext& ctx, uint64_t seed)
        : backend_(backend), ctx_(ctx), rng_(seed, "key-manager") {}

    std::string handle() const override { return kKeyManagerId; }

    std::vector<Message> handle_message(const Message& m) override {
        switch (m.kind) {
            case MsgKind::key_request: return on_key_request(m);
            case MsgKind::transcrypt_request: return on_transcrypt(m);
            case MsgKind::threshold_request: return on_threshold_request(m);
            case MsgKind::query_response: return on_query_response(m);
            default:
                fail(Errc::malformed_payload,
                     std::string("key manager cannot handle ") + kind_name(m.kind));
        }
    }

    /// Reporting-surface decryption (also the threshold path): applies the
    /// monotone floor when the profile forbids decreasing scores.
    reputation::RatingVector finalize_state(const std::string& votee,
                                            const reputation::ReputationState& st) {
        const he::KeyMaterial& km = keys_.at(votee);
        reputation::RatingVector raw =
            reputation::finalize_score(backend_, st, km.secret_key);
        if (!ctx_.profile.non_monotonicity) {
            auto& floor = floors_[votee];
            floor.resize(raw.dims.size(), 0.0);
            for (size_t i = 0; i < raw.dims.size(); ++i) {
                raw.dims[i] = std::max(raw.dims[i], floor[i]);
                floor[i] = raw.dims[i];
            }
        }
        return raw;
    }

    bool has_keys(const std::string& votee) const { return keys_.count(votee) > 0; }

  private:
    std::vector<Message> on_key_request(const Message& m) {
        const std::string votee = m.payload.at("votee").get<std::string>();
        const he::KeyMaterial& km = ensure_keys(votee);
        return {make_msg(MsgKind::key_response, handle(), m.sender, m.session_id,
                         {{"votee", votee},
                          {"key_id", km.key_id},
                          {"public_key", to_base64(km.public_key.material)},
                          {"eval_key", to_base64(km.eval_key.material)}})};
    }

    // Decrypt-then-re-encrypt under the target votee's key, reduced to the
    // scalar weight form. One composite "transcrypt" crypto op.
    std::vector<Message> on_transcrypt(const Message& m) {
        he::Ciphertext n = he::Ciphertext::from_json(m.payload.at("numerator"));
        he::Ciphertext d = he::Ciphertext::from_json(m.payload.at("denominator"));
        const std::string target = m.payload.at("target_votee").get<std::string>();
        if (n.key_id != d.key_id) fail(Errc::key_mismatch, "pair under different keys");
        auto src = key_by_id_.find(n.key_id);
        if (src == key_by_id_.end()) fail(Errc::key_mismatch, "unknown source key");
        const he::KeyMaterial& source = keys_.at(src->second);
        const he::KeyMaterial& dest = ensure_keys(target);

        CompositeGuard guard(ctx_.scribe, "transcrypt");
        he::PlainVector nv = backend_.decrypt(source.secret_key, n);
        he::PlainVector dv = backend_.decrypt(source.secret_key, d);
        reputation::RatingVector score;
        score.dims.resize(nv.size());
        for (size_t i = 0; i < nv.size(); ++i) {
            double den = i < dv.size() ? dv.values[i] : 0.0;
            score.dims[i] = den > 0.0 ? std::clamp(nv.values[i] / den, 0.0, 1.0) : 0.0;
        }
        double weight = reputation::scalar_weight(score);
        he::Ciphertext out = backend_.encrypt(
            dest.public_key, he::PlainVector(std::vector<double>(ctx_.rating_dims, weight)));

        return {make_msg(MsgKind::transcrypt_response, handle(), m.sender, m.session_id,
                         {{"status", "ok"}, {"weight", out.to_json()}, {"target_votee", target}})};
    }

    std::vector<Message> on_threshold_request(const Message& m) {
        identity::Pseudonym requester =
            identity::Pseudonym::from_json(m.payload.at("requester"));
        if (!ctx_.pseudonym_valid(requester, m.tick)) {
            return {make_msg(MsgKind::threshold_response, handle(), m.sender, m.session_id,
                             {{"status", "rejected"}, {"reason", "InvalidPseudonym"}})};
        }
        const std::string votee = m.payload.at("votee").get<std::string>();
        std::string corr = "thq-" + rng_.hex(24);
        pending_thresholds_[corr] =
            PendingThreshold{m.sender, m.session_id, votee,
                             m.payload.at("threshold").get<double>()};
        return {make_msg(MsgKind::query_request, handle(), kRepManagerId, corr,
                         {{"votee", votee}})};
    }

    std::vector<Message> on_query_response(const Message& m) {
        auto it = pending_thresholds_.find(m.session_id);
        if (it == pending_thresholds_.end()) {
            fail(Errc::unknown_session, "query response for unknown threshold query");
        }
        PendingThreshold pend = it->second;
        pending_thresholds_.erase(it);
        if (m.payload.at("status").get<std::string>() != "ok") {
            return {make_msg(MsgKind::threshold_response, handle(), pend.requester,
                             pend.session_id,
                             {{"status", "rejected"},
                              {"reason", m.payload.value("reason", "QueryFailed")}})};
        }
        uint64_t version = m.payload.at("version").get<uint64_t>();
        if (version < 2) {
            // bootstrap-only state: nothing has been rated yet
            return {make_msg(MsgKind::threshold_response, handle(), pend.requester,
                             pend.session_id,
                             {{"status", "rejected"}, {"reason", "EmptyState"}})};
        }
        reputation::ReputationState st;
        st.numerator = he::Ciphertext::from_json(m.payload.at("numerator"));
        st.denominator = he::Ciphertext::from_json(m.payload.at("denominator"));
        st.votee_key_id = st.numerator.key_id;
        st.version = version;
        reputation::RatingVector score = finalize_state(pend.votee, st);
        // exact reputation blinding: only the boolean leaves this entity
        bool result = reputation::scalar_weight(score) >= pend.threshold;
        return {make_msg(MsgKind::threshold_response, handle(), pend.requester, pend.session_id,
                         {{"status", "ok"}, {"result", result}, {"version", version}})};
    }

    const he::KeyMaterial& ensure_keys(const std::string& votee) {
        auto it = keys_.find(votee);
        if (it == keys_.end()) {
            he::KeyMaterial km = backend_.keygen();
            key_by_id_[km.key_id] = votee;
            it = keys_.emplace(votee, std::move(km)).first;
        }
        return it->second;
    }

    struct PendingThreshold {
        std::string requester;
        std::string session_id;
        std::string votee;
        double threshold;
    };

    he::Backend& backend_;
    EntityContext& ctx_;
    Rng rng_;
    std::map<std::string, he::KeyMaterial> keys_;    // votee anchor -> keys
    std::map<std::string, std::string> key_by_id_;   // key_id -> votee anchor
    std::map<std::string, std::vector<double>> floors_; // monotone profile floors
    std::map<std::string, PendingThreshold> pending_thresholds_;
};

// ---------------------------------------------------------------------------
// Reputation manager: stores encrypted state, redeems one-time tokens, and
// applies signed updates. Holds ciphertexts only, never a secret key.
// ---------------------------------------------------------------------------
class ReputationManager final : public Entity {
  public:
    ReputationManager(he::Backend& backend, EntityContext& ctx, uint64_t seed)
        : backend_(backend), ctx_(ctx), rng_(seed, "rep-manager") {}

    std::string handle() const override { return kRepManagerId; }

    void register_engine(const std::string& engine_id, Bytes public_key) {
        engine_keys_[engine_id] = std::move(public_key);
    }

    /// Out-of-band provisioning from the authority at mint time. The manager
    /// learns token -> record binding; it never learns which session the
    /// token will authorize.
    void install_token(const std::string& token_id, const std::string& ref,
                       const std::string& anchor) {
        tokens_[token_id] = TokenEntry{ref, anchor, false};
    }

    const std::map<std::string, reputation::ReputationState>& states() const { return states_; }

    std::vector<Message> handle_message(const Message& m) override {
        switch (m.kind) {
            case MsgKind::rep_request: return on_rep_request(m);
            case MsgKind::key_response: return on_key_response(m);
            case MsgKind::transcrypt_response: return on_transcrypt_response(m);
            case MsgKind::reputation_update: return on_update(m);
            case MsgKind::query_request: return on_query(m);
            default:
                fail(Errc::malformed_payload,
                     std::string("reputation manager cannot handle ") + kind_name(m.kind));
        }
    }

  private:
    struct TokenEntry {
        std::string ref;
        std::string anchor;
        bool redeemed;
    };

    struct Pending {
        Message original; // re-dispatched once the provisioning leg completes
    };

    std::vector<Message> on_rep_request(const Message& m) {
        const std::string purpose = m.payload.value("purpose", "rating");
        if (purpose == "redemption") return serve_redemption(m);
        return serve_rating_rep(m);
    }

    // Step 3 of the rating flow: hand the voter the votee's current
    // reputation in weight form, refreshed through the key manager.
    std::vector<Message> serve_rating_rep(const Message& m) {
        const std::string votee = m.payload.at("votee").get<std::string>();
        if (auto leg = ensure_state(votee, m)) return {std::move(*leg)};
        const reputation::ReputationState& st = states_.at(votee);
        std::string corr = "wrf-" + rng_.hex(24);
        pending_weight_[corr] = Pending{m};
        return {make_msg(MsgKind::transcrypt_request, handle(), kKeyManagerId, corr,
                         {{"numerator", st.numerator.to_json()},
                          {"denominator", st.denominator.to_json()},
                          {"target_votee", votee},
                          {"form", "weight"}})};
    }

    // Step 5, manager side: redeem the token and hand out the bound record.
    // The response carries the voter's encrypted pair; the engine does the
    // transcryption itself, so no message here ever carries both the token
    // and a votee pseudonym.
    std::vector<Message> serve_redemption(const Message& m) {
        const std::string token_id = m.payload.at("token_id").get<std::string>();
        auto it = tokens_.find(token_id);
        if (it == tokens_.end()) {
            return {reject(MsgKind::rep_response, m, "UnknownToken")};
        }
        if (it->second.redeemed) {
            return {reject(MsgKind::rep_response, m, "AlreadyRedeemed")};
        }
        const std::string anchor = it->second.anchor;
        if (auto leg = ensure_state(anchor, m)) return {std::move(*leg)};
        it->second.redeemed = true; // atomic under the single-threaded manager
        const reputation::ReputationState& st = states_.at(anchor);
        return {make_msg(MsgKind::rep_response, handle(), m.sender, m.session_id,
                         {{"status", "ok"},
                          {"ref", it->second.ref},
                          {"record",
                           {{"numerator", st.numerator.to_json()},
                            {"denominator", st.denominator.to_json()}}},
                          {"version", st.version}})};
    }

    std::vector<Message> on_key_response(const Message& m) {
        auto it = pending_keys_.find(m.session_id);
        if (it == pending_keys_.end()) fail(Errc::unknown_session, "unexpected key response");
        Pending pend = it->second;
        pending_keys_.erase(it);
        const std::string votee = m.payload.at("votee").get<std::string>();
        he::PublicKey pk{m.payload.at("key_id").get<std::string>(),
                         from_base64(m.payload.at("public_key").get<std::string>())};
        public_keys_[votee] = pk;
        return handle_message(pend.original);
    }

    std::vector<Message> on_transcrypt_response(const Message& m) {
        auto it = pending_weight_.find(m.session_id);
        if (it == pending_weight_.end()) fail(Errc::unknown_session, "unexpected transcrypt response");
        Pending pend = it->second;
        pending_weight_.erase(it);
        const std::string votee = pend.original.payload.at("votee").get<std::string>();
        const reputation::ReputationState& st = states_.at(votee);
        return {make_msg(MsgKind::rep_response, handle(), pend.original.sender,
                         pend.original.session_id,
                         {{"status", "ok"},
                          {"votee", votee},
                          {"reputation", m.payload.at("weight")},
                          {"version", st.version}})};
    }

    // Step 9: verify the engine signature, enforce one-time authorization and
    // per-votee serialization, then fold the update into the running pair.
    std::vector<Message> on_update(const Message& m) {
        const nlohmann::json& signed_part = m.payload.at("signed");
        const std::string votee = signed_part.at("votee").get<std::string>();
        const std::string engine_id = signed_part.at("engine_id").get<std::string>();
        const std::string auth_id = m.payload.at("auth_id").get<std::string>();
        he::Ciphertext s = he::Ciphertext::from_json(signed_part.at("s"));
        he::Ciphertext w = he::Ciphertext::from_json(signed_part.at("w"));
        uint64_t version = signed_part.at("version").get<uint64_t>();

        auto key = engine_keys_.find(engine_id);
        if (key == engine_keys_.end()) {
            return {reject(MsgKind::reputation_update, m, "UnknownEngine")};
        }
        if (ctx_.scribe) ctx_.scribe->op("verify");
        std::string bytes = rating_signing_bytes(s, w, m.session_id, votee, version);
        if (!verify_detached(key->second, bytes, from_base64(signed_part.at("signature").get<std::string>()))) {
            return {reject(MsgKind::reputation_update, m, "SignatureMismatch")};
        }
        if (!seen_auth_.insert(auth_id).second) {
            return {reject(MsgKind::reputation_update, m, "ReplayedAuthorization")};
        }
        auto st = states_.find(votee);
        if (st == states_.end()) {
            return {reject(MsgKind::reputation_update, m, "UnknownVotee")};
        }
        if (version != st->second.version + 1) {
            return {reject(MsgKind::reputation_update, m, "VersionConflict")};
        }
        st->second = reputation::update_state(backend_, st->second, s, w);
        return {make_msg(MsgKind::reputation_update, handle(), m.sender, m.session_id,
                         {{"status", "applied"}, {"votee", votee}, {"version", st->second.version}})};
    }

    // Global visibility: the stored envelopes are returned verbatim, so two
    // requesters at the same version get byte-identical payloads.
    std::vector<Message> on_query(const Message& m) {
        const std::string votee = m.payload.at("votee").get<std::string>();
        if (m.sender != kKeyManagerId) {
            if (!m.payload.contains("requester") ||
                !ctx_.pseudonym_valid(identity::Pseudonym::from_json(m.payload.at("requester")),
                                      m.tick)) {
                return {reject(MsgKind::query_response, m, "InvalidPseudonym")};
            }
        }
        if (auto leg = ensure_state(votee, m)) return {std::move(*leg)};
        const reputation::ReputationState& st = states_.at(votee);
        return {make_msg(MsgKind::query_response, handle(), m.sender, m.session_id,
                         {{"status", "ok"},
                          {"votee", votee},
                          {"numerator", st.numerator.to_json()},
                          {"denominator", st.denominator.to_json()},
                          {"version", st.version}})};
    }

    // Lazily bootstraps a record. Returns a provisioning message when the
    // votee's public key still has to be fetched.
    std::optional<Message> ensure_state(const std::string& votee, const Message& original) {
        if (states_.count(votee)) return std::nullopt;
        auto pk = public_keys_.find(votee);
        if (pk == public_keys_.end()) {
            std::string corr = "prov-" + rng_.hex(24);
            pending_keys_[corr] = Pending{original};
            return make_msg(MsgKind::key_request, handle(), kKeyManagerId, corr,
                            {{"votee", votee}});
        }
        reputation::BootstrapPrior prior =
            reputation::bootstrap_reputation(ctx_.profile, ctx_.prior);
        states_[votee] =
            reputation::bootstrap_state(backend_, pk->second, prior, ctx_.rating_dims);
        return std::nullopt;
    }

    Message reject(MsgKind kind, const Message& m, const std::string& reason) {
        return make_msg(kind, handle(), m.sender, m.session_id,
                        {{"status", "rejected"}, {"reason", reason}});
    }

    he::Backend& backend_;
    EntityContext& ctx_;
    Rng rng_;
    std::map<std::string, reputation::ReputationState> states_; // votee anchor -> state
    std::map<std::string, he::PublicKey> public_keys_;
    std::map<std::string, TokenEntry> tokens_;
    std::map<std::string, Bytes> engine_keys_;
    std::set<std::string> seen_auth_;
    std::map<std::string, Pending> pending_keys_;
    std::map<std::string, Pending> pending_weight_;
};

// ---------------------------------------------------------------------------
// Reputation engine: stateless combiner. Holds neither secret keys nor
// reputation state across sessions; everything it learns about a session is
// dropped once the signed rating leaves.
// ---------------------------------------------------------------------------
class ReputationEngine final : public Entity {
  public:
    ReputationEngine(std::string id, he::Backend& backend, EntityContext& ctx, uint64_t seed)
        : id_(std::move(id)), backend_(backend), ctx_(ctx), rng_(seed, id_) {
        signing_key_ = make_signing_key(rng_);
    }

    std::string handle() const override { return id_; }
    const Bytes& verify_key() const { return signing_key_.public_key; }

    std::vector<Message> handle_message(const Message& m) override {
        switch (m.kind) {
            case MsgKind::rating_submission: return on_submission(m);
            case MsgKind::key_response: return on_key_response(m);
            case MsgKind::rep_response: return on_redemption_response(m);
            case MsgKind::transcrypt_response: return on_transcrypt_response(m);
            case MsgKind::self_rating_response: return on_self_rating(m);
            default:
                fail(Errc::malformed_payload,
                     std::string("engine cannot handle ") + kind_name(m.kind));
        }
    }

  private:
    struct Session {
        std::string voter;
        std::string votee;
        he::Ciphertext s_r;
        he::Ciphertext r_e;
        uint64_t base_version = 0;
        std::string token_id;
        std::string auth_id;
        bool want_self_rating = false;
        std::optional<he::PublicKey> votee_pk;
        std::optional<he::EvalKey> votee_ek;
        std::optional<he::Ciphertext> r_r;
        std::optional<he::Ciphertext> s_e;
    };

    std::vector<Message> on_submission(const Message& m) {
        Session s;
        s.voter = m.sender;
        s.votee = m.payload.at("votee").get<std::string>();
        s.s_r = he::Ciphertext::from_json(m.payload.at("s_r"));
        s.r_e = he::Ciphertext::from_json(m.payload.at("r_e"));
        s.base_version = m.payload.at("version").get<uint64_t>();
        s.token_id = m.payload.at("token_id").get<std::string>();
        s.auth_id = m.payload.at("auth_id").get<std::string>();
        s.want_self_rating = m.payload.at("self_rating").get<bool>();
        sessions_[m.session_id] = s;
        std::string corr = "prov-" + rng_.hex(24);
        corr_session_[corr] = m.session_id;
        return {make_msg(MsgKind::key_request, id_, kKeyManagerId, corr,
                         {{"votee", s.votee}})};
    }

    std::vector<Message> on_key_response(const Message& m) {
        std::string session_id = take_corr(m.session_id);
        Session& s = session(session_id);
        s.votee_pk = he::PublicKey{m.payload.at("key_id").get<std::string>(),
                                   from_base64(m.payload.at("public_key").get<std::string>())};
        s.votee_ek = he::EvalKey{m.payload.at("key_id").get<std::string>(),
                                 from_base64(m.payload.at("eval_key").get<std::string>())};
        // redeem the one-time token under a correlator of its own
        std::string corr = "red-" + rng_.hex(24);
        corr_session_[corr] = session_id;
        return {make_msg(MsgKind::rep_request, id_, kRepManagerId, corr,
                         {{"purpose", "redemption"}, {"token_id", s.token_id}})};
    }

    std::vector<Message> on_redemption_response(const Message& m) {
        std::string session_id = take_corr(m.session_id);
        Session& s = session(session_id);
        if (m.payload.at("status").get<std::string>() != "ok") {
            Session copy = s;
            drop(session_id);
            return abort_with(copy, session_id,
                              "RedemptionRejected:" + m.payload.value("reason", "?"));
        }
        // voter's encrypted pair, still under the voter's key: bridge it
        return {make_msg(MsgKind::transcrypt_request, id_, kKeyManagerId, session_id,
                         {{"numerator", m.payload.at("record").at("numerator")},
                          {"denominator", m.payload.at("record").at("denominator")},
                          {"target_votee", s.votee},
                          {"form", "weight"}})};
    }

    std::vector<Message> on_transcrypt_response(const Message& m) {
        Session& s = session(m.session_id);
        s.r_r = he::Ciphertext::from_json(m.payload.at("weight"));
        if (s.want_self_rating) {
            return {make_msg(MsgKind::self_rating_request, id_, s.votee, m.session_id,
                             {{"votee", s.votee},
                              {"key_id", s.votee_pk->key_id},
                              {"public_key", to_base64(s.votee_pk->material)},
                              {"dims", ctx_.rating_dims}})};
        }
        return finish(m.session_id);
    }

    std::vector<Message> on_self_rating(const Message& m) {
        auto it = sessions_.find(m.session_id);
        if (it == sessions_.end()) {
            fail(Errc::unknown_session, "self rating for unknown session " + m.session_id);
        }
        it->second.s_e = he::Ciphertext::from_json(m.payload.at("s_e"));
        return finish(m.session_id);
    }

    std::vector<Message> finish(const std::string& session_id) {
        Session s = session(session_id);
        drop(session_id);
        reputation::CombineResult combined;
        try {
            combined = reputation::combine_encrypted(backend_, s.s_r, s.s_e, *s.r_r, s.r_e,
                                                     *s.votee_ek);
        } catch (const Error& e) {
            if (e.code() == Errc::depth_exhausted) {
                return abort_with(s, session_id, "DepthViolation");
            }
            throw;
        }
        uint64_t version = s.base_version + 1;
        if (ctx_.scribe) ctx_.scribe->op("sign");
        Bytes sig = sign_detached(
            signing_key_,
            rating_signing_bytes(combined.s, combined.w, session_id, s.votee, version));
        return {make_msg(MsgKind::signed_rating, id_, s.voter, session_id,
                         {{"status", "ok"},
                          {"votee", s.votee},
                          {"s", combined.s.to_json()},
                          {"w", combined.w.to_json()},
                          {"version", version},
                          {"signature", to_base64(sig)},
                          {"engine_id", id_}})};
    }

    std::vector<Message> abort_with(const Session& s, const std::string& session_id,
                                    const std::string& reason) {
        return {make_msg(MsgKind::signed_rating, id_, s.voter, session_id,
                         {{"status", "rejected"}, {"reason", reason}, {"votee", s.votee},
                          {"engine_id", id_}})};
    }

    Session& session(const std::string& id) {
        auto it = sessions_.find(id);
        if (it == sessions_.end()) fail(Errc::unknown_session, "no session " + id);
        return it->second;
    }

    void drop(const std::string& id) { sessions_.erase(id); }

    std::string take_corr(const std::string& corr) {
        auto it = corr_session_.find(corr);
        if (it == corr_session_.end()) fail(Errc::unknown_session, "unexpected correlator " + corr);
        std::string session = it->second;
        corr_session_.erase(it);
        return session;
    }

    std::string id_;
    he::Backend& backend_;
    EntityContext& ctx_;
    Rng rng_;
    SigningKey signing_key_;
    std::map<std::string, Session> sessions_;      // in-flight only
    std::map<std::string, std::string> corr_session_;
};

} // namespace repsim::protocol
