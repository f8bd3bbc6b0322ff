// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "repsim/common/bytes.hpp"
#include "repsim/harness/event_log.hpp"
#include "repsim/protocol/evidence.hpp"
#include "repsim/protocol/message.hpp"

namespace repsim::harness {

struct AuditCheck {
    std::string name;
    bool pass = true;
    std::vector<std::string> details;

    nlohmann::json to_json() const { return {{"name", name}, {"pass", pass}, {"details", details}}; }
};

/// Verifier output: per-property pass/fail plus independently re-checkable
/// evidence objects for every detected deviation.
struct AuditReport {
    std::vector<AuditCheck> checks;
    std::vector<protocol::Evidence> evidence;

    bool has_findings() const {
        if (!evidence.empty()) return true;
        return std::any_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return !c.pass; });
    }

    nlohmann::json to_json() const {
        nlohmann::json jc = nlohmann::json::array();
        for (const auto& c : checks) jc.push_back(c.to_json());
        nlohmann::json je = nlohmann::json::array();
        for (const auto& e : evidence) je.push_back(e.to_json());
        return {{"checks", jc}, {"evidence", je}, {"findings", has_findings()}};
    }
};

namespace detail {

struct MsgView {
    uint64_t seq;
    nlohmann::json msg; // kind, sender, receiver, session_id, payload
    std::string kind, sender, receiver, session;
    const nlohmann::json* payload;
};

inline std::vector<MsgView> collect_messages(const EventLog& log) {
    std::vector<MsgView> out;
    for (const auto& line : log.lines()) {
        if (line.value("kind", "") != "message") continue;
        MsgView v;
        v.seq = line.at("seq").get<uint64_t>();
        v.msg = line.at("message");
        v.kind = v.msg.at("kind").get<std::string>();
        v.sender = v.msg.at("sender").get<std::string>();
        v.receiver = v.msg.at("receiver").get<std::string>();
        v.session = v.msg.at("session_id").get<std::string>();
        out.push_back(std::move(v));
    }
    for (auto& v : out) v.payload = &v.msg.at("payload");
    return out;
}

inline bool rm_or_engine(const std::string& handle) {
    return handle == protocol::kRepManagerId || handle.rfind("engine-", 0) == 0;
}

// Numeric fields that legitimately appear in manager/engine traffic. Anything
// numeric outside this list, or any numeric array, is treated as a potential
// plaintext leak.
inline bool whitelisted_numeric_key(const std::string& key) {
    static const std::set<std::string> ok = {"level", "error_bound", "version",
                                             "epoch", "dims",        "tick",
                                             "seq"};
    return ok.count(key) > 0;
}

inline void scan_numbers(const nlohmann::json& node, const std::string& key,
                         std::vector<std::string>& hits, const std::string& where) {
    if (node.is_number()) {
        if (!whitelisted_numeric_key(key)) {
            hits.push_back(where + ": numeric field '" + key + "'");
        }
        return;
    }
    if (node.is_array()) {
        bool numeric = !node.empty() &&
                       std::all_of(node.begin(), node.end(),
                                   [](const nlohmann::json& x) { return x.is_number(); });
        if (numeric) {
            hits.push_back(where + ": numeric array under '" + key + "'");
            return;
        }
        for (const auto& item : node) scan_numbers(item, key, hits, where);
        return;
    }
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            scan_numbers(it.value(), it.key(), hits, where);
        }
    }
}

// Serialization of a log line with opaque blob fields blanked, so identity
// and handle greps only see structured values (an identity inside a
// ciphertext or signature blob is encoded and invisible to any grep anyway).
inline std::string scrubbed_dump(const nlohmann::json& line) {
    static const std::set<std::string> blob_keys = {
        "payload_b64", "payload", "signature", "public_key",
        "eval_key",    "verify_key", "authority_signature"};
    nlohmann::json copy = line;
    std::function<void(nlohmann::json&)> scrub = [&](nlohmann::json& node) {
        if (node.is_object()) {
            for (auto it = node.begin(); it != node.end(); ++it) {
                if (blob_keys.count(it.key()) && it.value().is_string()) {
                    it.value() = "";
                } else {
                    scrub(it.value());
                }
            }
        } else if (node.is_array()) {
            for (auto& item : node) scrub(item);
        }
    };
    scrub(copy);
    return copy.dump();
}

// response kinds mapped to the request kind they must follow
inline std::optional<protocol::MsgKind> request_of(protocol::MsgKind k) {
    using K = protocol::MsgKind;
    switch (k) {
        case K::key_response: return K::key_request;
        case K::rep_response: return K::rep_request;
        case K::self_rating_response: return K::self_rating_request;
        case K::query_response: return K::query_request;
        case K::threshold_response: return K::threshold_request;
        case K::transcrypt_response: return K::transcrypt_request;
        case K::signed_rating: return K::rating_submission;
        default: return std::nullopt;
    }
}

} // namespace detail

/// Per-correlator causal ordering: no response kind may outnumber its request
/// kind at any prefix of the log. Used both by the auditor and by replay's
/// OrderViolation detection.
inline std::vector<std::string> causality_violations(const EventLog& log) {
    std::vector<std::string> out;
    std::map<std::pair<std::string, std::string>, long> counts;
    for (const auto& v : detail::collect_messages(log)) {
        std::string kind = v.kind;
        std::string req;
        if (kind == "ReputationUpdate") {
            // same kind both ways; direction disambiguates request vs ack
            if (v.sender == protocol::kRepManagerId) {
                kind = "ReputationUpdateAck";
                req = "ReputationUpdateReq";
            } else {
                kind = "ReputationUpdateReq";
            }
        } else if (auto r = detail::request_of(protocol::kind_from_name(kind))) {
            req = protocol::kind_name(*r);
        }
        counts[{v.session, kind}]++;
        if (!req.empty() && counts[{v.session, kind}] > counts[{v.session, req}]) {
            out.push_back("seq " + std::to_string(v.seq) + ": " + v.kind + " before its " + req +
                          " in " + v.session);
        }
    }
    return out;
}

/// Privacy and security verifier. Works from the event log alone; the
/// optional authority snapshot unlocks the identity-containment,
/// pseudonym-unlinkability and ticket-bijection checks. known_plaintexts are
/// exact JSON renderings of scenario rating values for the plaintext-absence
/// sweep.
inline AuditReport audit(const EventLog& log,
                         const std::optional<nlohmann::json>& authority_secrets = {},
                         const std::vector<std::string>& known_plaintexts = {}) {
    AuditReport report;
    auto msgs = detail::collect_messages(log);
    const nlohmann::json& meta = log.meta();

    std::map<std::string, Bytes> engine_keys;
    if (meta.contains("engines")) {
        for (const auto& e : meta.at("engines")) {
            engine_keys[e.at("id").get<std::string>()] =
                from_base64(e.at("verify_key").get<std::string>());
        }
    }

    // ---- plaintext absence at manager and engines ----
    {
        AuditCheck check{"manager_engine_plaintext_absence"};
        for (const auto& v : msgs) {
            if (!detail::rm_or_engine(v.sender) && !detail::rm_or_engine(v.receiver)) continue;
            std::vector<std::string> hits;
            detail::scan_numbers(*v.payload, "payload", hits, "seq " + std::to_string(v.seq));
            for (auto& h : hits) check.details.push_back(h);
            if (!known_plaintexts.empty()) {
                std::string dump = v.payload->dump();
                for (const auto& kp : known_plaintexts) {
                    if (dump.find(kp) != std::string::npos) {
                        check.details.push_back("seq " + std::to_string(v.seq) +
                                                ": known plaintext value visible");
                    }
                }
            }
        }
        check.pass = check.details.empty();
        report.checks.push_back(std::move(check));
    }

    // ---- per-session linkage at the reputation manager ----
    {
        AuditCheck check{"relationship_privacy_linkage"};
        std::set<std::string> votee_handles;
        for (const auto& v : msgs) {
            if (v.payload->contains("votee")) {
                votee_handles.insert(v.payload->at("votee").get<std::string>());
            }
            if (v.payload->contains("target_votee")) {
                votee_handles.insert(v.payload->at("target_votee").get<std::string>());
            }
        }
        std::set<std::string> token_corrs, votee_corrs;
        for (const auto& v : msgs) {
            bool rm_end = v.sender == protocol::kRepManagerId ||
                          v.receiver == protocol::kRepManagerId;
            if (!rm_end) continue;
            bool has_token = v.payload->contains("token_id");
            std::string dump = v.msg.dump();
            if (has_token) {
                token_corrs.insert(v.session);
                for (const auto& anchor : votee_handles) {
                    if (dump.find(anchor) != std::string::npos) {
                        check.details.push_back("seq " + std::to_string(v.seq) +
                                                ": token and votee handle in one message");
                    }
                }
            }
            if (v.payload->contains("votee")) votee_corrs.insert(v.session);
        }
        for (const auto& corr : token_corrs) {
            if (votee_corrs.count(corr)) {
                check.details.push_back("correlator " + corr +
                                        " carries both token redemption and votee traffic");
            }
        }
        check.pass = check.details.empty();
        report.checks.push_back(std::move(check));
    }

    // ---- token one-time-ness (+ ReplayedToken evidence) ----
    {
        AuditCheck check{"token_one_time"};
        std::map<std::string, std::string> corr_token;
        std::map<std::string, std::vector<uint64_t>> token_requests;
        for (const auto& v : msgs) {
            if (v.kind == "RepRequest" && v.payload->value("purpose", "") == "redemption") {
                std::string token = v.payload->at("token_id").get<std::string>();
                corr_token[v.session] = token;
                token_requests[token].push_back(v.seq);
            }
        }
        std::map<std::string, int> token_success;
        for (const auto& v : msgs) {
            if (v.kind == "RepResponse" && corr_token.count(v.session) &&
                v.payload->value("status", "") == "ok") {
                token_success[corr_token[v.session]]++;
            }
        }
        size_t mints = 0;
        for (const auto& line : log.lines()) {
            if (line.value("kind", "") == "authority" &&
                line.at("action").value("action", "") == "mint_token") {
                ++mints;
            }
        }
        size_t successes = 0;
        for (const auto& [token, count] : token_success) {
            successes += static_cast<size_t>(count);
            if (count > 1) {
                check.details.push_back("token " + token + " redeemed " + std::to_string(count) +
                                        " times");
            }
        }
        if (successes > mints) {
            check.details.push_back("more successful redemptions than minted tokens");
        }
        for (const auto& [token, seqs] : token_requests) {
            if (seqs.size() > 1) {
                protocol::Evidence ev;
                ev.kind = protocol::EvidenceKind::replayed_token;
                ev.offending_seq = seqs;
                ev.session_id = "";
                ev.note = "token " + token + " presented " + std::to_string(seqs.size()) +
                          " times; re-check: count RepRequest redemption lines for this token";
                report.evidence.push_back(std::move(ev));
            }
        }
        check.pass = check.details.empty();
        report.checks.push_back(std::move(check));
    }

    // ---- ticket one-time-ness (+ ReplayedTicket evidence) ----
    {
        AuditCheck check{"ticket_one_time"};
        std::map<std::string, std::vector<uint64_t>> spends;
        std::map<std::string, std::string> spend_auth; // ticket -> auth id
        std::vector<std::pair<uint64_t, nlohmann::json>> rejected;
        for (const auto& line : log.lines()) {
            if (line.value("kind", "") != "authority") continue;
            const auto& action = line.at("action");
            const std::string what = action.value("action", "");
            if (what == "spend") {
                std::string ticket = action.at("ticket_id").get<std::string>();
                spends[ticket].push_back(line.at("seq").get<uint64_t>());
                spend_auth[ticket] = action.at("auth_id").get<std::string>();
            } else if (what == "spend_rejected" &&
                       action.value("reason", "") == "AlreadySpent") {
                rejected.emplace_back(line.at("seq").get<uint64_t>(), action);
            }
        }
        for (const auto& [ticket, seqs] : spends) {
            if (seqs.size() > 1) {
                check.details.push_back("ticket " + ticket + " spent " +
                                        std::to_string(seqs.size()) + " times");
            }
        }
        // applied updates by auth id, for classifying replay vs race
        std::map<std::string, uint64_t> applied_auth_seq;
        std::map<std::string, std::string> update_auth; // session -> auth
        for (const auto& v : msgs) {
            if (v.kind == "ReputationUpdate" && v.payload->contains("auth_id")) {
                update_auth[v.session] = v.payload->at("auth_id").get<std::string>();
            }
            if (v.kind == "ReputationUpdate" && v.payload->value("status", "") == "applied") {
                auto it = update_auth.find(v.session);
                if (it != update_auth.end() && !applied_auth_seq.count(it->second)) {
                    applied_auth_seq[it->second] = v.seq;
                }
            }
        }
        for (const auto& [seq, action] : rejected) {
            std::string ticket = action.at("ticket_id").get<std::string>();
            protocol::Evidence ev;
            ev.kind = protocol::EvidenceKind::replayed_ticket;
            ev.offending_seq = {seq};
            auto sp = spends.find(ticket);
            if (sp != spends.end()) ev.offending_seq.insert(ev.offending_seq.begin(), sp->second.front());
            std::string flavor = "double-spend race (no completed session yet)";
            auto auth = spend_auth.find(ticket);
            if (auth != spend_auth.end()) {
                auto applied = applied_auth_seq.find(auth->second);
                if (applied != applied_auth_seq.end() && applied->second < seq) {
                    flavor = "replay of an already-used ticket";
                }
            }
            ev.note = "ticket " + ticket + " re-spend rejected; " + flavor +
                      "; re-check: spend and spend_rejected lines for this ticket";
            report.evidence.push_back(std::move(ev));
        }
        check.pass = check.details.empty();
        report.checks.push_back(std::move(check));
    }

    // ---- signature validity (+ TamperedUpdate / BadSignature evidence) ----
    {
        AuditCheck check{"signature_validity"};
        struct EngineSent {
            uint64_t seq;
            nlohmann::json s, w, votee, version, signature;
        };
        std::map<std::string, EngineSent> engine_sent; // session -> last ok SignedRating
        for (const auto& v : msgs) {
            if (v.kind != "SignedRating" || v.payload->value("status", "") != "ok") continue;
            std::string engine = v.payload->at("engine_id").get<std::string>();
            auto key = engine_keys.find(engine);
            bool valid = false;
            if (key != engine_keys.end()) {
                std::string bytes = protocol::rating_signing_bytes(
                    he::Ciphertext::from_json(v.payload->at("s")),
                    he::Ciphertext::from_json(v.payload->at("w")), v.session,
                    v.payload->at("votee").get<std::string>(),
                    v.payload->at("version").get<uint64_t>());
                valid = verify_detached(key->second, bytes,
                                        from_base64(v.payload->at("signature").get<std::string>()));
            }
            if (!valid) {
                check.details.push_back("seq " + std::to_string(v.seq) +
                                        ": engine-sent rating has invalid signature");
            }
            engine_sent[v.session] = EngineSent{v.seq,
                                                v.payload->at("s"),
                                                v.payload->at("w"),
                                                v.payload->at("votee"),
                                                v.payload->at("version"),
                                                v.payload->at("signature")};
        }
        std::map<std::string, std::string> ack_status; // session -> final RM ack status
        for (const auto& v : msgs) {
            if (v.kind == "ReputationUpdate" && v.sender == protocol::kRepManagerId) {
                ack_status[v.session] = v.payload->value("status", "");
            }
        }
        for (const auto& v : msgs) {
            if (v.kind != "ReputationUpdate" || v.receiver != protocol::kRepManagerId) continue;
            const nlohmann::json& sp = v.payload->at("signed");
            std::string engine = sp.at("engine_id").get<std::string>();
            auto key = engine_keys.find(engine);
            bool valid = false;
            if (key != engine_keys.end()) {
                std::string bytes = protocol::rating_signing_bytes(
                    he::Ciphertext::from_json(sp.at("s")), he::Ciphertext::from_json(sp.at("w")),
                    v.session, sp.at("votee").get<std::string>(), sp.at("version").get<uint64_t>());
                valid = verify_detached(key->second, bytes,
                                        from_base64(sp.at("signature").get<std::string>()));
            }
            if (valid) continue;
            if (ack_status[v.session] == "applied") {
                check.details.push_back("seq " + std::to_string(v.seq) +
                                        ": manager applied an update with an invalid signature");
            }
            protocol::Evidence ev;
            ev.session_id = v.session;
            auto sent = engine_sent.find(v.session);
            if (sent != engine_sent.end() &&
                (sent->second.s != sp.at("s") || sent->second.w != sp.at("w") ||
                 sent->second.version != sp.at("version") || sent->second.votee != sp.at("votee"))) {
                ev.kind = protocol::EvidenceKind::tampered_update;
                ev.offending_seq = {sent->second.seq, v.seq};
                ev.note = "forwarded update differs from what the engine signed; "
                          "re-check: compare the two messages and re-verify the signature";
            } else {
                ev.kind = protocol::EvidenceKind::bad_signature;
                ev.offending_seq = {v.seq};
                if (sent != engine_sent.end()) ev.offending_seq.insert(ev.offending_seq.begin(), sent->second.seq);
                ev.note = "signature does not verify against the engine key; "
                          "re-check: recompute the canonical bytes and verify";
            }
            report.evidence.push_back(std::move(ev));
        }
        check.pass = check.details.empty();
        report.checks.push_back(std::move(check));
    }

    // ---- equal-vote ciphertext distinctness ----
    {
        AuditCheck check{"equal_vote_ciphertext_distinctness"};
        // fresh-encryption sites only; byte-identical replays of the same
        // correlator collapse (the replay itself is evidenced elsewhere)
        std::map<std::string, std::set<std::string>> payload_corrs;
        auto note_site = [&](const nlohmann::json& env, const std::string& corr) {
            payload_corrs[env.at("payload").get<std::string>()].insert(corr);
        };
        for (const auto& v : msgs) {
            if (v.kind == "RatingSubmission") note_site(v.payload->at("s_r"), v.session);
            if (v.kind == "SelfRatingResponse") note_site(v.payload->at("s_e"), v.session);
            if (v.kind == "TranscryptResponse" && v.payload->contains("weight")) {
                note_site(v.payload->at("weight"), v.session);
            }
        }
        for (const auto& [payload, corrs] : payload_corrs) {
            if (corrs.size() > 1) {
                check.details.push_back("identical fresh ciphertext appears in " +
                                        std::to_string(corrs.size()) + " sessions");
            }
        }
        check.pass = check.details.empty();
        report.checks.push_back(std::move(check));
    }

    // ---- depth violations reported by engines ----
    for (const auto& v : msgs) {
        if (v.kind == "SignedRating" && v.payload->value("status", "") == "rejected" &&
            v.payload->value("reason", "") == "DepthViolation") {
            protocol::Evidence ev;
            ev.kind = protocol::EvidenceKind::depth_violation;
            ev.session_id = v.session;
            ev.offending_seq = {v.seq};
            for (const auto& u : msgs) {
                if (u.kind == "RatingSubmission" && u.session == v.session) {
                    ev.offending_seq.insert(ev.offending_seq.begin(), u.seq);
                    break;
                }
            }
            ev.note = "combine refused an exhausted ciphertext; re-check: the submission's "
                      "s_r level field is 0";
            report.evidence.push_back(std::move(ev));
        }
    }

    // ---- causal session ordering ----
    {
        AuditCheck check{"session_causality"};
        check.details = causality_violations(log);
        check.pass = check.details.empty();
        report.checks.push_back(std::move(check));
    }

    // ---- reveal-mode checks ----
    if (authority_secrets) {
        const nlohmann::json& snap = *authority_secrets;
        AuditCheck containment{"identity_containment"};
        AuditCheck unlink{"pseudonym_unlinkability"};
        struct Biz {
            std::string id, legal;
            std::vector<std::string> handles;
        };
        std::vector<Biz> bizs;
        for (const auto& b : snap.at("businesses")) {
            Biz biz;
            biz.id = b.at("business_id").get<std::string>();
            biz.legal = b.at("legal_identity").get<std::string>();
            biz.handles.push_back(b.at("anchor").get<std::string>());
            for (const auto& h : b.at("pseudonyms")) biz.handles.push_back(h.get<std::string>());
            bizs.push_back(std::move(biz));
        }
        for (const auto& line : log.lines()) {
            const std::string kind = line.value("kind", "");
            if (kind != "message" && kind != "crypto_op") continue;
            std::string dump = detail::scrubbed_dump(line);
            uint64_t seq = line.at("seq").get<uint64_t>();
            for (const auto& biz : bizs) {
                if (dump.find(biz.id) != std::string::npos) {
                    containment.details.push_back("seq " + std::to_string(seq) +
                                                  ": business id visible outside the authority");
                }
                // very short legal names cannot be grepped for structurally
                if (biz.legal.size() >= 5 && dump.find(biz.legal) != std::string::npos) {
                    containment.details.push_back("seq " + std::to_string(seq) +
                                                  ": legal identity visible outside the authority");
                }
                int present = 0;
                for (const auto& h : biz.handles) {
                    if (dump.find(h) != std::string::npos) ++present;
                }
                if (present >= 2) {
                    unlink.details.push_back("seq " + std::to_string(seq) + ": " +
                                             std::to_string(present) +
                                             " pseudonyms of one business co-occur");
                }
            }
        }
        containment.pass = containment.details.empty();
        unlink.pass = unlink.details.empty();
        report.checks.push_back(std::move(containment));
        report.checks.push_back(std::move(unlink));

        AuditCheck bijection{"ticket_session_bijection"};
        std::map<std::string, std::string> auth_ticket;
        for (const auto& a : snap.at("authorizations")) {
            auth_ticket[a.at("auth_id").get<std::string>()] = a.at("ticket_id").get<std::string>();
        }
        std::map<std::string, nlohmann::json> tickets;
        for (const auto& t : snap.at("tickets")) {
            tickets[t.at("ticket_id").get<std::string>()] = t;
        }
        std::map<std::string, std::string> session_auth, session_votee;
        std::map<std::string, int> auth_sessions;
        for (const auto& v : msgs) {
            if (v.kind == "ReputationUpdate" && v.receiver == protocol::kRepManagerId) {
                session_auth[v.session] = v.payload->at("auth_id").get<std::string>();
                session_votee[v.session] = v.payload->at("signed").at("votee").get<std::string>();
            }
        }
        for (const auto& v : msgs) {
            if (v.kind != "ReputationUpdate" || v.sender != protocol::kRepManagerId ||
                v.payload->value("status", "") != "applied") {
                continue;
            }
            const std::string auth = session_auth[v.session];
            auto ticket_id = auth_ticket.find(auth);
            if (ticket_id == auth_ticket.end()) {
                bijection.details.push_back("session " + v.session +
                                            ": applied update with unknown authorization");
                continue;
            }
            if (++auth_sessions[auth] > 1) {
                bijection.details.push_back("authorization " + auth + " used by several sessions");
            }
            const nlohmann::json& t = tickets.at(ticket_id->second);
            if (!t.at("spent").get<bool>()) {
                bijection.details.push_back("session " + v.session + ": ticket not marked spent");
            }
            if (t.at("votee_pseudonym").get<std::string>() != session_votee[v.session]) {
                bijection.details.push_back("session " + v.session +
                                            ": ticket votee does not match session votee");
            }
            if (t.at("contract_digest").get<std::string>().empty()) {
                bijection.details.push_back("session " + v.session + ": ticket has no contract");
            }
        }
        bijection.pass = bijection.details.empty();
        report.checks.push_back(std::move(bijection));
    }

    return report;
}

} // namespace repsim::harness
