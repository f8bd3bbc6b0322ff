// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "repsim/harness/event_log.hpp"
#include "repsim/harness/report.hpp"
#include "repsim/harness/scenario.hpp"
#include "repsim/he/factory.hpp"
#include "repsim/identity/authority.hpp"
#include "repsim/protocol/business_node.hpp"
#include "repsim/protocol/engine_pool.hpp"
#include "repsim/protocol/entities.hpp"

namespace repsim::harness {

struct RunResult {
    Report report;
    EventLog log;
    nlohmann::json authority_snapshot;
};

/// Single-threaded deterministic event loop: scenario events drive rating
/// sessions, queries, epochs and departures over the entity state machines.
/// (scenario, seed, backend) fully determines the event-log bytes.
class Simulator {
  public:
    explicit Simulator(Scenario scenario, std::optional<uint64_t> seed_override = {})
        : scenario_(std::move(scenario)) {
        scenario_.validate();
        if (seed_override) scenario_.seed = *seed_override;
    }

    RunResult run() {
        Rng master(scenario_.seed, "run-master");
        const uint64_t authority_seed = master.next_u64();
        const uint64_t backend_seed = master.next_u64();
        const uint64_t km_seed = master.next_u64();
        const uint64_t rm_seed = master.next_u64();
        std::vector<uint64_t> engine_seeds;
        for (size_t i = 0; i < scenario_.engine_count; ++i) engine_seeds.push_back(master.next_u64());
        const uint64_t pool_seed = master.next_u64();
        session_rng_ = Rng(master.next_u64(), "sessions");

        identity::AuthorityConfig auth_config;
        authority_ = std::make_unique<identity::Authority>(authority_seed, auth_config);
        authority_->set_action_sink([this](const nlohmann::json& action) {
            log_.append({{"kind", "authority"}, {"tick", tick_}, {"action", action}});
        });

        backend_ = he::make_backend(scenario_.he_params, backend_seed);
        backend_->set_observer([this](he::CryptoOp op, const std::string& key_id) {
            trace_backend_op(he::op_name(op), key_id);
        });

        ctx_.authority_verify_key = authority_->verify_key();
        ctx_.epoch_length = auth_config.epoch_length;
        ctx_.pseudonym_validity_epochs = auth_config.pseudonym_validity_epochs;
        ctx_.rating_dims = scenario_.rating_dims;
        ctx_.profile = scenario_.profile;
        ctx_.prior = scenario_.prior;
        ctx_.scribe = &scribe_;

        km_ = std::make_unique<protocol::KeyManager>(*backend_, ctx_, km_seed);
        rm_ = std::make_unique<protocol::ReputationManager>(*backend_, ctx_, rm_seed);
        routes_[km_->handle()] = km_.get();
        routes_[rm_->handle()] = rm_.get();
        std::vector<std::string> engine_ids;
        for (size_t i = 0; i < scenario_.engine_count; ++i) {
            auto engine = std::make_unique<protocol::ReputationEngine>(
                "engine-" + std::to_string(i + 1), *backend_, ctx_, engine_seeds[i]);
            rm_->register_engine(engine->handle(), engine->verify_key());
            engine_ids.push_back(engine->handle());
            routes_[engine->handle()] = engine.get();
            engines_.push_back(std::move(engine));
        }
        pool_ = std::make_unique<protocol::EnginePool>(engine_ids, scenario_.assignment, pool_seed);

        write_meta(engine_ids);

        // onboarding happens out of band, before any protocol traffic
        for (const auto& decl : scenario_.businesses) {
            Business b;
            b.id = authority_->register_business(decl.name);
            b.anchor = authority_->votee_anchor(b.id).handle;
            b.node = std::make_unique<protocol::BusinessNode>(b.anchor, *backend_, ctx_);
            if (decl.self_rating) {
                b.node->set_self_rating(*decl.self_rating, decl.self_rating_verified);
            }
            routes_[b.anchor] = b.node.get();
            businesses_.emplace(decl.name, std::move(b));
        }

        for (size_t i = 0; i < scenario_.events.size(); ++i) {
            ++tick_;
            std::visit([&](const auto& ev) { execute(ev, i); }, scenario_.events[i]);
        }

        write_final_scores();

        RunResult result;
        result.authority_snapshot = authority_->snapshot();
        result.report = derive_report(log_);
        result.log = std::move(log_);
        return result;
    }

  private:
    struct Business {
        identity::BusinessId id;
        std::string anchor;
        std::unique_ptr<protocol::BusinessNode> node;
    };

    // Crypto trace sink: raw backend ops plus scribed signature ops, with
    // composite suppression so a transcrypt logs as one operation. Every
    // record carries the correlator being handled and its root session.
    class Scribe final : public protocol::CryptoScribe {
      public:
        explicit Scribe(Simulator& sim) : sim_(sim) {}

        void op(const std::string& name) override { emit(name, ""); }

        void composite_begin(const std::string& name) override {
            if (depth_++ == 0) composite_ = name;
        }

        void composite_end() override {
            if (--depth_ == 0) emit(composite_, "");
        }

        void raw_backend_op(const std::string& name, const std::string& key_id) {
            if (depth_ > 0) return; // folded into the enclosing composite
            emit(name, key_id);
        }

      private:
        void emit(const std::string& name, const std::string& key_id) {
            nlohmann::json line{{"kind", "crypto_op"},
                                {"tick", sim_.tick_},
                                {"entity", sim_.current_entity_},
                                {"context", sim_.current_context_},
                                {"root", sim_.root_of(sim_.current_context_)},
                                {"op", name}};
            if (!key_id.empty()) line["key_id"] = key_id;
            sim_.log_.append(std::move(line));
        }

        Simulator& sim_;
        int depth_ = 0;
        std::string composite_;
    };

    void trace_backend_op(const std::string& name, const std::string& key_id) {
        scribe_.raw_backend_op(name, key_id);
    }

    std::string root_of(const std::string& corr) const {
        auto it = origin_.find(corr);
        return it == origin_.end() ? corr : it->second;
    }

    void write_meta(const std::vector<std::string>& engine_ids) {
        nlohmann::json engines = nlohmann::json::array();
        for (size_t i = 0; i < engine_ids.size(); ++i) {
            engines.push_back({{"id", engine_ids[i]},
                               {"verify_key", to_base64(engines_[i]->verify_key())}});
        }
        log_.append({{"kind", "meta"},
                     {"format", 1},
                     {"tick", 0},
                     {"scenario_digest", scenario_.digest()},
                     {"seed", scenario_.seed},
                     {"backend", he::to_string(scenario_.he_params.backend_kind)},
                     {"he_params", scenario_.he_params.to_json()},
                     {"profile", scenario_.profile.to_json()},
                     {"rating_dims", scenario_.rating_dims},
                     {"prior", {{"value", scenario_.prior.value}, {"weight", scenario_.prior.weight}}},
                     {"engines", engines},
                     {"authority_verify_key", to_base64(authority_->verify_key())},
                     {"epoch_length", ctx_.epoch_length},
                     {"pseudonym_validity_epochs", ctx_.pseudonym_validity_epochs},
                     {"flags",
                      {{"merged_authority", true},
                       {"transcryption_exposure", true},
                       {"votee_anchor_longlived", true},
                       {"key_id_correlation_exposure", true}}}});
    }

    void protocol_error(size_t event_index, const std::string& code, const std::string& detail) {
        log_.append({{"kind", "protocol_error"},
                     {"tick", tick_},
                     {"event_index", event_index},
                     {"code", code},
                     {"detail", detail}});
    }

    void event_line(size_t event_index, const std::string& label) {
        log_.append(
            {{"kind", "event"}, {"tick", tick_}, {"event_index", event_index}, {"label", label}});
    }

    void log_message(const protocol::Message& m) {
        log_.append({{"kind", "message"},
                     {"tick", tick_},
                     {"message",
                      {{"kind", kind_name(m.kind)},
                       {"sender", m.sender},
                       {"receiver", m.receiver},
                       {"session_id", m.session_id},
                       {"payload", m.payload}}}});
    }

    void pump(protocol::Message first, size_t event_index) {
        std::deque<protocol::Message> queue;
        queue.push_back(std::move(first));
        while (!queue.empty()) {
            protocol::Message m = std::move(queue.front());
            queue.pop_front();
            m.tick = tick_;
            log_message(m);
            auto route = routes_.find(m.receiver);
            if (route == routes_.end()) {
                protocol_error(event_index, "UnknownReceiver", m.receiver);
                continue;
            }
            current_entity_ = route->second->handle();
            current_context_ = m.session_id;
            try {
                for (auto& reply : route->second->handle_message(m)) {
                    if (!origin_.count(reply.session_id) && reply.session_id != m.session_id) {
                        origin_[reply.session_id] = root_of(m.session_id);
                    }
                    queue.push_back(std::move(reply));
                }
            } catch (const Error& e) {
                protocol_error(event_index, errc_name(e.code()), e.what());
            }
            current_entity_.clear();
            current_context_.clear();
        }
    }

    Business& business(const std::string& name) { return businesses_.at(name); }

    void execute(const EventContract& ev, size_t idx) {
        event_line(idx, "contract");
        Business& a = business(ev.a);
        Business& b = business(ev.b);
        try {
            identity::ContractEvent ce{a.id, b.id, ev.metadata, tick_};
            auto [t_ab, t_ba] = authority_->establish_contract(ce);
            tickets_[{ev.a, ev.b}].push_back(t_ab.ticket_id);
            tickets_[{ev.b, ev.a}].push_back(t_ba.ticket_id);
        } catch (const Error& e) {
            protocol_error(idx, errc_name(e.code()), e.what());
        }
    }

    void execute(const EventRate& ev, size_t idx) {
        event_line(idx, "rate");
        Business& voter = business(ev.voter);
        Business& votee = business(ev.votee);
        if (voter.node->departed()) {
            protocol_error(idx, "Departed", "voter has departed");
            return;
        }
        if (!scenario_.profile.liveliness &&
            !reputation::positive_impact(ev.rating.mean())) {
            protocol_error(idx, "RejectedByProfile",
                           "liveliness=false forbids negative-impact feedback");
            return;
        }

        auto dir = std::make_pair(ev.voter, ev.votee);
        if (ev.misbehavior == protocol::Misbehavior::ticket_replay) {
            // scripted re-spend of a ticket that already authorized a session
            auto& used = spent_[dir];
            if (used.empty()) {
                protocol_error(idx, "DanglingRating", "no spent ticket to replay");
                return;
            }
            try {
                authority_->spend_ticket(used.back(), tick_);
            } catch (const Error& e) {
                protocol_error(idx, errc_name(e.code()), "ticket replay rejected");
            }
            return;
        }

        auto& queue = tickets_[dir];
        if (queue.empty()) {
            protocol_error(idx, "DanglingRating", "no ticket available for this direction");
            return;
        }
        const std::string ticket_id = queue.front();
        queue.pop_front(); // consumed by this attempt either way
        identity::SessionAuthorization auth;
        try {
            auth = authority_->spend_ticket(ticket_id, tick_);
        } catch (const Error& e) {
            protocol_error(idx, errc_name(e.code()), "ticket not spendable");
            return;
        }
        spent_[dir].push_back(ticket_id);
        if (ev.misbehavior == protocol::Misbehavior::double_spend_race) {
            try {
                authority_->spend_ticket(ticket_id, tick_);
            } catch (const Error& e) {
                protocol_error(idx, errc_name(e.code()), "double spend rejected");
            }
        }

        identity::Pseudonym voter_pseudonym;
        identity::Authority::MintedToken minted;
        try {
            voter_pseudonym = authority_->issue_pseudonym(voter.id, tick_);
            minted = authority_->mint_access_token(voter_pseudonym, tick_);
        } catch (const Error& e) {
            protocol_error(idx, errc_name(e.code()), e.what());
            return;
        }
        routes_[voter_pseudonym.handle] = voter.node.get();
        rm_->install_token(minted.token.token_id, minted.token.bound_reputation_ref,
                           minted.anchor);

        bool with_self = votee.node->has_self_rating() && !votee.node->departed();
        if (ev.self_rating) with_self = *ev.self_rating && with_self;

        std::string engine = pool_->assign();
        std::string session = "ses-" + session_rng_.hex(32);
        origin_[session] = session;
        protocol::Message first =
            voter.node->start_rating(session, votee.anchor, voter_pseudonym.handle, auth,
                                     minted.token, ev.rating, engine, with_self, ev.misbehavior);
        pump(std::move(first), idx);

        auto outcome = voter.node->take_rating_outcome(session);
        if (!outcome) {
            protocol_error(idx, "SessionIncomplete", "rating session produced no outcome");
        } else if (!outcome->applied) {
            protocol_error(idx, outcome->reason, "rating session rejected");
        }
    }

    void execute(const EventQuery& ev, size_t idx) {
        event_line(idx, "query");
        Business& requester = business(ev.requester);
        Business& votee = business(ev.votee);
        if (requester.node->departed()) {
            protocol_error(idx, "Departed", "requester has departed");
            return;
        }
        identity::Pseudonym pseudonym;
        try {
            pseudonym = authority_->issue_pseudonym(requester.id, tick_);
        } catch (const Error& e) {
            protocol_error(idx, errc_name(e.code()), e.what());
            return;
        }
        routes_[pseudonym.handle] = requester.node.get();
        std::string corr = "qry-" + session_rng_.hex(24);
        origin_[corr] = corr;
        protocol::Message first = requester.node->start_query(corr, pseudonym.handle, pseudonym,
                                                              votee.anchor, ev.threshold);
        pump(std::move(first), idx);
        if (!requester.node->take_query_outcome(corr)) {
            protocol_error(idx, "QueryIncomplete", "query produced no response");
        }
    }

    void execute(const EventAdvanceEpoch&, size_t idx) {
        tick_ = (tick_ / ctx_.epoch_length + 1) * ctx_.epoch_length;
        event_line(idx, "advance_epoch");
    }

    void execute(const EventDepart& ev, size_t idx) {
        event_line(idx, "depart");
        Business& b = business(ev.business);
        authority_->depart(b.id, tick_);
        b.node->set_departed(true);
    }

    void write_final_scores() {
        current_entity_ = km_->handle();
        current_context_ = "report";
        for (const auto& [anchor, st] : rm_->states()) {
            nlohmann::json line{{"kind", "final_score"},
                                {"tick", tick_},
                                {"votee", anchor},
                                {"version", st.version}};
            try {
                reputation::RatingVector score = km_->finalize_state(anchor, st);
                line["score"] = score.dims;
            } catch (const Error& e) {
                line["error"] = errc_name(e.code());
            }
            log_.append(std::move(line));
        }
        current_entity_.clear();
        current_context_.clear();
    }

    Scenario scenario_;
    EventLog log_;
    int64_t tick_ = 0;
    Rng session_rng_;
    Scribe scribe_{*this};
    std::string current_entity_;
    std::string current_context_;
    std::map<std::string, std::string> origin_; // correlator -> root session

    std::unique_ptr<identity::Authority> authority_;
    std::unique_ptr<he::Backend> backend_;
    protocol::EntityContext ctx_;
    std::unique_ptr<protocol::KeyManager> km_;
    std::unique_ptr<protocol::ReputationManager> rm_;
    std::vector<std::unique_ptr<protocol::ReputationEngine>> engines_;
    std::unique_ptr<protocol::EnginePool> pool_;
    std::map<std::string, Business> businesses_;
    std::map<std::string, protocol::Entity*> routes_;
    std::map<std::pair<std::string, std::string>, std::deque<std::string>> tickets_;
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> spent_;
};

/// Scenario-level entry point mirroring the CLI `run` subcommand.
inline RunResult run(const Scenario& scenario, std::optional<uint64_t> seed_override = {}) {
    Simulator sim(scenario, seed_override);
    return sim.run();
}

} // namespace repsim::harness
