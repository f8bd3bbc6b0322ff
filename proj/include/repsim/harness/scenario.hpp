// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "repsim/common/bytes.hpp"
#include "repsim/common/error.hpp"
#include "repsim/he/params.hpp"
#include "repsim/protocol/business_node.hpp"
#include "repsim/protocol/engine_pool.hpp"
#include "repsim/reputation/profile.hpp"
#include "repsim/reputation/state.hpp"

namespace repsim::harness {

struct BusinessDecl {
    std::string name;
    std::optional<reputation::RatingVector> self_rating;
    bool self_rating_verified = false;
};

struct EventContract {
    std::string a, b;
    std::string metadata;
};

struct EventRate {
    std::string voter, votee;
    reputation::RatingVector rating;
    std::optional<bool> self_rating; // default: present iff the votee has a source
    protocol::Misbehavior misbehavior = protocol::Misbehavior::none;
};

struct EventQuery {
    std::string requester, votee;
    std::optional<double> threshold; // nullopt = encrypted mode
};

struct EventAdvanceEpoch {};

struct EventDepart {
    std::string business;
};

using Event = std::variant<EventContract, EventRate, EventQuery, EventAdvanceEpoch, EventDepart>;

/// Declarative run description: who exists, which trust profile and HE
/// parameters apply, and the ordered contract/rating/query trace.
struct Scenario {
    uint64_t seed = 1;
    std::vector<BusinessDecl> businesses;
    reputation::SystemProfile profile;
    he::HeParams he_params;
    size_t engine_count = 2;
    protocol::AssignPolicy assignment = protocol::AssignPolicy::round_robin;
    size_t rating_dims = 2;
    reputation::BootstrapPrior prior;
    std::vector<Event> events;

    nlohmann::json to_json() const;
    static Scenario from_json(const nlohmann::json& j);
    void validate() const;

    std::string digest() const { return digest_of(to_json().dump()); }
};

inline nlohmann::json Scenario::to_json() const {
    nlohmann::json bs = nlohmann::json::array();
    for (const auto& b : businesses) {
        nlohmann::json jb{{"name", b.name}};
        if (b.self_rating) {
            jb["self_rating"] = b.self_rating->dims;
            jb["self_rating_verified"] = b.self_rating_verified;
        }
        bs.push_back(jb);
    }
    nlohmann::json evs = nlohmann::json::array();
    for (const auto& ev : events) {
        if (const auto* c = std::get_if<EventContract>(&ev)) {
            evs.push_back({{"kind", "contract"}, {"a", c->a}, {"b", c->b}, {"metadata", c->metadata}});
        } else if (const auto* r = std::get_if<EventRate>(&ev)) {
            nlohmann::json jr{{"kind", "rate"},
                              {"voter", r->voter},
                              {"votee", r->votee},
                              {"rating", r->rating.dims}};
            if (r->self_rating) jr["self_rating"] = *r->self_rating;
            if (r->misbehavior != protocol::Misbehavior::none) {
                jr["misbehavior"] = protocol::misbehavior_name(r->misbehavior);
            }
            evs.push_back(jr);
        } else if (const auto* q = std::get_if<EventQuery>(&ev)) {
            nlohmann::json jq{{"kind", "query"}, {"requester", q->requester}, {"votee", q->votee}};
            jq["mode"] = q->threshold ? nlohmann::json{{"threshold", *q->threshold}}
                                      : nlohmann::json("encrypted");
            evs.push_back(jq);
        } else if (std::get_if<EventAdvanceEpoch>(&ev)) {
            evs.push_back({{"kind", "advance_epoch"}});
        } else if (const auto* d = std::get_if<EventDepart>(&ev)) {
            evs.push_back({{"kind", "depart"}, {"business", d->business}});
        }
    }
    return {{"seed", seed},
            {"businesses", bs},
            {"system_profile", profile.to_json()},
            {"he_params", he_params.to_json()},
            {"engine_count", engine_count},
            {"engine_assignment",
             assignment == protocol::AssignPolicy::round_robin ? "round_robin" : "random"},
            {"rating_dims", rating_dims},
            {"prior", {{"value", prior.value}, {"weight", prior.weight}}},
            {"events", evs}};
}

inline Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario s;
    try {
        s.seed = j.value("seed", 1ULL);
        for (const auto& jb : j.at("businesses")) {
            BusinessDecl b;
            b.name = jb.at("name").get<std::string>();
            if (jb.contains("self_rating")) {
                b.self_rating =
                    reputation::RatingVector(jb.at("self_rating").get<std::vector<double>>());
                b.self_rating_verified = jb.value("self_rating_verified", false);
            }
            s.businesses.push_back(std::move(b));
        }
        if (j.contains("system_profile")) {
            s.profile = reputation::SystemProfile::from_json(j.at("system_profile"));
        }
        if (j.contains("he_params")) s.he_params = he::HeParams::from_json(j.at("he_params"));
        s.engine_count = j.value("engine_count", 2ULL);
        if (j.contains("engine_assignment")) {
            s.assignment =
                protocol::assign_policy_from_string(j.at("engine_assignment").get<std::string>());
        }
        s.rating_dims = j.value("rating_dims", 2ULL);
        if (j.contains("prior")) {
            s.prior.value = j.at("prior").value("value", 0.5);
            s.prior.weight = j.at("prior").value("weight", 1.0);
        }
        size_t idx = 0;
        for (const auto& je : j.at("events")) {
            const std::string kind = je.at("kind").get<std::string>();
            const std::string where = "events[" + std::to_string(idx) + "]";
            if (kind == "contract") {
                s.events.push_back(EventContract{je.at("a").get<std::string>(),
                                                 je.at("b").get<std::string>(),
                                                 je.value("metadata", "")});
            } else if (kind == "rate") {
                EventRate r;
                r.voter = je.at("voter").get<std::string>();
                r.votee = je.at("votee").get<std::string>();
                r.rating = reputation::RatingVector(je.at("rating").get<std::vector<double>>());
                if (je.contains("self_rating")) r.self_rating = je.at("self_rating").get<bool>();
                if (je.contains("misbehavior")) {
                    r.misbehavior =
                        protocol::misbehavior_from_string(je.at("misbehavior").get<std::string>());
                }
                s.events.push_back(std::move(r));
            } else if (kind == "query") {
                EventQuery q;
                q.requester = je.at("requester").get<std::string>();
                q.votee = je.at("votee").get<std::string>();
                if (je.contains("mode") && je.at("mode").is_object()) {
                    q.threshold = je.at("mode").at("threshold").get<double>();
                } else if (je.contains("mode") &&
                           je.at("mode").get<std::string>() != "encrypted") {
                    fail(Errc::schema_violation, where + ".mode: unknown query mode");
                }
                s.events.push_back(std::move(q));
            } else if (kind == "advance_epoch") {
                s.events.push_back(EventAdvanceEpoch{});
            } else if (kind == "depart") {
                s.events.push_back(EventDepart{je.at("business").get<std::string>()});
            } else {
                fail(Errc::schema_violation, where + ".kind: unknown event kind '" + kind + "'");
            }
            ++idx;
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::schema_violation, std::string("scenario parse: ") + e.what());
    }
    s.validate();
    return s;
}

inline void Scenario::validate() const {
    he_params.validate();
    if (engine_count < 1) fail(Errc::schema_violation, "engine_count must be >= 1");
    if (businesses.empty()) fail(Errc::schema_violation, "businesses: at least one required");
    if (rating_dims < 1 || rating_dims > he_params.slot_count) {
        fail(Errc::schema_violation, "rating_dims must be in [1, slot_count]");
    }
    if (profile.visibility == reputation::Visibility::local) {
        fail(Errc::unsupported_visibility,
             "system_profile.visibility: 'local' semantics are out of scope, use 'global'");
    }
    std::set<std::string> names;
    for (const auto& b : businesses) {
        if (!names.insert(b.name).second) {
            fail(Errc::schema_violation, "duplicate business name '" + b.name + "'");
        }
        if (b.self_rating) {
            if (b.self_rating->size() != rating_dims) {
                fail(Errc::schema_violation, "self_rating of '" + b.name + "': wrong dimension count");
            }
            b.self_rating->validate_unit_range();
        }
    }
    auto known = [&](const std::string& n, const std::string& where) {
        if (!names.count(n)) {
            fail(Errc::schema_violation, where + ": unknown business '" + n + "'");
        }
    };
    // static ticket accounting per direction
    std::map<std::pair<std::string, std::string>, size_t> available, spent;
    size_t idx = 0;
    for (const auto& ev : events) {
        const std::string where = "events[" + std::to_string(idx) + "]";
        if (const auto* c = std::get_if<EventContract>(&ev)) {
            known(c->a, where);
            known(c->b, where);
            if (c->a == c->b) fail(Errc::self_contract, where + ": contract with self");
            available[{c->a, c->b}]++;
            available[{c->b, c->a}]++;
        } else if (const auto* r = std::get_if<EventRate>(&ev)) {
            known(r->voter, where);
            known(r->votee, where);
            if (r->rating.size() != rating_dims) {
                fail(Errc::schema_violation, where + ".rating: wrong dimension count");
            }
            r->rating.validate_unit_range();
            auto dir = std::make_pair(r->voter, r->votee);
            if (r->misbehavior == protocol::Misbehavior::ticket_replay) {
                if (spent[dir] == 0) {
                    fail(Errc::schema_violation,
                         where + ": ticket_replay needs a prior rating in this direction");
                }
            } else {
                if (available[dir] == 0) {
                    fail(Errc::dangling_rating,
                         where + ": no contract provides a ticket for " + r->voter + " -> " +
                             r->votee);
                }
                available[dir]--;
                spent[dir]++;
            }
        } else if (const auto* q = std::get_if<EventQuery>(&ev)) {
            known(q->requester, where);
            known(q->votee, where);
            if (q->threshold && (*q->threshold < 0.0 || *q->threshold > 1.0)) {
                fail(Errc::schema_violation, where + ".mode.threshold: outside [0,1]");
            }
        } else if (const auto* d = std::get_if<EventDepart>(&ev)) {
            known(d->business, where);
        }
        ++idx;
    }
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open scenario file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::schema_violation, std::string("scenario is not valid JSON: ") + e.what());
    }
    return Scenario::from_json(j);
}

} // namespace repsim::harness
