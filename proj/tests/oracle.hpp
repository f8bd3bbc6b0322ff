// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Plaintext reference pipeline, independent of the encrypted path: it tracks
// per-votee (numerator, denominator) in exact double arithmetic and mirrors
// the simulator's eligibility, weighting, profile and epoch rules.

#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "repsim/harness/scenario.hpp"

namespace repsim::testing {

class PlainOracle {
  public:
    struct State {
        std::vector<double> n;
        double d = 0.0;
        uint64_t version = 1;
    };

    explicit PlainOracle(const harness::Scenario& s) : s_(s) {}

    void run() {
        int64_t tick = 0;
        for (const auto& ev : s_.events) {
            ++tick;
            if (const auto* c = std::get_if<harness::EventContract>(&ev)) {
                on_contract(*c, tick);
            } else if (const auto* r = std::get_if<harness::EventRate>(&ev)) {
                on_rate(*r, tick);
            } else if (const auto* q = std::get_if<harness::EventQuery>(&ev)) {
                on_query(*q);
            } else if (std::get_if<harness::EventAdvanceEpoch>(&ev)) {
                tick = (tick / kEpochLength + 1) * kEpochLength;
            } else if (const auto* d = std::get_if<harness::EventDepart>(&ev)) {
                departed_.insert(d->business);
            }
        }
    }

    /// Final per-business scores, clamped and monotone-floored exactly like
    /// the key manager's reporting path.
    std::map<std::string, std::vector<double>> final_scores() {
        std::map<std::string, std::vector<double>> out;
        for (auto& [name, st] : states_) {
            if (st.d <= 0.0) continue; // impl reports EmptyState for these
            out[name] = finalize(name, st);
        }
        return out;
    }

    const std::map<std::string, State>& states() const { return states_; }

    std::vector<bool> threshold_results() const { return threshold_results_; }

  private:
    static constexpr int64_t kEpochLength = 100;
    static constexpr int64_t kValidityEpochs = 10;
    static constexpr int64_t kTicketValidity = 1000;

    struct Ticket {
        int64_t issued_tick;
    };

    const harness::BusinessDecl& decl(const std::string& name) const {
        for (const auto& b : s_.businesses) {
            if (b.name == name) return b;
        }
        fail(Errc::unknown_business, name);
    }

    State& ensure(const std::string& name) {
        auto it = states_.find(name);
        if (it == states_.end()) {
            State st;
            st.n.assign(s_.rating_dims, s_.prior.value * s_.prior.weight);
            st.d = s_.prior.weight;
            it = states_.emplace(name, std::move(st)).first;
        }
        return it->second;
    }

    double weight_of(const State& st) const {
        double acc = 0.0;
        for (double n : st.n) {
            acc += st.d > 0.0 ? std::clamp(n / st.d, 0.0, 1.0) : 0.0;
        }
        return std::clamp(acc / static_cast<double>(st.n.size()), 0.0, 1.0);
    }

    std::vector<double> finalize(const std::string& name, const State& st) {
        std::vector<double> score(st.n.size());
        for (size_t i = 0; i < st.n.size(); ++i) {
            score[i] = std::clamp(st.n[i] / st.d, 0.0, 1.0);
        }
        if (!s_.profile.non_monotonicity) {
            auto& floor = floors_[name];
            floor.resize(score.size(), 0.0);
            for (size_t i = 0; i < score.size(); ++i) {
                score[i] = std::max(score[i], floor[i]);
                floor[i] = score[i];
            }
        }
        return score;
    }

    void on_contract(const harness::EventContract& c, int64_t tick) {
        if (departed_.count(c.a) || departed_.count(c.b)) return;
        tickets_[{c.a, c.b}].push_back(Ticket{tick});
        tickets_[{c.b, c.a}].push_back(Ticket{tick});
    }

    void on_rate(const harness::EventRate& r, int64_t tick) {
        if (departed_.count(r.voter)) return;
        if (!s_.profile.liveliness && r.rating.mean() < 0.5) return;
        if (r.misbehavior == protocol::Misbehavior::ticket_replay) return;

        auto& queue = tickets_[{r.voter, r.votee}];
        if (queue.empty()) return;
        Ticket t = queue.front();
        queue.pop_front();
        if (tick / kEpochLength - t.issued_tick / kEpochLength >= kValidityEpochs) return;
        if (tick - t.issued_tick > kTicketValidity) return;

        // the session runs from here on: both parties get bootstrapped
        State& votee = ensure(r.votee);
        double w_e = weight_of(votee);
        State& voter = ensure(r.voter);
        double w_r = weight_of(voter);

        bool rejected = r.misbehavior == protocol::Misbehavior::ciphertext_tamper ||
                        r.misbehavior == protocol::Misbehavior::forged_signature ||
                        r.misbehavior == protocol::Misbehavior::depth_violation;
        if (rejected) return;

        bool with_self = decl(r.votee).self_rating.has_value() && !departed_.count(r.votee);
        if (r.self_rating) with_self = *r.self_rating && with_self;

        for (size_t i = 0; i < s_.rating_dims; ++i) {
            double s = w_r * r.rating.dims[i];
            if (with_self) s += w_e * decl(r.votee).self_rating->dims[i];
            votee.n[i] += s;
        }
        votee.d += w_r + (with_self ? w_e : 0.0);
        votee.version++;
    }

    void on_query(const harness::EventQuery& q) {
        if (departed_.count(q.requester)) return;
        State& votee = ensure(q.votee);
        if (q.threshold) {
            if (votee.version < 2) {
                threshold_results_.push_back(false); // EmptyState rejection
                return;
            }
            std::vector<double> score = finalize(q.votee, votee);
            double acc = 0.0;
            for (double x : score) acc += x;
            double mean = std::clamp(acc / static_cast<double>(score.size()), 0.0, 1.0);
            threshold_results_.push_back(mean >= *q.threshold);
        }
    }

    const harness::Scenario& s_;
    std::map<std::string, State> states_;
    std::map<std::string, std::vector<double>> floors_;
    std::map<std::pair<std::string, std::string>, std::deque<Ticket>> tickets_;
    std::set<std::string> departed_;
    std::vector<bool> threshold_results_;
};

/// Maps run-result anchors back to business names via the authority snapshot.
inline std::map<std::string, std::string> anchor_to_name(const nlohmann::json& snapshot) {
    std::map<std::string, std::string> out;
    for (const auto& b : snapshot.at("businesses")) {
        out[b.at("anchor").get<std::string>()] = b.at("legal_identity").get<std::string>();
    }
    return out;
}

} // namespace repsim::testing
