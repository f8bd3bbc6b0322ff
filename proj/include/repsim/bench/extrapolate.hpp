// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "repsim/bench/bench.hpp"
#include "repsim/harness/event_log.hpp"

namespace repsim::bench {

/// Crypto operations on the critical path of one rating session with the
/// self-rating step present. A transcrypt is a key-manager composite of one
/// decrypt plus one encrypt; two occur per session (votee weight refresh and
/// the voter-record bridge after token redemption).
inline std::map<std::string, int> rating_op_multiset(bool with_self_rating = true) {
    if (with_self_rating) {
        return {{"encrypt", 2}, {"transcrypt", 2}, {"he_mul", 2},
                {"he_add", 4},  {"sign", 1},       {"verify", 1}};
    }
    return {{"encrypt", 1}, {"transcrypt", 2}, {"he_mul", 1},
            {"he_add", 2},  {"sign", 1},       {"verify", 1}};
}

/// Counts crypto operations a logged run attributed to one root session.
/// This is what the bench cross-check compares against rating_op_multiset.
inline std::map<std::string, int> session_op_counts(const harness::EventLog& log,
                                                    const std::string& session_id) {
    std::map<std::string, int> counts;
    for (const auto& line : log.lines()) {
        if (line.value("kind", "") != "crypto_op") continue;
        if (line.value("root", "") != session_id) continue;
        counts[line.at("op").get<std::string>()]++;
    }
    return counts;
}

struct CapacityReport {
    nlohmann::json doc;
    std::string dump(int indent = -1) const { return doc.dump(indent); }
};

/// Projects rating and query throughput from measured primitive timings.
/// The projection formula and the assumed per-rating operation multiset are
/// disclosed inside the report so the numbers can be re-derived by hand.
inline CapacityReport extrapolate(const TimingTable& timings, double n_businesses,
                                  double ratings_per_business_per_day) {
    if (n_businesses < 0 || ratings_per_business_per_day < 0) {
        fail(Errc::invalid_params, "extrapolate needs non-negative inputs");
    }
    auto mean_of = [&](const std::string& name) -> double {
        const TimingRow* row = timings.find(name);
        if (!row) fail(Errc::invalid_params, "timing table has no row for " + name);
        return row->mean_us;
    };

    const auto multiset = rating_op_multiset(true);
    double per_rating_us = 0.0;
    nlohmann::json cost_breakdown = nlohmann::json::object();
    std::string bottleneck;
    double bottleneck_cost = -1.0;
    for (const auto& [op, count] : multiset) {
        double unit = op == "transcrypt" ? mean_of("decrypt") + mean_of("encrypt") : mean_of(op);
        double total = unit * count;
        per_rating_us += total;
        cost_breakdown[op] = {{"count", count}, {"unit_us", unit}, {"total_us", total}};
        if (total > bottleneck_cost) {
            bottleneck_cost = total;
            bottleneck = op;
        }
    }
    double ratings_per_sec = 1e6 / per_rating_us;
    // threshold query: the key manager decrypts both halves of the state pair
    double per_query_us = 2.0 * mean_of("decrypt");
    double queries_per_sec = 1e6 / per_query_us;
    double demand_per_sec = n_businesses * ratings_per_business_per_day / 86400.0;

    CapacityReport report;
    report.doc = {
        {"backend", timings.backend},
        {"he_params", timings.params.to_json()},
        {"projected_ratings_per_second", ratings_per_sec},
        {"projected_queries_per_second", queries_per_sec},
        {"per_rating_us", per_rating_us},
        {"per_threshold_query_us", per_query_us},
        {"bottleneck_operation", bottleneck},
        {"demand",
         {{"n_businesses", n_businesses},
          {"ratings_per_business_per_day", ratings_per_business_per_day},
          {"ratings_per_second", demand_per_sec},
          {"trivially_feasible", demand_per_sec == 0.0},
          {"feasible", demand_per_sec <= ratings_per_sec}}},
        {"assumptions",
         {{"rating_op_multiset", multiset},
          {"cost_breakdown", cost_breakdown},
          {"formula",
           "ratings_per_sec = 1e6 / sum(count_op * mean_us_op) over the rating multiset; "
           "transcrypt = decrypt + encrypt; threshold query = 2 decrypts (state pair)"},
          {"self_rating_present", true},
          {"demand_parameters_are_placeholders", true},
          {"pseudonym_issuance_and_checks_excluded", true}}}};
    return report;
}

} // namespace repsim::bench
