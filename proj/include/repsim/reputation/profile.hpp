// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <json.hpp>

#include "repsim/common/error.hpp"

namespace repsim::reputation {

enum class Granularity { single, multiple };
enum class Visibility { global, local };
enum class AggregationModel { sum, mean, median, weighted_mean, beta };

inline std::string to_string(AggregationModel m) {
    switch (m) {
        case AggregationModel::sum: return "sum";
        case AggregationModel::mean: return "mean";
        case AggregationModel::median: return "median";
        case AggregationModel::weighted_mean: return "weighted_mean";
        case AggregationModel::beta: return "beta";
    }
    return "?";
}

inline AggregationModel aggregation_from_string(const std::string& s) {
    if (s == "sum") return AggregationModel::sum;
    if (s == "mean") return AggregationModel::mean;
    if (s == "median") return AggregationModel::median;
    if (s == "weighted_mean") return AggregationModel::weighted_mean;
    if (s == "beta") return AggregationModel::beta;
    fail(Errc::schema_violation, "unknown aggregation_model '" + s + "'");
}

/// Property axes a reputation system is classified by: what feedback is
/// accepted, whether scores may decrease (non-monotonicity), whether negative
/// feedback is allowed at all (liveliness), whether everyone sees the same
/// answer (visibility), and whether state is stored or recomputed
/// (durability).
struct SystemProfile {
    std::string feedback_set = "interval[0,1]";
    Granularity granularity = Granularity::single;
    bool liveliness = true;        // negative ratings allowed
    Visibility visibility = Visibility::global;
    bool durability = true;        // stored state rather than recomputation
    bool non_monotonicity = true;  // reputation may decrease
    AggregationModel aggregation_model = AggregationModel::weighted_mean;

    nlohmann::json to_json() const {
        return {{"feedback_set", feedback_set},
                {"granularity", granularity == Granularity::single ? "single" : "multiple"},
                {"liveliness", liveliness},
                {"visibility", visibility == Visibility::global ? "global" : "local"},
                {"durability", durability},
                {"non_monotonicity", non_monotonicity},
                {"aggregation_model", to_string(aggregation_model)}};
    }

    static SystemProfile from_json(const nlohmann::json& j) {
        SystemProfile p;
        if (j.contains("feedback_set")) p.feedback_set = j.at("feedback_set").get<std::string>();
        if (j.contains("granularity")) {
            std::string g = j.at("granularity").get<std::string>();
            if (g == "single") p.granularity = Granularity::single;
            else if (g == "multiple") p.granularity = Granularity::multiple;
            else fail(Errc::schema_violation, "system_profile.granularity: unknown value '" + g + "'");
        }
        if (j.contains("liveliness")) p.liveliness = j.at("liveliness").get<bool>();
        if (j.contains("visibility")) {
            std::string v = j.at("visibility").get<std::string>();
            if (v == "global") p.visibility = Visibility::global;
            else if (v == "local") p.visibility = Visibility::local;
            else fail(Errc::schema_violation, "system_profile.visibility: unknown value '" + v + "'");
        }
        if (j.contains("durability")) p.durability = j.at("durability").get<bool>();
        if (j.contains("non_monotonicity")) p.non_monotonicity = j.at("non_monotonicity").get<bool>();
        if (j.contains("aggregation_model")) {
            try {
                p.aggregation_model = aggregation_from_string(j.at("aggregation_model").get<std::string>());
            } catch (const Error&) {
                fail(Errc::schema_violation, "system_profile.aggregation_model: unknown value '" +
                                                 j.at("aggregation_model").get<std::string>() + "'");
            }
        }
        return p;
    }
};

enum class ProfileDecision { accept, reject, adjusted };

struct ProfileOutcome {
    ProfileDecision decision;
    double value; // score to apply (equals new_score unless adjusted)
};

/// Binarization rule shared by liveliness filtering and beta aggregation:
/// a rating is "positive" iff its scalar form is >= 0.5.
inline bool positive_impact(double rating) { return rating >= 0.5; }

/// Applies the profile's monotonicity and liveliness rules to a prospective
/// score transition.
inline ProfileOutcome enforce_profile(const SystemProfile& profile, double old_score,
                                      double new_score, double feedback_rating) {
    if (!profile.liveliness && !positive_impact(feedback_rating)) {
        return {ProfileDecision::reject, old_score};
    }
    if (!profile.non_monotonicity && new_score < old_score) {
        return {ProfileDecision::adjusted, old_score};
    }
    return {ProfileDecision::accept, new_score};
}

} // namespace repsim::reputation
