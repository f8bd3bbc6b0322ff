// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "repsim/common/error.hpp"
#include "repsim/reputation/profile.hpp"
#include "repsim/reputation/rating.hpp"

namespace repsim::reputation {

struct FeedbackEntry {
    double weight = 1.0; // >= 0
    RatingVector rating;
    int64_t timestamp = 0;
};

/// Append-only rating history; the plaintext side of the catalog.
struct FeedbackHistory {
    std::vector<FeedbackEntry> entries;

    void append(FeedbackEntry e) {
        if (e.weight < 0.0) fail(Errc::invalid_params, "feedback weight must be >= 0");
        entries.push_back(std::move(e));
    }
};

/// Plaintext aggregation catalog over one rating dimension. Semantics:
///   sum           Σ rating·weight
///   mean          unweighted average
///   weighted_mean Σ w·r / Σ w
///   median        middle of sorted ratings, lower middle for even counts
///   beta          (p+1)/(p+n+2), ratings binarized at 0.5
inline double aggregate_plain(AggregationModel model, const FeedbackHistory& h, size_t dim = 0) {
    auto rating_at = [&](const FeedbackEntry& e) {
        if (dim >= e.rating.dims.size()) fail(Errc::invalid_params, "dimension out of range");
        return e.rating.dims[dim];
    };
    switch (model) {
        case AggregationModel::sum: {
            double acc = 0.0;
            for (const auto& e : h.entries) acc += rating_at(e) * e.weight;
            return acc;
        }
        case AggregationModel::mean: {
            if (h.entries.empty()) fail(Errc::empty_history, "mean of empty history");
            double acc = 0.0;
            for (const auto& e : h.entries) acc += rating_at(e);
            return acc / static_cast<double>(h.entries.size());
        }
        case AggregationModel::weighted_mean: {
            double num = 0.0, den = 0.0;
            for (const auto& e : h.entries) {
                num += rating_at(e) * e.weight;
                den += e.weight;
            }
            if (den <= 0.0) fail(Errc::empty_history, "weighted mean with zero total weight");
            return num / den;
        }
        case AggregationModel::median: {
            if (h.entries.empty()) fail(Errc::empty_history, "median of empty history");
            std::vector<double> vals;
            vals.reserve(h.entries.size());
            for (const auto& e : h.entries) vals.push_back(rating_at(e));
            std::sort(vals.begin(), vals.end());
            return vals[(vals.size() - 1) / 2];
        }
        case AggregationModel::beta: {
            if (h.entries.empty()) fail(Errc::empty_history, "beta reputation of empty history");
            double p = 0.0, n = 0.0;
            for (const auto& e : h.entries) {
                (positive_impact(rating_at(e)) ? p : n) += 1.0;
            }
            return (p + 1.0) / (p + n + 2.0);
        }
    }
    fail(Errc::invalid_params, "unknown aggregation model");
}

} // namespace repsim::reputation
