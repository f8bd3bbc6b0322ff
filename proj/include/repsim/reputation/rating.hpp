// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "repsim/common/error.hpp"

namespace repsim::reputation {

/// Per-dimension rating in [0,1] (e.g. {subjective quality, objective
/// delivery performance}); the dimension count is fixed per scenario.
struct RatingVector {
    std::vector<double> dims;

    RatingVector() = default;
    RatingVector(std::initializer_list<double> v) : dims(v) {}
    explicit RatingVector(std::vector<double> v) : dims(std::move(v)) {}

    size_t size() const { return dims.size(); }

    void validate_unit_range() const {
        if (dims.empty()) fail(Errc::invalid_params, "rating has no dimensions");
        for (double v : dims) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                fail(Errc::invalid_params, "rating component outside [0,1]");
            }
        }
    }

    /// Scalar form used for weights, thresholds and binarization.
    double mean() const {
        if (dims.empty()) fail(Errc::invalid_params, "rating has no dimensions");
        return std::accumulate(dims.begin(), dims.end(), 0.0) / static_cast<double>(dims.size());
    }
};

} // namespace repsim::reputation
