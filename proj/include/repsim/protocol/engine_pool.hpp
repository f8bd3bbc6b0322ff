// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "repsim/common/error.hpp"
#include "repsim/common/rng.hpp"

namespace repsim::protocol {

enum class AssignPolicy { round_robin, random };

inline AssignPolicy assign_policy_from_string(const std::string& s) {
    if (s == "round_robin") return AssignPolicy::round_robin;
    if (s == "random") return AssignPolicy::random;
    fail(Errc::schema_violation, "unknown engine_assignment '" + s + "'");
}

/// Picks one of the available reputation engines per session: deterministic
/// rotation or a seeded draw.
class EnginePool {
  public:
    EnginePool(std::vector<std::string> engine_ids, AssignPolicy policy, uint64_t seed)
        : ids_(std::move(engine_ids)), policy_(policy), rng_(seed, "engine-pool") {}

    const std::string& assign() {
        if (ids_.empty()) fail(Errc::no_engines, "no reputation engines available");
        if (policy_ == AssignPolicy::round_robin) {
            return ids_[next_++ % ids_.size()];
        }
        return ids_[rng_.uniform_int(0, ids_.size() - 1)];
    }

    size_t size() const { return ids_.size(); }

  private:
    std::vector<std::string> ids_;
    AssignPolicy policy_;
    Rng rng_;
    size_t next_ = 0;
};

} // namespace repsim::protocol
