// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>

#include "repsim/harness/report.hpp"

namespace repsim::harness {

/// Validates log integrity and recomputes the Report from the recorded
/// payloads, without re-running any crypto randomness. A log that replays
/// clean yields exactly the Report the original run produced.
///
///   missing line            -> GapDetected
///   reordered lines         -> OrderViolation (seq order or session causality)
inline Report replay(const EventLog& log) {
    const auto& lines = log.lines();
    if (lines.empty()) fail(Errc::log_mismatch, "empty event log");
    log.meta(); // throws when line 0 is not a meta record

    std::set<uint64_t> seen;
    uint64_t max_seq = 0;
    bool sorted = true;
    uint64_t prev = 0;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (!lines[i].contains("seq")) fail(Errc::log_mismatch, "line without seq");
        uint64_t seq = lines[i].at("seq").get<uint64_t>();
        if (!seen.insert(seq).second) fail(Errc::order_violation, "duplicate seq " + std::to_string(seq));
        if (i > 0 && seq < prev) sorted = false;
        prev = seq;
        max_seq = std::max(max_seq, seq);
    }
    if (max_seq != lines.size() - 1 || *seen.begin() != 0) {
        fail(Errc::gap_detected, "sequence numbers are not contiguous from 0");
    }
    if (!sorted) fail(Errc::order_violation, "lines are not in sequence order");

    int64_t prev_tick = -1;
    for (const auto& line : lines) {
        int64_t tick = line.value("tick", int64_t{0});
        if (tick < prev_tick) fail(Errc::order_violation, "ticks are not monotone");
        prev_tick = tick;
    }

    auto causal = causality_violations(log);
    if (!causal.empty()) fail(Errc::order_violation, causal.front());

    return derive_report(log);
}

} // namespace repsim::harness
