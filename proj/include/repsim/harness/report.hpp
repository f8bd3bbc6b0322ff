// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "repsim/harness/audit.hpp"
#include "repsim/harness/event_log.hpp"

namespace repsim::harness {

/// Deterministic run output. A Report is a pure function of the event log:
/// run() derives it from the log it just wrote, and replay() derives it the
/// same way from a stored log, so the two agree byte-for-byte or not at all.
struct Report {
    nlohmann::json doc;

    bool operator==(const Report& o) const { return doc == o.doc; }
    std::string dump(int indent = -1) const { return doc.dump(indent); }
};

inline Report derive_report(const EventLog& log) {
    const nlohmann::json& meta = log.meta();
    nlohmann::json final_scores = nlohmann::json::object();
    nlohmann::json errors = nlohmann::json::array();
    std::map<std::string, uint64_t> message_counts;

    for (const auto& line : log.lines()) {
        const std::string kind = line.value("kind", "");
        if (kind == "message") {
            message_counts[line.at("message").at("sender").get<std::string>()]++;
            message_counts[line.at("message").at("receiver").get<std::string>()]++;
        } else if (kind == "final_score") {
            nlohmann::json entry{{"version", line.at("version")}};
            if (line.contains("score")) {
                entry["score"] = line.at("score");
            } else {
                entry["error"] = line.value("error", "unknown");
            }
            final_scores[line.at("votee").get<std::string>()] = entry;
        } else if (kind == "protocol_error") {
            nlohmann::json e = line;
            errors.push_back(std::move(e));
        }
    }

    AuditReport audit_result = audit(log);

    Report report;
    report.doc = {{"scenario_digest", meta.value("scenario_digest", "")},
                  {"seed", meta.value("seed", 0ULL)},
                  {"backend", meta.value("backend", "")},
                  {"final_scores", final_scores},
                  {"message_counts", message_counts},
                  {"audit", audit_result.to_json()},
                  {"flags", meta.value("flags", nlohmann::json::object())},
                  {"protocol_errors", errors}};
    return report;
}

} // namespace repsim::harness
