// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/common/error.hpp"

namespace repsim::harness {

/// Append-only JSON-lines run record: one line per protocol message,
/// authority action, crypto operation, scenario event, final score, or
/// protocol error. Line zero is the run metadata. seq is contiguous from 0
/// and ticks are monotone, which is what replay integrity checking leans on.
class EventLog {
  public:
    void append(nlohmann::json line) {
        line["seq"] = next_seq_++;
        lines_.push_back(std::move(line));
    }

    const std::vector<nlohmann::json>& lines() const { return lines_; }
    size_t size() const { return lines_.size(); }

    const nlohmann::json& meta() const {
        if (lines_.empty() || lines_.front().value("kind", "") != "meta") {
            fail(Errc::log_mismatch, "event log has no meta line");
        }
        return lines_.front();
    }

    std::string to_jsonl() const {
        std::ostringstream os;
        for (const auto& l : lines_) os << l.dump() << "\n";
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(Errc::io_error, "cannot write event log to " + path);
        out << to_jsonl();
    }

    static EventLog parse(const std::string& jsonl) {
        EventLog log;
        std::istringstream is(jsonl);
        std::string line;
        size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                log.lines_.push_back(nlohmann::json::parse(line));
            } catch (const nlohmann::json::exception& e) {
                fail(Errc::log_mismatch,
                     "line " + std::to_string(lineno) + " is not valid JSON: " + e.what());
            }
        }
        log.next_seq_ = log.lines_.size();
        return log;
    }

    static EventLog load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(Errc::io_error, "cannot open event log " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

  private:
    std::vector<nlohmann::json> lines_;
    uint64_t next_seq_ = 0;
};

} // namespace repsim::harness
