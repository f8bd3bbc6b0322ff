// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0
//
// repsim: deterministic simulator and auditor for the encrypted reputation
// protocol. Exit codes: 0 success, 1 error, 2 audit findings.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "repsim/repsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFindings = 2;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) repsim::fail(repsim::Errc::io_error, "cannot write " + path);
    out << content;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) repsim::fail(repsim::Errc::io_error, "cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int cmd_run(const std::string& scenario_path, std::optional<uint64_t> seed,
            const std::string& backend, const std::string& out_path, const std::string& log_path,
            const std::string& authority_out) {
    repsim::harness::Scenario scenario = repsim::harness::load_scenario(scenario_path);
    if (!backend.empty()) {
        scenario.he_params.backend_kind = repsim::he::backend_kind_from_string(backend);
    }
    repsim::harness::RunResult result = repsim::harness::run(scenario, seed);
    if (!log_path.empty()) result.log.save(log_path);
    std::string report = result.report.dump(2) + "\n";
    if (!out_path.empty()) {
        write_file(out_path, report);
    } else {
        std::cout << report;
    }
    if (!authority_out.empty()) {
        write_file(authority_out, result.authority_snapshot.dump(2) + "\n");
    }
    bool findings = result.report.doc.at("audit").at("findings").get<bool>() ||
                    !result.report.doc.at("protocol_errors").empty();
    return findings ? kExitFindings : kExitOk;
}

int cmd_audit(const std::string& log_path, const std::string& reveal_path) {
    repsim::harness::EventLog log = repsim::harness::EventLog::load(log_path);
    std::optional<nlohmann::json> secrets;
    if (!reveal_path.empty()) secrets = read_json(reveal_path);
    repsim::harness::AuditReport report = repsim::harness::audit(log, secrets);
    std::cout << report.to_json().dump(2) << "\n";
    return report.has_findings() ? kExitFindings : kExitOk;
}

int cmd_replay(const std::string& log_path) {
    repsim::harness::EventLog log = repsim::harness::EventLog::load(log_path);
    repsim::harness::Report report = repsim::harness::replay(log);
    std::cout << report.dump(2) << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& params_path, size_t iters, uint64_t seed,
              const std::string& out_path) {
    repsim::he::HeParams params;
    if (!params_path.empty()) params = repsim::he::HeParams::from_json(read_json(params_path));
    repsim::bench::TimingTable table = repsim::bench::bench_he(params, iters, seed);
    std::string doc = table.to_json().dump(2) + "\n";
    if (!out_path.empty()) {
        write_file(out_path, doc);
    } else {
        std::cout << doc;
    }
    return kExitOk;
}

int cmd_extrapolate(const std::string& timings_path, double businesses, double rate,
                    const std::string& out_path) {
    repsim::bench::TimingTable table = repsim::bench::TimingTable::from_json(read_json(timings_path));
    repsim::bench::CapacityReport report = repsim::bench::extrapolate(table, businesses, rate);
    std::string doc = report.dump(2) + "\n";
    if (!out_path.empty()) {
        write_file(out_path, doc);
    } else {
        std::cout << doc;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic simulator for a ticket-authorized, "
                 "homomorphically encrypted B2B reputation system"};
    app.require_subcommand(1);

    std::string scenario_path, backend, out_path, log_path, authority_out, reveal_path,
        params_path, timings_path;
    std::optional<uint64_t> seed;
    uint64_t bench_seed = 1;
    size_t iters = 100;
    double businesses = 100.0, rate = 10.0;

    auto* run_cmd = app.add_subcommand("run", "execute a scenario and write report + event log");
    run_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    run_cmd->add_option("--seed", seed, "override the scenario seed");
    run_cmd->add_option("--backend", backend, "sim|lattice (overrides the scenario)");
    run_cmd->add_option("--out", out_path, "report output path (default: stdout)");
    run_cmd->add_option("--log", log_path, "event log output path (JSON lines)");
    run_cmd->add_option("--authority-out", authority_out,
                        "write the authority's secret snapshot (auditor input)");

    auto* audit_cmd = app.add_subcommand("audit", "verify privacy/security properties of a log");
    audit_cmd->add_option("--log", log_path, "event log to audit")->required();
    audit_cmd->add_option("--reveal-authority", reveal_path,
                          "authority snapshot enabling identity-level checks");

    auto* replay_cmd = app.add_subcommand("replay", "recompute the report from a stored log");
    replay_cmd->add_option("--log", log_path, "event log to replay")->required();

    auto* bench_cmd = app.add_subcommand("bench", "time the primitive operations");
    bench_cmd->add_option("--params", params_path, "HE params JSON (default: built-in)");
    bench_cmd->add_option("--iters", iters, "iterations per operation (>= 30)");
    bench_cmd->add_option("--seed", bench_seed, "benchmark seed");
    bench_cmd->add_option("--out", out_path, "timings output path");

    auto* ex_cmd = app.add_subcommand("extrapolate", "project throughput from timings");
    ex_cmd->add_option("--timings", timings_path, "timings JSON from bench")->required();
    ex_cmd->add_option("--businesses", businesses, "number of businesses");
    ex_cmd->add_option("--rate", rate, "ratings per business per day");
    ex_cmd->add_option("--out", out_path, "report output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return cmd_run(scenario_path, seed, backend, out_path, log_path, authority_out);
        }
        if (audit_cmd->parsed()) return cmd_audit(log_path, reveal_path);
        if (replay_cmd->parsed()) return cmd_replay(log_path);
        if (bench_cmd->parsed()) return cmd_bench(params_path, iters, bench_seed, out_path);
        if (ex_cmd->parsed()) return cmd_extrapolate(timings_path, businesses, rate, out_path);
    } catch (const repsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
