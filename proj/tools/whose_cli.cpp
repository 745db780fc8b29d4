/*
 * Copyright 2026 The whose Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Talks to the library exclusively through the C API.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "whose/whose.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

int reportFailure(whose_status status, const std::string& context) {
    std::cerr << "error: " << context << ": " << whose_last_error() << " [" << whose_status_name(status);
    if (*whose_last_error_code()) std::cerr << "/" << whose_last_error_code();
    std::cerr << "]\n";
    return status == WHOSE_ERR_INTERNAL ? kExitInternal : kExitUser;
}

// Inline JSON, or a path to a file holding it.
bool readJsonArg(const std::string& arg, std::string& out) {
    auto first = arg.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || arg[first] == '{' || arg[first] == '[' || arg == "null") {
        out = arg;
        return true;
    }
    std::ifstream in(arg[0] == '@' ? arg.substr(1) : arg);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    ~Handle() {
        if (ptr) Free(ptr);
    }
};

using Schema = Handle<whose_schema, whose_schema_free>;
using Store = Handle<whose_store, whose_store_close>;
using Report = Handle<whose_ingest_report, whose_ingest_report_free>;
using Rules = Handle<whose_rules, whose_rules_free>;
using Coverage = Handle<whose_coverage, whose_coverage_free>;
using Analysis = Handle<whose_analysis, whose_analysis_free>;
using Server = Handle<whose_server, whose_server_free>;

struct Options {
    int verbosity = 0;

    std::string log, format = "csv", schema, storeDir;

    std::string mapping, extraction, sample, sampleSchema, sampleFormat;

    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out;

    std::string analysis, host = "127.0.0.1", uiDir;
    int port = 8080;

    std::string filter, timeRange;
    std::uint32_t maxSteps = 8;
    std::int64_t now = -1;
};

void printReport(const whose_ingest_report* r, int verbosity) {
    std::cout << "accepted: " << whose_ingest_report_accepted(r) << '\n';
    std::cout << "rejected: " << whose_ingest_report_rejected(r) << '\n';
    std::size_t n = whose_ingest_report_rejection_count(r);
    std::size_t shown = verbosity > 0 ? n : std::min<std::size_t>(n, 20);
    for (std::size_t i = 0; i < shown; ++i)
        std::cout << "rejection: " << whose_ingest_report_rejection_locator(r, i) << ' '
                  << whose_ingest_report_rejection_reason(r, i) << '\n';
    if (shown < n) std::cout << "rejection: ... " << (n - shown) << " more (use -v)\n";
}

int runIngest(const Options& o) {
    Schema schema;
    if (auto st = whose_schema_load(o.schema.c_str(), &schema.ptr); st != WHOSE_OK) return reportFailure(st, "schema");
    if (!std::filesystem::is_regular_file(o.log)) {
        std::cerr << "error: log file not found: " << o.log << '\n';
        return kExitUser;
    }
    Store store;
    if (auto st = whose_store_open(o.storeDir.c_str(), &store.ptr); st != WHOSE_OK) return reportFailure(st, "store");
    Report report;
    if (auto st = whose_ingest_file(store.ptr, o.log.c_str(), o.format.c_str(), schema.ptr, &report.ptr); st != WHOSE_OK)
        return reportFailure(st, "ingest");
    printReport(report.ptr, o.verbosity);
    std::cout << "store_rows: " << whose_store_row_count(store.ptr) << '\n';
    return kExitOk;
}

int loadSample(const Options& o, Store& store) {
    if (std::filesystem::is_directory(o.sample)) {
        if (auto st = whose_store_open(o.sample.c_str(), &store.ptr); st != WHOSE_OK) return reportFailure(st, "sample");
        return kExitOk;
    }
    if (!std::filesystem::is_regular_file(o.sample)) {
        std::cerr << "error: sample not found: " << o.sample << '\n';
        return kExitUser;
    }
    Schema schema;
    auto st = o.sampleSchema.empty() ? whose_schema_default(&schema.ptr) : whose_schema_load(o.sampleSchema.c_str(), &schema.ptr);
    if (st != WHOSE_OK) return reportFailure(st, "schema");
    std::string format = o.sampleFormat;
    if (format.empty()) format = std::filesystem::path(o.sample).extension() == ".jsonl" ? "jsonl" : "csv";
    if ((st = whose_store_open_memory(&store.ptr)) != WHOSE_OK) return reportFailure(st, "sample");
    Report report;
    if ((st = whose_ingest_file(store.ptr, o.sample.c_str(), format.c_str(), schema.ptr, &report.ptr)) != WHOSE_OK)
        return reportFailure(st, "sample");
    std::cout << "sample_rejected: " << whose_ingest_report_rejected(report.ptr) << '\n';
    return kExitOk;
}

int runValidate(const Options& o) {
    Rules rules;
    const char* extraction = o.extraction.empty() ? nullptr : o.extraction.c_str();
    if (auto st = whose_rules_load(o.mapping.c_str(), extraction, &rules.ptr); st != WHOSE_OK)
        return reportFailure(st, "mapping");
    std::size_t n = whose_rules_mapping_count(rules.ptr);
    std::cout << "mapping_rules: " << n << '\n';
    std::cout << "extraction_rules: " << whose_rules_extraction_count(rules.ptr) << '\n';
    std::cout << "actions: " << whose_rules_action_count(rules.ptr) << '\n';
    if (o.sample.empty()) return kExitOk;

    Store store;
    if (int rc = loadSample(o, store); rc != kExitOk) return rc;
    Coverage cov;
    if (auto st = whose_coverage_measure(rules.ptr, store.ptr, &cov.ptr); st != WHOSE_OK) return reportFailure(st, "coverage");
    for (std::size_t i = 0; i < n; ++i)
        std::cout << "rule: " << whose_rules_rule_order(rules.ptr, i) << ' ' << whose_rules_rule_action_id(rules.ptr, i) << ' '
                  << whose_coverage_rule_matches(cov.ptr, i) << '\n';
    std::cout << "sample_rows: " << whose_coverage_total_rows(cov.ptr) << '\n';
    std::cout << "unmatched_rows: " << whose_coverage_unmatched_rows(cov.ptr) << '\n';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", whose_coverage_ratio(cov.ptr) * 100.0);
    std::cout << "coverage_percent: " << buf << '\n';
    return kExitOk;
}

int runPreprocess(const Options& o) {
    if (!std::filesystem::is_directory(o.storeDir)) {
        std::cerr << "error: store directory not found: " << o.storeDir << '\n';
        return kExitUser;
    }
    Rules rules;
    if (auto st = whose_rules_load(o.mapping.c_str(), o.extraction.c_str(), &rules.ptr); st != WHOSE_OK)
        return reportFailure(st, "rules");
    Store store;
    if (auto st = whose_store_open(o.storeDir.c_str(), &store.ptr); st != WHOSE_OK) return reportFailure(st, "store");
    whose_preprocess_stats stats{};
    if (auto st = whose_preprocess(store.ptr, rules.ptr, o.threads, o.out.c_str(), &stats); st != WHOSE_OK)
        return reportFailure(st, "preprocess");
    std::cout << "rows: " << stats.rows << '\n';
    std::cout << "actions: " << stats.actions << '\n';
    std::cout << "sessions: " << stats.sessions << '\n';
    std::cout << "threads: " << o.threads << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", stats.seconds);
    std::cout << "seconds: " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.0f", stats.seconds > 0 ? static_cast<double>(stats.rows) / stats.seconds : 0.0);
    std::cout << "rows_per_sec: " << buf << '\n';
    return kExitOk;
}

int runServe(const Options& o) {
    Analysis analysis;
    if (auto st = whose_analysis_load(o.analysis.c_str(), &analysis.ptr); st != WHOSE_OK)
        return reportFailure(st, "analysis");
    Server server;
    if (auto st = whose_server_create(analysis.ptr, o.uiDir.empty() ? nullptr : o.uiDir.c_str(), &server.ptr);
        st != WHOSE_OK)
        return reportFailure(st, "server");

    // Signals are taken synchronously by a watcher thread; the server threads
    // inherit the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    int bound = 0;
    if (auto st = whose_server_bind(server.ptr, o.host.c_str(), o.port, &bound); st != WHOSE_OK)
        return reportFailure(st, "bind");
    std::cout << "sessions: " << whose_analysis_session_count(analysis.ptr) << '\n';
    std::cout << "listening: http://" << o.host << ':' << bound << std::endl;

    std::thread watcher([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        if (o.verbosity > 0) std::cerr << "signal " << sig << ", shutting down\n";
        whose_server_stop(server.ptr);
    });
    auto st = whose_server_run(server.ptr);
    // Wake the watcher if run() ended for another reason.
    pthread_kill(watcher.native_handle(), SIGTERM);
    watcher.join();
    if (st != WHOSE_OK) return reportFailure(st, "serve");
    std::cout << "stopped" << std::endl;
    return kExitOk;
}

int runExportFlow(const Options& o) {
    std::string filter, range;
    if (!o.filter.empty() && !readJsonArg(o.filter, filter)) {
        std::cerr << "error: cannot read filter " << o.filter << '\n';
        return kExitUser;
    }
    if (!o.timeRange.empty() && !readJsonArg(o.timeRange, range)) {
        std::cerr << "error: cannot read time range " << o.timeRange << '\n';
        return kExitUser;
    }
    Analysis analysis;
    if (auto st = whose_analysis_load(o.analysis.c_str(), &analysis.ptr); st != WHOSE_OK)
        return reportFailure(st, "analysis");
    char* json = nullptr;
    std::size_t len = 0;
    if (auto st = whose_export_flow(analysis.ptr, filter.empty() ? nullptr : filter.c_str(),
                                    range.empty() ? nullptr : range.c_str(), o.maxSteps, o.now, &json, &len);
        st != WHOSE_OK)
        return reportFailure(st, "export-flow");
    std::string body(json, len);
    whose_string_free(json);

    if (o.out.empty() || o.out == "-") {
        std::cout << body << '\n';
        return kExitOk;
    }
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out.flush()) {
        std::cerr << "error: cannot write " << o.out << '\n';
        return kExitUser;
    }
    std::cout << "wrote: " << o.out << " (" << len << " bytes)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"whose: whole-session interaction log analysis"};
    app.require_subcommand(1);
    app.add_flag("-v,--verbose", o.verbosity, "More output");
    app.set_version_flag("--version", whose_version());

    auto* ingest = app.add_subcommand("ingest", "Normalize a raw log into a row store");
    ingest->add_option("--log", o.log, "CSV or JSON Lines log file")->required();
    ingest->add_option("--format", o.format, "Log format")->check(CLI::IsMember({"csv", "jsonl"}))->required();
    ingest->add_option("--schema", o.schema, "Schema config file")->required();
    ingest->add_option("--store", o.storeDir, "Row store directory (created if missing)")->required();

    auto* validate = app.add_subcommand("validate-mapping", "Compile rule tables and measure coverage");
    validate->add_option("--mapping", o.mapping, "mapping.csv")->required();
    validate->add_option("--extraction", o.extraction, "extraction.csv")->required();
    validate->add_option("--sample", o.sample, "Row store directory or log file to measure against");
    validate->add_option("--schema", o.sampleSchema, "Schema for a --sample log file");
    validate->add_option("--format", o.sampleFormat, "Format of a --sample log file")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    auto* prep = app.add_subcommand("preprocess", "Map rows to actions and write the analysis file");
    prep->add_option("--store", o.storeDir, "Row store directory")->required();
    prep->add_option("--mapping", o.mapping, "mapping.csv")->required();
    prep->add_option("--extraction", o.extraction, "extraction.csv")->required();
    prep->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    prep->add_option("--out", o.out, "Analysis file to write")->required();

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API over an analysis file");
    serve->add_option("--store", o.analysis, "Analysis file")->envname("WHOSE_STORE")->required();
    serve->add_option("--port", o.port, "TCP port (0 = any free port)")->envname("WHOSE_PORT")->check(CLI::Range(0, 65535));
    serve->add_option("--host", o.host, "Listen address");
    serve->add_option("--ui-dir", o.uiDir, "Static web UI assets served at /");

    auto* flow = app.add_subcommand("export-flow", "Write the flow graph JSON for a filter");
    flow->add_option("--store", o.analysis, "Analysis file")->required();
    flow->add_option("--filter", o.filter, "Filter JSON (inline or file path)");
    flow->add_option("--time-range", o.timeRange, "Time range JSON (inline or file path)");
    flow->add_option("--max-steps", o.maxSteps, "Step horizon");
    flow->add_option("--now", o.now, "Epoch milliseconds used for time presets");
    flow->add_option("--out", o.out, "Output file ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUser;
    }

    try {
        if (*ingest) return runIngest(o);
        if (*validate) return runValidate(o);
        if (*prep) return runPreprocess(o);
        if (*serve) return runServe(o);
        if (*flow) return runExportFlow(o);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUser;
}
