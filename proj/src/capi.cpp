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

#include "whose/whose.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "whose/api_service.hpp"
#include "whose/error.hpp"
#include "whose/http_server.hpp"
#include "whose/ingest.hpp"
#include "whose/mapping.hpp"
#include "whose/session.hpp"

struct whose_schema {
    whose::SchemaConfig config;
};

struct whose_store {
    whose::LogStore store;
};

struct whose_ingest_report {
    whose::IngestReport report;
};

struct whose_rules {
    whose::MappingTable mapping;
    whose::ExtractionTable extraction;
    whose::ActionCatalog catalog;
};

struct whose_coverage {
    whose::RuleCoverage coverage;
};

struct whose_analysis {
    std::shared_ptr<const whose::SessionStore> store;
};

struct whose_server {
    whose::HttpServer server;
};

namespace {

thread_local std::string tLastError;
thread_local std::string tLastCode;

whose_status statusOf(whose::ErrorKind kind) {
    using whose::ErrorKind;
    switch (kind) {
    case ErrorKind::invalid_argument: return WHOSE_ERR_INVALID_ARGUMENT;
    case ErrorKind::io: return WHOSE_ERR_IO;
    case ErrorKind::parse: return WHOSE_ERR_PARSE;
    case ErrorKind::not_found: return WHOSE_ERR_NOT_FOUND;
    case ErrorKind::unsupported_version: return WHOSE_ERR_UNSUPPORTED_VERSION;
    case ErrorKind::internal: return WHOSE_ERR_INTERNAL;
    }
    return WHOSE_ERR_INTERNAL;
}

whose_status fail(whose_status status, std::string code, std::string message) {
    tLastCode = std::move(code);
    tLastError = std::move(message);
    return status;
}

template <typename F>
whose_status guarded(F&& body) {
    try {
        tLastCode.clear();
        tLastError.clear();
        body();
        return WHOSE_OK;
    } catch (const whose::Error& e) {
        return fail(statusOf(e.kind()), e.code(), e.what());
    } catch (const std::bad_alloc&) {
        return fail(WHOSE_ERR_INTERNAL, "out_of_memory", "out of memory");
    } catch (const std::exception& e) {
        return fail(WHOSE_ERR_INTERNAL, "internal", e.what());
    } catch (...) {
        return fail(WHOSE_ERR_INTERNAL, "internal", "unknown error");
    }
}

#define WHOSE_REQUIRE(cond, what)                                                                                    \
    do {                                                                                                             \
        if (!(cond)) return fail(WHOSE_ERR_INVALID_ARGUMENT, "null_argument", what);                                 \
    } while (0)

char* copyString(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

nlohmann::json parseOptional(const char* text, const char* what) {
    if (!text || !*text) return nullptr;
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw whose::Error(whose::ErrorKind::invalid_argument, "malformed_json", std::string(what) + " is not valid JSON",
                           what);
    return j;
}

} // namespace

extern "C" {

const char* whose_version(void) { return "1.0.0"; }

const char* whose_status_name(whose_status status) {
    switch (status) {
    case WHOSE_OK: return "ok";
    case WHOSE_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case WHOSE_ERR_IO: return "io";
    case WHOSE_ERR_PARSE: return "parse";
    case WHOSE_ERR_NOT_FOUND: return "not_found";
    case WHOSE_ERR_UNSUPPORTED_VERSION: return "unsupported_version";
    case WHOSE_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* whose_last_error(void) { return tLastError.c_str(); }
const char* whose_last_error_code(void) { return tLastCode.c_str(); }
void whose_string_free(char* s) { std::free(s); }

// ---- schema ----------------------------------------------------------------

whose_status whose_schema_load(const char* path, whose_schema** out) {
    WHOSE_REQUIRE(path && out, "path and out are required");
    return guarded([&] { *out = new whose_schema{whose::SchemaConfig::load(path)}; });
}

whose_status whose_schema_default(whose_schema** out) {
    WHOSE_REQUIRE(out, "out is required");
    return guarded([&] { *out = new whose_schema{}; });
}

void whose_schema_free(whose_schema* schema) { delete schema; }

// ---- store -----------------------------------------------------------------

whose_status whose_store_open(const char* dir, whose_store** out) {
    WHOSE_REQUIRE(dir && out, "dir and out are required");
    return guarded([&] { *out = new whose_store{whose::LogStore::open(dir)}; });
}

whose_status whose_store_open_memory(whose_store** out) {
    WHOSE_REQUIRE(out, "out is required");
    return guarded([&] { *out = new whose_store{whose::LogStore::inMemory()}; });
}

uint64_t whose_store_row_count(const whose_store* store) { return store ? store->store.rows().size() : 0; }

void whose_store_close(whose_store* store) { delete store; }

// ---- ingest ----------------------------------------------------------------

whose_status whose_ingest_file(whose_store* store, const char* path, const char* format, const whose_schema* schema,
                               whose_ingest_report** out) {
    WHOSE_REQUIRE(store && path && format && schema && out, "store, path, format, schema and out are required");
    auto fmt = whose::parseLogFormat(format);
    if (!fmt) return fail(WHOSE_ERR_INVALID_ARGUMENT, "bad_format", std::string("unknown log format '") + format + "'");
    return guarded([&] {
        *out = new whose_ingest_report{whose::ingestFile(path, *fmt, schema->config, store->store)};
    });
}

uint64_t whose_ingest_report_accepted(const whose_ingest_report* r) { return r ? r->report.accepted_count : 0; }
uint64_t whose_ingest_report_rejected(const whose_ingest_report* r) { return r ? r->report.rejected_count : 0; }
size_t whose_ingest_report_rejection_count(const whose_ingest_report* r) { return r ? r->report.rejections.size() : 0; }

const char* whose_ingest_report_rejection_locator(const whose_ingest_report* r, size_t i) {
    if (!r || i >= r->report.rejections.size()) return nullptr;
    return r->report.rejections[i].locator.c_str();
}

const char* whose_ingest_report_rejection_reason(const whose_ingest_report* r, size_t i) {
    if (!r || i >= r->report.rejections.size()) return nullptr;
    return r->report.rejections[i].reason.c_str();
}

void whose_ingest_report_free(whose_ingest_report* r) { delete r; }

// ---- rules -----------------------------------------------------------------

whose_status whose_rules_load(const char* mapping_csv, const char* extraction_csv, whose_rules** out) {
    WHOSE_REQUIRE(mapping_csv && out, "mapping_csv and out are required");
    return guarded([&] {
        auto rules = std::make_unique<whose_rules>();
        try {
            rules->mapping = whose::MappingTable::load(mapping_csv);
        } catch (const whose::Error& e) {
            throw whose::Error(e.kind(), e.code(), std::string(mapping_csv) + ": " + e.what());
        }
        if (extraction_csv) {
            try {
                rules->extraction = whose::ExtractionTable::load(extraction_csv);
            } catch (const whose::Error& e) {
                throw whose::Error(e.kind(), e.code(), std::string(extraction_csv) + ": " + e.what());
            }
        }
        rules->catalog = rules->mapping.catalog();
        *out = rules.release();
    });
}

size_t whose_rules_mapping_count(const whose_rules* r) { return r ? r->mapping.size() : 0; }
size_t whose_rules_extraction_count(const whose_rules* r) { return r ? r->extraction.size() : 0; }
size_t whose_rules_action_count(const whose_rules* r) { return r ? r->catalog.size() : 0; }

const char* whose_rules_rule_action_id(const whose_rules* r, size_t i) {
    if (!r || i >= r->mapping.size()) return nullptr;
    return r->mapping.rules()[i].action_id.c_str();
}

const char* whose_rules_action_id(const whose_rules* r, size_t i) {
    if (!r || i >= r->catalog.size()) return nullptr;
    return r->catalog[i].action_id.c_str();
}

uint32_t whose_rules_rule_order(const whose_rules* r, size_t i) {
    if (!r || i >= r->mapping.size()) return 0;
    return r->mapping.rules()[i].rule_order;
}

void whose_rules_free(whose_rules* r) { delete r; }

// ---- coverage --------------------------------------------------------------

whose_status whose_coverage_measure(const whose_rules* rules, const whose_store* sample, whose_coverage** out) {
    WHOSE_REQUIRE(rules && sample && out, "rules, sample and out are required");
    return guarded([&] { *out = new whose_coverage{whose::measureCoverage(sample->store.rows(), rules->mapping)}; });
}

uint64_t whose_coverage_total_rows(const whose_coverage* c) { return c ? c->coverage.total_rows : 0; }
uint64_t whose_coverage_unmatched_rows(const whose_coverage* c) { return c ? c->coverage.unmatched_rows : 0; }

uint64_t whose_coverage_rule_matches(const whose_coverage* c, size_t i) {
    if (!c || i >= c->coverage.rule_matches.size()) return 0;
    return c->coverage.rule_matches[i];
}

double whose_coverage_ratio(const whose_coverage* c) { return c ? c->coverage.coverage() : 0.0; }
void whose_coverage_free(whose_coverage* c) { delete c; }

// ---- preprocess ------------------------------------------------------------

whose_status whose_preprocess(const whose_store* store, const whose_rules* rules, unsigned threads,
                              const char* out_path, whose_preprocess_stats* stats) {
    WHOSE_REQUIRE(store && rules && out_path, "store, rules and out_path are required");
    if (threads == 0) return fail(WHOSE_ERR_INVALID_ARGUMENT, "bad_worker_count", "threads must be >= 1");
    return guarded([&] {
        auto started = std::chrono::steady_clock::now();
        const auto& rows = store->store.rows();
        auto table = whose::preprocess(rows, rules->mapping, rules->extraction, threads);
        std::uint64_t actions = table.size();
        auto sessions = whose::buildSessions(std::move(table));
        whose::persistAnalysis(out_path, rules->catalog, sessions, threads);
        if (stats) {
            stats->rows = rows.size();
            stats->actions = actions;
            stats->sessions = sessions.size();
            stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }
    });
}

// ---- analysis --------------------------------------------------------------

whose_status whose_analysis_load(const char* path, whose_analysis** out) {
    WHOSE_REQUIRE(path && out, "path and out are required");
    return guarded([&] {
        *out = new whose_analysis{std::make_shared<const whose::SessionStore>(whose::loadAnalysis(path))};
    });
}

size_t whose_analysis_session_count(const whose_analysis* a) { return a ? a->store->sessions().size() : 0; }
void whose_analysis_free(whose_analysis* a) { delete a; }

whose_status whose_export_flow(const whose_analysis* analysis, const char* filter_json, const char* time_range_json,
                               uint32_t max_steps, int64_t now_ms, char** out_json, size_t* out_len) {
    WHOSE_REQUIRE(analysis && out_json, "analysis and out_json are required");
    return guarded([&] {
        nlohmann::json request{{"max_steps", max_steps}};
        if (auto f = parseOptional(filter_json, "filter"); !f.is_null()) request["filter"] = std::move(f);
        if (auto r = parseOptional(time_range_json, "time_range"); !r.is_null()) request["time_range"] = std::move(r);

        whose::ApiService api(analysis->store);
        auto response = api.flow(request.dump(), now_ms >= 0 ? std::optional<whose::TimestampMs>(now_ms) : std::nullopt);
        if (response.status != 200) {
            auto err = nlohmann::json::parse(response.body);
            throw whose::Error(response.status == 404 ? whose::ErrorKind::not_found : whose::ErrorKind::invalid_argument,
                               err.value("error_code", "invalid_request"), err.value("message", response.body));
        }
        *out_json = copyString(response.body);
        if (out_len) *out_len = response.body.size();
    });
}

// ---- server ----------------------------------------------------------------

whose_status whose_server_create(const whose_analysis* analysis, const char* ui_dir, whose_server** out) {
    WHOSE_REQUIRE(analysis && out, "analysis and out are required");
    return guarded([&] {
        std::optional<std::filesystem::path> dir;
        if (ui_dir && *ui_dir) dir = ui_dir;
        *out = new whose_server{whose::HttpServer(analysis->store, dir)};
    });
}

whose_status whose_server_bind(whose_server* server, const char* host, int port, int* bound_port) {
    WHOSE_REQUIRE(server && host, "server and host are required");
    return guarded([&] {
        int p = server->server.bind(host, port);
        if (bound_port) *bound_port = p;
    });
}

whose_status whose_server_run(whose_server* server) {
    WHOSE_REQUIRE(server, "server is required");
    return guarded([&] { server->server.run(); });
}

void whose_server_stop(whose_server* server) {
    if (server) server->server.stop();
}

void whose_server_free(whose_server* server) { delete server; }

} // extern "C"
