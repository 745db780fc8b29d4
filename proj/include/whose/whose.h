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

/*
 * C interface to the whose session-log analysis library.
 *
 * All objects are opaque handles released with their matching *_free /
 * *_close function. Functions returning whose_status report failures through
 * the status code; whose_last_error() and whose_last_error_code() then
 * describe the most recent failure on the calling thread.
 *
 * Strings returned through char** out-parameters are owned by the caller and
 * released with whose_string_free(). Strings returned directly (const char*)
 * are owned by the handle they were read from.
 */
#ifndef WHOSE_H
#define WHOSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(WHOSE_BUILDING_LIBRARY)
#define WHOSE_API __attribute__((visibility("default")))
#else
#define WHOSE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum whose_status {
    WHOSE_OK = 0,
    WHOSE_ERR_INVALID_ARGUMENT = 1,
    WHOSE_ERR_IO = 2,
    WHOSE_ERR_PARSE = 3,
    WHOSE_ERR_NOT_FOUND = 4,
    WHOSE_ERR_UNSUPPORTED_VERSION = 5,
    WHOSE_ERR_INTERNAL = 6
} whose_status;

typedef struct whose_schema whose_schema;
typedef struct whose_store whose_store;
typedef struct whose_ingest_report whose_ingest_report;
typedef struct whose_rules whose_rules;
typedef struct whose_coverage whose_coverage;
typedef struct whose_analysis whose_analysis;
typedef struct whose_server whose_server;

typedef struct whose_preprocess_stats {
    uint64_t rows;
    uint64_t actions;
    uint64_t sessions;
    double seconds;
} whose_preprocess_stats;

WHOSE_API const char* whose_version(void);
WHOSE_API const char* whose_status_name(whose_status status);
WHOSE_API const char* whose_last_error(void);
WHOSE_API const char* whose_last_error_code(void);
WHOSE_API void whose_string_free(char* s);

/* Log schema (column mapping, timestamp format, delimiters). */
WHOSE_API whose_status whose_schema_load(const char* path, whose_schema** out);
WHOSE_API whose_status whose_schema_default(whose_schema** out);
WHOSE_API void whose_schema_free(whose_schema* schema);

/* Row store. A directory store persists rows; a memory store does not. */
WHOSE_API whose_status whose_store_open(const char* dir, whose_store** out);
WHOSE_API whose_status whose_store_open_memory(whose_store** out);
WHOSE_API uint64_t whose_store_row_count(const whose_store* store);
WHOSE_API void whose_store_close(whose_store* store);

/* format: "csv" or "jsonl". Per-record failures land in the report. */
WHOSE_API whose_status whose_ingest_file(whose_store* store, const char* path, const char* format,
                                         const whose_schema* schema, whose_ingest_report** out);
WHOSE_API uint64_t whose_ingest_report_accepted(const whose_ingest_report* report);
WHOSE_API uint64_t whose_ingest_report_rejected(const whose_ingest_report* report);
WHOSE_API size_t whose_ingest_report_rejection_count(const whose_ingest_report* report);
WHOSE_API const char* whose_ingest_report_rejection_locator(const whose_ingest_report* report, size_t i);
WHOSE_API const char* whose_ingest_report_rejection_reason(const whose_ingest_report* report, size_t i);
WHOSE_API void whose_ingest_report_free(whose_ingest_report* report);

/* Mapping and extraction tables. extraction_csv may be NULL. */
WHOSE_API whose_status whose_rules_load(const char* mapping_csv, const char* extraction_csv, whose_rules** out);
WHOSE_API size_t whose_rules_mapping_count(const whose_rules* rules);
WHOSE_API size_t whose_rules_extraction_count(const whose_rules* rules);
/* Mapping rule i, in file order. */
WHOSE_API const char* whose_rules_rule_action_id(const whose_rules* rules, size_t i);
WHOSE_API uint32_t whose_rules_rule_order(const whose_rules* rules, size_t i);
/* Distinct actions (catalog order, ending with "__unmatched__"). */
WHOSE_API size_t whose_rules_action_count(const whose_rules* rules);
WHOSE_API const char* whose_rules_action_id(const whose_rules* rules, size_t i);
WHOSE_API void whose_rules_free(whose_rules* rules);

/* Per-rule match counts and coverage of a sample store. */
WHOSE_API whose_status whose_coverage_measure(const whose_rules* rules, const whose_store* sample,
                                              whose_coverage** out);
WHOSE_API uint64_t whose_coverage_total_rows(const whose_coverage* cov);
WHOSE_API uint64_t whose_coverage_unmatched_rows(const whose_coverage* cov);
WHOSE_API uint64_t whose_coverage_rule_matches(const whose_coverage* cov, size_t rule_index);
WHOSE_API double whose_coverage_ratio(const whose_coverage* cov);
WHOSE_API void whose_coverage_free(whose_coverage* cov);

/* Maps, sessionizes and writes the analysis file. threads >= 1. */
WHOSE_API whose_status whose_preprocess(const whose_store* store, const whose_rules* rules, unsigned threads,
                                        const char* out_path, whose_preprocess_stats* stats);

WHOSE_API whose_status whose_analysis_load(const char* path, whose_analysis** out);
WHOSE_API size_t whose_analysis_session_count(const whose_analysis* analysis);
WHOSE_API void whose_analysis_free(whose_analysis* analysis);

/*
 * Flow graph JSON for a filter and time range, byte-identical to the body of
 * POST /api/flow. filter_json / time_range_json may be NULL (no filter / all
 * time). now_ms >= 0 overrides the effective "now" like the X-Whose-Now
 * header does; pass -1 otherwise.
 */
WHOSE_API whose_status whose_export_flow(const whose_analysis* analysis, const char* filter_json,
                                         const char* time_range_json, uint32_t max_steps, int64_t now_ms,
                                         char** out_json, size_t* out_len);

/* HTTP service over a loaded analysis. ui_dir may be NULL. */
WHOSE_API whose_status whose_server_create(const whose_analysis* analysis, const char* ui_dir, whose_server** out);
WHOSE_API whose_status whose_server_bind(whose_server* server, const char* host, int port, int* bound_port);
WHOSE_API whose_status whose_server_run(whose_server* server);
WHOSE_API void whose_server_stop(whose_server* server);
WHOSE_API void whose_server_free(whose_server* server);

#ifdef __cplusplus
}
#endif

#endif /* WHOSE_H */
