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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "whose/log_row.hpp"
#include "whose/time_util.hpp"

namespace whose {

enum class LogFormat { csv, jsonl };

std::optional<LogFormat> parseLogFormat(std::string_view text);

// Where each LogRow field comes from in the source, plus parsing options.
//
// Schema files are plain `key = value` lines; lines starting with `#` are
// comments. Keys:
//
//   session_id, user_id, timestamp, resultlist_ids, url, referrer_url
//       source column (CSV header name or JSON key). For CSV, `#N` selects the
//       N-th column (1-based). An empty value marks an optional field as not
//       present in the source. session_id and timestamp are mandatory.
//   timestamp_format   iso8601 | epoch_s | epoch_ms | a strptime pattern
//   timezone           UTC | +hh:mm | -hh:mm  (applied to zone-less inputs)
//   list_delimiter     separator inside resultlist_ids (default ",")
//   csv_delimiter      CSV field separator (default ","; "\t" for tab)
struct SchemaConfig {
    std::optional<std::string> session_id = "session_id";
    std::optional<std::string> user_id = "user_id";
    std::optional<std::string> timestamp = "timestamp";
    std::optional<std::string> resultlist_ids = "resultlist_ids";
    std::optional<std::string> url = "url";
    std::optional<std::string> referrer_url = "referrer_url";
    TimestampFormat timestamp_format;
    int timezone_offset_minutes = 0;
    char list_delimiter = ',';
    char csv_delimiter = ',';

    static SchemaConfig parse(std::string_view text);
    static SchemaConfig load(const std::filesystem::path& path);
};

namespace rejection {
inline constexpr std::string_view missing_session_id = "missing_session_id";
inline constexpr std::string_view bad_timestamp = "bad_timestamp";
inline constexpr std::string_view wrong_arity = "wrong_arity";
inline constexpr std::string_view malformed_record = "malformed_record";
} // namespace rejection

struct Rejection {
    std::string locator;
    std::string reason;

    bool operator==(const Rejection&) const = default;
};

struct IngestReport {
    std::uint64_t accepted_count = 0;
    std::uint64_t rejected_count = 0;
    std::vector<Rejection> rejections;
};

// Parses single records of one source into LogRows. The row_id of a parsed
// row is left at 0; the store assigns ids on append.
class RecordParser {
public:
    using Result = std::variant<LogRow, Rejection>;

    // CSV: `header` is the source header row. Throws Error(parse) when a
    // mandatory column is missing from the header.
    static RecordParser forCsv(const SchemaConfig& schema, const std::vector<std::string>& header);
    static RecordParser forJsonl(const SchemaConfig& schema);

    Result parse(std::string_view raw, std::string locator = {}) const;
    Result parseFields(const std::vector<std::string>& fields, std::string locator = {}) const;

private:
    RecordParser(LogFormat format, SchemaConfig schema);

    struct Columns {
        std::optional<std::size_t> session_id, user_id, timestamp, resultlist_ids, url, referrer_url;
    };

    Result finish(std::string_view session, std::string_view user, std::string_view ts,
                  std::vector<std::string> resultIds, std::string url, std::string referrer,
                  std::string locator) const;

    LogFormat mFormat;
    SchemaConfig mSchema;
    Columns mColumns;
    std::size_t mArity = 0;
};

// Append-only row storage. A directory-backed store keeps its rows in
// `<dir>/rows.jsonl`; appends take an exclusive lock on `<dir>/.lock` so only
// one writer is active at a time.
class LogStore {
public:
    static LogStore open(const std::filesystem::path& dir);
    static LogStore inMemory();

    const std::vector<LogRow>& rows() const noexcept { return mRows; }
    RowId nextRowId() const noexcept { return mNextRowId; }
    bool persistent() const noexcept { return mDir.has_value(); }

    // Assigns consecutive row ids in input order and persists them.
    void append(std::vector<LogRow> rows);

private:
    LogStore() = default;
    void reload();

    std::optional<std::filesystem::path> mDir;
    std::vector<LogRow> mRows;
    RowId mNextRowId = 1;
    std::uintmax_t mKnownSize = 0;
};

IngestReport ingestStream(std::istream& in, LogFormat format, const SchemaConfig& schema, LogStore& store);

// Throws Error(io) when the file cannot be read.
IngestReport ingestFile(const std::filesystem::path& path, LogFormat format, const SchemaConfig& schema,
                        LogStore& store);

} // namespace whose
