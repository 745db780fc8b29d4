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

#include "whose/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "whose/csv.hpp"
#include "whose/error.hpp"
#include "utf8.hpp"

namespace whose {

namespace {

std::string trimmed(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

char parseDelimiter(const std::string& value, const std::string& key) {
    if (value == "\\t" || value == "tab") return '\t';
    if (value.size() != 1) throw Error(ErrorKind::parse, "bad_schema", key + " must be a single character");
    return value[0];
}

std::optional<std::string> columnOrAbsent(const std::string& value) {
    if (value.empty()) return std::nullopt;
    return value;
}

std::vector<std::string> splitList(std::string_view text, char delimiter) {
    std::vector<std::string> out;
    if (trimmed(text).empty()) return out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = text.find(delimiter, start);
        std::string item = trimmed(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<std::size_t> resolveColumn(const std::optional<std::string>& spec,
                                         const std::vector<std::string>& header, bool required,
                                         std::string_view field) {
    if (!spec) {
        if (required) throw Error(ErrorKind::parse, "bad_schema", std::string(field) + " column is mandatory");
        return std::nullopt;
    }
    if (spec->size() > 1 && (*spec)[0] == '#') {
        std::size_t idx = 0;
        try {
            idx = std::stoul(spec->substr(1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::parse, "bad_schema", "bad column index '" + *spec + "'");
        }
        if (idx == 0 || idx > header.size())
            throw Error(ErrorKind::parse, "missing_column", "column " + *spec + " out of range for " + std::string(field));
        return idx - 1;
    }
    auto it = std::find(header.begin(), header.end(), *spec);
    if (it == header.end()) {
        if (required)
            throw Error(ErrorKind::parse, "missing_column",
                        "column '" + *spec + "' for " + std::string(field) + " not found in header");
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

std::optional<LogFormat> parseLogFormat(std::string_view text) {
    if (text == "csv") return LogFormat::csv;
    if (text == "jsonl" || text == "ndjson") return LogFormat::jsonl;
    return std::nullopt;
}

SchemaConfig SchemaConfig::parse(std::string_view text) {
    SchemaConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        std::string body = trimmed(line);
        if (body.empty() || body[0] == '#') continue;
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::parse, "bad_schema", "schema line " + std::to_string(lineNo) + ": expected key = value");
        std::string key = trimmed(std::string_view(body).substr(0, eq));
        std::string value = trimmed(std::string_view(body).substr(eq + 1));
        if (key == "session_id") cfg.session_id = columnOrAbsent(value);
        else if (key == "user_id") cfg.user_id = columnOrAbsent(value);
        else if (key == "timestamp") cfg.timestamp = columnOrAbsent(value);
        else if (key == "resultlist_ids") cfg.resultlist_ids = columnOrAbsent(value);
        else if (key == "url") cfg.url = columnOrAbsent(value);
        else if (key == "referrer_url") cfg.referrer_url = columnOrAbsent(value);
        else if (key == "timestamp_format") cfg.timestamp_format = TimestampFormat::parse(value);
        else if (key == "timezone") {
            auto off = parseUtcOffset(value);
            if (!off) throw Error(ErrorKind::parse, "bad_schema", "unsupported timezone '" + value + "'");
            cfg.timezone_offset_minutes = *off;
        } else if (key == "list_delimiter") cfg.list_delimiter = parseDelimiter(value, key);
        else if (key == "csv_delimiter") cfg.csv_delimiter = parseDelimiter(value, key);
        else throw Error(ErrorKind::parse, "bad_schema", "schema line " + std::to_string(lineNo) + ": unknown key '" + key + "'");
    }
    if (!cfg.session_id) throw Error(ErrorKind::parse, "bad_schema", "session_id column is mandatory");
    if (!cfg.timestamp) throw Error(ErrorKind::parse, "bad_schema", "timestamp column is mandatory");
    return cfg;
}

SchemaConfig SchemaConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "unreadable_file", "cannot read schema " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

RecordParser::RecordParser(LogFormat format, SchemaConfig schema) : mFormat(format), mSchema(std::move(schema)) {}

RecordParser RecordParser::forCsv(const SchemaConfig& schema, const std::vector<std::string>& header) {
    RecordParser p(LogFormat::csv, schema);
    p.mArity = header.size();
    p.mColumns.session_id = resolveColumn(schema.session_id, header, true, "session_id");
    p.mColumns.timestamp = resolveColumn(schema.timestamp, header, true, "timestamp");
    p.mColumns.user_id = resolveColumn(schema.user_id, header, false, "user_id");
    p.mColumns.resultlist_ids = resolveColumn(schema.resultlist_ids, header, false, "resultlist_ids");
    p.mColumns.url = resolveColumn(schema.url, header, false, "url");
    p.mColumns.referrer_url = resolveColumn(schema.referrer_url, header, false, "referrer_url");
    return p;
}

RecordParser RecordParser::forJsonl(const SchemaConfig& schema) { return RecordParser(LogFormat::jsonl, schema); }

RecordParser::Result RecordParser::parse(std::string_view raw, std::string locator) const {
    if (mFormat == LogFormat::csv) return parseFields(splitCsvRecord(raw, mSchema.csv_delimiter), std::move(locator));

    nlohmann::json obj = nlohmann::json::parse(raw, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        return Rejection{std::move(locator), std::string(rejection::malformed_record)};

    auto text = [&](const std::optional<std::string>& key) -> std::string {
        if (!key) return {};
        auto it = obj.find(*key);
        if (it == obj.end() || it->is_null()) return {};
        if (it->is_string()) return it->get<std::string>();
        return it->dump();
    };
    std::vector<std::string> ids;
    if (mSchema.resultlist_ids) {
        auto it = obj.find(*mSchema.resultlist_ids);
        if (it != obj.end() && it->is_array()) {
            for (const auto& v : *it) ids.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        } else {
            ids = splitList(text(mSchema.resultlist_ids), mSchema.list_delimiter);
        }
    }
    return finish(text(mSchema.session_id), text(mSchema.user_id), text(mSchema.timestamp), std::move(ids),
                  text(mSchema.url), text(mSchema.referrer_url), std::move(locator));
}

RecordParser::Result RecordParser::parseFields(const std::vector<std::string>& fields, std::string locator) const {
    if (fields.size() != mArity) return Rejection{std::move(locator), std::string(rejection::wrong_arity)};
    auto at = [&](const std::optional<std::size_t>& idx) -> std::string_view {
        return idx ? std::string_view(fields[*idx]) : std::string_view();
    };
    return finish(at(mColumns.session_id), at(mColumns.user_id), at(mColumns.timestamp),
                  splitList(at(mColumns.resultlist_ids), mSchema.list_delimiter), std::string(at(mColumns.url)),
                  std::string(at(mColumns.referrer_url)), std::move(locator));
}

RecordParser::Result RecordParser::finish(std::string_view session, std::string_view user, std::string_view ts,
                                          std::vector<std::string> resultIds, std::string url, std::string referrer,
                                          std::string locator) const {
    std::string sid = trimmed(session);
    if (sid.empty()) return Rejection{std::move(locator), std::string(rejection::missing_session_id)};
    auto parsed = parseTimestamp(ts, mSchema.timestamp_format, mSchema.timezone_offset_minutes);
    if (!parsed) return Rejection{std::move(locator), std::string(rejection::bad_timestamp)};

    using detail::sanitizeUtf8;
    LogRow row;
    row.session_id = sanitizeUtf8(sid);
    if (std::string uid = trimmed(user); !uid.empty()) row.user_id = sanitizeUtf8(uid);
    row.timestamp = *parsed;
    for (auto& id : resultIds) row.resultlist_ids.push_back(sanitizeUtf8(id));
    row.url = sanitizeUtf8(url);
    row.referrer_url = sanitizeUtf8(referrer);
    return row;
}

IngestReport ingestStream(std::istream& in, LogFormat format, const SchemaConfig& schema, LogStore& store) {
    IngestReport report;
    std::vector<LogRow> accepted;

    auto take = [&](RecordParser::Result result) {
        if (auto* row = std::get_if<LogRow>(&result)) {
            accepted.push_back(std::move(*row));
            ++report.accepted_count;
        } else {
            report.rejections.push_back(std::get<Rejection>(std::move(result)));
            ++report.rejected_count;
        }
    };

    if (format == LogFormat::csv) {
        CsvReader reader(in, schema.csv_delimiter);
        auto header = reader.next();
        if (!header) {
            store.append({});
            return report;
        }
        if (!header->fields.empty() && header->fields[0].rfind("\xEF\xBB\xBF", 0) == 0)
            header->fields[0].erase(0, 3);
        for (auto& h : header->fields) h = trimmed(h);
        RecordParser parser = RecordParser::forCsv(schema, header->fields);
        while (auto rec = reader.next()) {
            if (rec->fields.size() == 1 && rec->fields[0].empty()) continue; // blank line
            take(parser.parseFields(rec->fields, "line " + std::to_string(rec->line)));
        }
    } else {
        RecordParser parser = RecordParser::forJsonl(schema);
        std::string line;
        std::size_t lineNo = 0;
        while (std::getline(in, line)) {
            ++lineNo;
            if (trimmed(line).empty()) continue;
            take(parser.parse(line, "line " + std::to_string(lineNo)));
        }
    }
    store.append(std::move(accepted));
    return report;
}

IngestReport ingestFile(const std::filesystem::path& path, LogFormat format, const SchemaConfig& schema,
                        LogStore& store) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "unreadable_file", "cannot read log file " + path.string());
    return ingestStream(in, format, schema, store);
}

} // namespace whose
