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

#include "whose/csv.hpp"

#include <sstream>

namespace whose {

CsvReader::CsvReader(std::istream& in, char delimiter) : mIn(in), mDelimiter(delimiter) {}

std::optional<CsvRecord> CsvReader::next() {
    if (mIn.peek() == std::char_traits<char>::eof()) return std::nullopt;

    CsvRecord rec;
    rec.line = mLine + 1;
    std::string field;
    bool quoted = false;
    bool fieldWasQuoted = false;
    int ch;
    while ((ch = mIn.get()) != std::char_traits<char>::eof()) {
        char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (mIn.peek() == '"') {
                    field.push_back('"');
                    mIn.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++mLine;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty() && !fieldWasQuoted) {
            quoted = true;
            fieldWasQuoted = true;
        } else if (c == mDelimiter) {
            rec.fields.push_back(std::move(field));
            field.clear();
            fieldWasQuoted = false;
        } else if (c == '\r' && mIn.peek() == '\n') {
            // CRLF; the LF ends the record.
        } else if (c == '\n') {
            ++mLine;
            rec.fields.push_back(std::move(field));
            return rec;
        } else {
            field.push_back(c);
        }
    }
    ++mLine;
    rec.fields.push_back(std::move(field));
    return rec;
}

std::vector<std::string> splitCsvRecord(std::string_view raw, char delimiter) {
    while (!raw.empty() && (raw.back() == '\n' || raw.back() == '\r')) raw.remove_suffix(1);
    std::istringstream in{std::string(raw)};
    CsvReader reader(in, delimiter);
    auto rec = reader.next();
    if (!rec) return {std::string()};
    return std::move(rec->fields);
}

} // namespace whose
