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
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace whose {

struct CsvRecord {
    std::vector<std::string> fields;
    // 1-based physical line where the record starts.
    std::size_t line = 0;
};

// RFC-4180 reader: quoted fields may contain delimiters, doubled quotes and
// line breaks. CRLF and LF line endings are both accepted.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, char delimiter = ',');

    std::optional<CsvRecord> next();

private:
    std::istream& mIn;
    char mDelimiter;
    std::size_t mLine = 0;
};

std::vector<std::string> splitCsvRecord(std::string_view raw, char delimiter = ',');

} // namespace whose
