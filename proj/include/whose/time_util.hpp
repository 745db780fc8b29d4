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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace whose {

// UTC instant in milliseconds since the Unix epoch.
using TimestampMs = std::int64_t;

constexpr TimestampMs kMillisPerDay = 86'400'000;

struct TimestampFormat {
    enum class Kind { iso8601, epoch_seconds, epoch_millis, pattern };
    Kind kind = Kind::iso8601;
    // strptime-style pattern, only for Kind::pattern (e.g. "%d/%m/%Y %H:%M:%S").
    std::string pattern;

    static TimestampFormat parse(std::string_view text);
};

// Parses ISO-8601 date-times: `YYYY-MM-DD[(T| )hh:mm[:ss[.fff]]][Z|(+|-)hh[:]mm]`.
// Inputs without a zone designator are shifted by `defaultOffsetMinutes`.
std::optional<TimestampMs> parseIso8601(std::string_view text, int defaultOffsetMinutes = 0);

std::optional<TimestampMs> parseTimestamp(std::string_view text, const TimestampFormat& format,
                                          int defaultOffsetMinutes = 0);

// "UTC", "Z", "+02:00", "-0530". Returns minutes east of UTC.
std::optional<int> parseUtcOffset(std::string_view text);

TimestampMs fromCivil(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                      int second = 0, int millis = 0);

// Always "YYYY-MM-DDThh:mm:ss.fffZ".
std::string formatIso8601(TimestampMs ts);

} // namespace whose
