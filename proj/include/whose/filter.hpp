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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "whose/session.hpp"
#include "whose/time_util.hpp"

namespace whose {

struct TimeRange {
    enum class Preset { all, last_7_days, last_30_days, custom };
    Preset preset = Preset::all;
    std::optional<TimestampMs> start_ts;
    std::optional<TimestampMs> end_ts;
    std::optional<TimestampMs> now;

    bool operator==(const TimeRange&) const = default;
};

// Closed interval; a missing bound is unbounded.
struct ResolvedRange {
    std::optional<TimestampMs> start;
    std::optional<TimestampMs> end;

    bool contains(TimestampMs ts) const noexcept {
        return (!start || ts >= *start) && (!end || ts <= *end);
    }
    bool operator==(const ResolvedRange&) const = default;
};

// Throws Error(invalid_argument) for inverted custom ranges and presets
// without `now`.
ResolvedRange resolveTimeRange(const TimeRange& range);

struct DurationBounds {
    std::optional<std::int64_t> min_ms;
    std::optional<std::int64_t> max_ms;
    bool operator==(const DurationBounds&) const = default;
};

struct ActionDurationClause {
    std::optional<std::string> action_id;
    std::int64_t min_ms = 0;
    bool operator==(const ActionDurationClause&) const = default;
};

// All present clauses are ANDed.
struct FilterSpec {
    std::optional<std::string> contains_text;
    std::optional<DurationBounds> session_duration;
    bool logged_in_only = false;
    std::optional<std::string> user_id;
    std::optional<std::uint32_t> min_actions_exclusive;
    std::optional<std::string> contains_action;
    std::optional<ActionDurationClause> action_duration;

    bool operator==(const FilterSpec&) const = default;
};

bool sessionMatches(const Session& s, const FilterSpec& spec, const ResolvedRange& range);

// Matching sessions, newest first (ties by session_id).
std::vector<const Session*> applyFilter(std::span<const Session> sessions, const FilterSpec& spec,
                                        const ResolvedRange& range);

// Case-insensitive (ASCII) substring test.
bool containsIgnoreCase(std::string_view haystack, std::string_view needle);

// Canonical JSON encodings. Decoding throws Error(invalid_argument) naming
// the offending field; unknown keys are rejected.
nlohmann::json toJson(const FilterSpec& spec);
nlohmann::json toJson(const TimeRange& range);
FilterSpec filterFromJson(const nlohmann::json& j);
TimeRange timeRangeFromJson(const nlohmann::json& j);

} // namespace whose
