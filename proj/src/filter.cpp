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

#include "whose/filter.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>

#include "whose/error.hpp"

namespace whose {

using nlohmann::json;

ResolvedRange resolveTimeRange(const TimeRange& range) {
    auto lastDays = [&](int days) -> ResolvedRange {
        if (!range.now)
            throw Error(ErrorKind::invalid_argument, "missing_now", "time range preset needs 'now'", "time_range.now");
        return {*range.now - days * kMillisPerDay, *range.now};
    };
    switch (range.preset) {
    case TimeRange::Preset::all:
        return {};
    case TimeRange::Preset::last_7_days:
        return lastDays(7);
    case TimeRange::Preset::last_30_days:
        return lastDays(30);
    case TimeRange::Preset::custom:
        if (range.start_ts && range.end_ts && *range.start_ts > *range.end_ts)
            throw Error(ErrorKind::invalid_argument, "inverted_range", "start_ts must not be after end_ts",
                        "time_range.start_ts");
        return {range.start_ts, range.end_ts};
    }
    return {};
}

bool containsIgnoreCase(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    return it != haystack.end();
}

namespace {

bool textClause(const Session& s, std::string_view needle) {
    for (const auto& a : s.actions) {
        if (containsIgnoreCase(a.url, needle)) return true;
        for (const auto& [name, values] : a.entities)
            for (const auto& v : values)
                if (containsIgnoreCase(v, needle)) return true;
    }
    return false;
}

bool actionDurationClause(const Session& s, const ActionDurationClause& c) {
    return std::any_of(s.actions.begin(), s.actions.end(), [&](const ActionInstance& a) {
        if (c.action_id && a.action_id != *c.action_id) return false;
        return a.duration_ms && *a.duration_ms >= c.min_ms;
    });
}

} // namespace

bool sessionMatches(const Session& s, const FilterSpec& spec, const ResolvedRange& range) {
    if (!range.contains(s.start_ts)) return false;
    if (spec.contains_text && !textClause(s, *spec.contains_text)) return false;
    if (spec.session_duration) {
        const auto& b = *spec.session_duration;
        if (b.min_ms && s.duration_ms < *b.min_ms) return false;
        if (b.max_ms && s.duration_ms > *b.max_ms) return false;
    }
    if (spec.logged_in_only && !s.loggedIn()) return false;
    if (spec.user_id && s.user_id != spec.user_id) return false;
    if (spec.min_actions_exclusive && !(s.action_count > *spec.min_actions_exclusive)) return false;
    if (spec.contains_action &&
        std::none_of(s.actions.begin(), s.actions.end(),
                     [&](const ActionInstance& a) { return a.action_id == *spec.contains_action; }))
        return false;
    if (spec.action_duration && !actionDurationClause(s, *spec.action_duration)) return false;
    return true;
}

std::vector<const Session*> applyFilter(std::span<const Session> sessions, const FilterSpec& spec,
                                        const ResolvedRange& range) {
    std::vector<const Session*> out;
    for (const auto& s : sessions)
        if (sessionMatches(s, spec, range)) out.push_back(&s);
    std::sort(out.begin(), out.end(), [](const Session* a, const Session* b) { return newestFirst(*a, *b); });
    return out;
}

// ---- JSON ------------------------------------------------------------------

namespace {

[[noreturn]] void badField(const std::string& field, const std::string& message) {
    throw Error(ErrorKind::invalid_argument, "invalid_field", field + ": " + message, field);
}

void rejectUnknownKeys(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) badField(prefix + key, "unknown field");
}

std::int64_t nonNegative(const json& v, const std::string& field) {
    if (!v.is_number_integer()) badField(field, "expected an integer");
    auto n = v.get<std::int64_t>();
    if (n < 0) badField(field, "must be non-negative");
    return n;
}

std::optional<TimestampMs> instant(const json& j, const char* key, const std::string& prefix) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) badField(prefix + key, "expected epoch milliseconds");
    return it->get<TimestampMs>();
}

std::string string(const json& v, const std::string& field) {
    if (!v.is_string()) badField(field, "expected a string");
    return v.get<std::string>();
}

constexpr std::string_view presetName(TimeRange::Preset p) {
    switch (p) {
    case TimeRange::Preset::all: return "all";
    case TimeRange::Preset::last_7_days: return "last_7_days";
    case TimeRange::Preset::last_30_days: return "last_30_days";
    case TimeRange::Preset::custom: return "custom";
    }
    return "all";
}

} // namespace

json toJson(const FilterSpec& spec) {
    json j = json::object();
    if (spec.contains_text) j["contains_text"] = *spec.contains_text;
    if (spec.session_duration) {
        json b = json::object();
        if (spec.session_duration->min_ms) b["min_ms"] = *spec.session_duration->min_ms;
        if (spec.session_duration->max_ms) b["max_ms"] = *spec.session_duration->max_ms;
        j["session_duration"] = b;
    }
    if (spec.logged_in_only) j["logged_in_only"] = true;
    if (spec.user_id) j["user_id"] = *spec.user_id;
    if (spec.min_actions_exclusive) j["min_actions_exclusive"] = *spec.min_actions_exclusive;
    if (spec.contains_action) j["contains_action"] = *spec.contains_action;
    if (spec.action_duration) {
        json c{{"min_ms", spec.action_duration->min_ms}};
        if (spec.action_duration->action_id) c["action_id"] = *spec.action_duration->action_id;
        j["action_duration"] = c;
    }
    return j;
}

json toJson(const TimeRange& range) {
    json j{{"preset", presetName(range.preset)}};
    if (range.start_ts) j["start_ts"] = *range.start_ts;
    if (range.end_ts) j["end_ts"] = *range.end_ts;
    if (range.now) j["now"] = *range.now;
    return j;
}

FilterSpec filterFromJson(const json& j) {
    FilterSpec spec;
    if (j.is_null()) return spec;
    if (!j.is_object()) badField("filter", "expected an object");
    rejectUnknownKeys(j,
                      {"contains_text", "session_duration", "logged_in_only", "user_id", "min_actions_exclusive",
                       "contains_action", "action_duration"},
                      "filter.");
    auto present = [&](const char* key) { return j.contains(key) && !j.at(key).is_null(); };

    if (present("contains_text")) spec.contains_text = string(j.at("contains_text"), "filter.contains_text");
    if (present("session_duration")) {
        const json& b = j.at("session_duration");
        if (!b.is_object()) badField("filter.session_duration", "expected an object");
        rejectUnknownKeys(b, {"min_ms", "max_ms"}, "filter.session_duration.");
        DurationBounds bounds;
        if (b.contains("min_ms") && !b["min_ms"].is_null())
            bounds.min_ms = nonNegative(b["min_ms"], "filter.session_duration.min_ms");
        if (b.contains("max_ms") && !b["max_ms"].is_null())
            bounds.max_ms = nonNegative(b["max_ms"], "filter.session_duration.max_ms");
        if (bounds.min_ms && bounds.max_ms && *bounds.min_ms > *bounds.max_ms)
            badField("filter.session_duration", "min_ms exceeds max_ms");
        spec.session_duration = bounds;
    }
    if (present("logged_in_only")) {
        if (!j.at("logged_in_only").is_boolean()) badField("filter.logged_in_only", "expected a boolean");
        spec.logged_in_only = j.at("logged_in_only").get<bool>();
    }
    if (present("user_id")) spec.user_id = string(j.at("user_id"), "filter.user_id");
    if (present("min_actions_exclusive")) {
        auto n = nonNegative(j.at("min_actions_exclusive"), "filter.min_actions_exclusive");
        if (n > std::numeric_limits<std::uint32_t>::max()) badField("filter.min_actions_exclusive", "too large");
        spec.min_actions_exclusive = static_cast<std::uint32_t>(n);
    }
    if (present("contains_action")) spec.contains_action = string(j.at("contains_action"), "filter.contains_action");
    if (present("action_duration")) {
        const json& c = j.at("action_duration");
        if (!c.is_object()) badField("filter.action_duration", "expected an object");
        rejectUnknownKeys(c, {"action_id", "min_ms"}, "filter.action_duration.");
        if (!c.contains("min_ms")) badField("filter.action_duration.min_ms", "required");
        ActionDurationClause clause;
        clause.min_ms = nonNegative(c.at("min_ms"), "filter.action_duration.min_ms");
        if (c.contains("action_id") && !c.at("action_id").is_null())
            clause.action_id = string(c.at("action_id"), "filter.action_duration.action_id");
        spec.action_duration = clause;
    }
    return spec;
}

TimeRange timeRangeFromJson(const json& j) {
    TimeRange range;
    if (j.is_null()) return range;
    if (!j.is_object()) badField("time_range", "expected an object");
    rejectUnknownKeys(j, {"preset", "start_ts", "end_ts", "now"}, "time_range.");
    std::string preset = j.contains("preset") ? string(j.at("preset"), "time_range.preset") : "all";
    if (preset == "all") range.preset = TimeRange::Preset::all;
    else if (preset == "last_7_days") range.preset = TimeRange::Preset::last_7_days;
    else if (preset == "last_30_days") range.preset = TimeRange::Preset::last_30_days;
    else if (preset == "custom") range.preset = TimeRange::Preset::custom;
    else badField("time_range.preset", "unknown preset '" + preset + "'");
    range.start_ts = instant(j, "start_ts", "time_range.");
    range.end_ts = instant(j, "end_ts", "time_range.");
    range.now = instant(j, "now", "time_range.");
    if (range.preset == TimeRange::Preset::custom && range.start_ts && range.end_ts && *range.start_ts > *range.end_ts)
        throw Error(ErrorKind::invalid_argument, "inverted_range", "time_range.start_ts: start_ts must not be after end_ts",
                    "time_range.start_ts");
    return range;
}

} // namespace whose
