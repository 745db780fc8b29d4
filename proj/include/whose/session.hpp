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
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "whose/action.hpp"

namespace whose {

struct Session {
    std::string session_id;
    std::optional<std::string> user_id;
    TimestampMs start_ts = 0;
    TimestampMs end_ts = 0;
    std::int64_t duration_ms = 0;
    std::uint32_t action_count = 0;
    std::vector<ActionInstance> actions;

    bool loggedIn() const noexcept { return user_id.has_value(); }

    bool operator==(const Session&) const = default;
};

// Groups a canonically ordered analysis table into sessions (ascending
// session_id), assigning step indices and gap-to-next durations.
std::vector<Session> buildSessions(std::vector<ActionInstance> table);

struct SessionSummary {
    std::string session_id;
    std::optional<std::string> user_id;
    TimestampMs start_ts = 0;
    std::int64_t duration_ms = 0;
    std::uint32_t action_count = 0;
};

struct SessionPage {
    std::uint64_t total = 0;
    std::vector<SessionSummary> sessions;
};

SessionSummary summarize(const Session& s);

// Descending start_ts, ties by ascending session_id.
bool newestFirst(const Session& a, const Session& b);

// Immutable after construction; safe for concurrent readers.
class SessionStore {
public:
    SessionStore() = default;
    SessionStore(ActionCatalog catalog, std::vector<Session> sessions);

    const ActionCatalog& catalog() const noexcept { return mCatalog; }
    std::span<const Session> sessions() const noexcept { return mSessions; }

    // Throws Error(not_found).
    const Session& get(std::string_view sessionId) const;
    const Session* find(std::string_view sessionId) const;
    SessionPage list(std::size_t offset, std::size_t limit) const;

    const LabelMap* labels(std::string_view actionId) const;

private:
    ActionCatalog mCatalog;
    std::vector<Session> mSessions;
    std::vector<std::size_t> mNewestFirst;
    std::unordered_map<std::string, std::size_t> mById;
    std::unordered_map<std::string, std::size_t> mCatalogIndex;
};

inline constexpr std::string_view kAnalysisFormat = "whose-analysis";
inline constexpr int kAnalysisVersion = 1;

// Analysis file (JSON Lines):
//   {"format":"whose-analysis","version":1}
//   {"type":"catalog","actions":[{"action_id":...,"labels":{...}}, ...]}
//   then per session one {"type":"session",...} header followed by
//   action_count {"type":"action",...} records.
// `workers` threads encode session blocks; output bytes do not depend on it.
void writeAnalysis(std::ostream& out, const ActionCatalog& catalog, std::span<const Session> sessions,
                   unsigned workers = 1);
void persistAnalysis(const std::filesystem::path& path, const ActionCatalog& catalog,
                     std::span<const Session> sessions, unsigned workers = 1);
SessionStore readAnalysis(std::istream& in);
SessionStore loadAnalysis(const std::filesystem::path& path);

nlohmann::json toJson(const ActionInstance& a, const LabelMap* labels = nullptr);
nlohmann::json toJson(const SessionSummary& s);
// Session header plus its actions, labelled from `catalogOwner` when given.
nlohmann::json toJson(const Session& s, const SessionStore* catalogOwner = nullptr);

} // namespace whose
