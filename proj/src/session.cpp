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

#include "whose/session.hpp"

#include <algorithm>
#include <fstream>

#include "whose/error.hpp"

#include "parallel.hpp"

namespace whose {

using nlohmann::json;

std::vector<Session> buildSessions(std::vector<ActionInstance> table) {
    std::vector<Session> sessions;
    std::size_t i = 0;
    while (i < table.size()) {
        std::size_t j = i;
        while (j < table.size() && table[j].session_id == table[i].session_id) ++j;

        Session s;
        s.session_id = table[i].session_id;
        s.actions.reserve(j - i);
        for (std::size_t k = i; k < j; ++k) s.actions.push_back(std::move(table[k]));
        std::sort(s.actions.begin(), s.actions.end(), canonicalLess);

        for (std::size_t k = 0; k < s.actions.size(); ++k) {
            auto& a = s.actions[k];
            a.step_index = static_cast<std::uint32_t>(k + 1);
            if (k + 1 < s.actions.size()) a.duration_ms = s.actions[k + 1].timestamp - a.timestamp;
            else a.duration_ms.reset();
            if (!s.user_id && a.user_id) s.user_id = a.user_id;
        }
        s.start_ts = s.actions.front().timestamp;
        s.end_ts = s.actions.back().timestamp;
        s.duration_ms = s.end_ts - s.start_ts;
        s.action_count = static_cast<std::uint32_t>(s.actions.size());
        sessions.push_back(std::move(s));
        i = j;
    }
    std::sort(sessions.begin(), sessions.end(),
              [](const Session& a, const Session& b) { return a.session_id < b.session_id; });
    return sessions;
}

SessionSummary summarize(const Session& s) {
    return {s.session_id, s.user_id, s.start_ts, s.duration_ms, s.action_count};
}

bool newestFirst(const Session& a, const Session& b) {
    if (a.start_ts != b.start_ts) return a.start_ts > b.start_ts;
    return a.session_id < b.session_id;
}

// ---- store -----------------------------------------------------------------

SessionStore::SessionStore(ActionCatalog catalog, std::vector<Session> sessions)
    : mCatalog(std::move(catalog)), mSessions(std::move(sessions)) {
    mNewestFirst.resize(mSessions.size());
    for (std::size_t i = 0; i < mSessions.size(); ++i) {
        mNewestFirst[i] = i;
        if (!mById.emplace(mSessions[i].session_id, i).second)
            throw Error(ErrorKind::parse, "duplicate_session", "duplicate session " + mSessions[i].session_id);
    }
    std::sort(mNewestFirst.begin(), mNewestFirst.end(),
              [&](std::size_t a, std::size_t b) { return newestFirst(mSessions[a], mSessions[b]); });
    for (std::size_t i = 0; i < mCatalog.size(); ++i) mCatalogIndex.emplace(mCatalog[i].action_id, i);
}

const Session* SessionStore::find(std::string_view sessionId) const {
    auto it = mById.find(std::string(sessionId));
    return it == mById.end() ? nullptr : &mSessions[it->second];
}

const Session& SessionStore::get(std::string_view sessionId) const {
    if (const Session* s = find(sessionId)) return *s;
    throw Error(ErrorKind::not_found, "not_found", "unknown session '" + std::string(sessionId) + "'");
}

SessionPage SessionStore::list(std::size_t offset, std::size_t limit) const {
    SessionPage page;
    page.total = mSessions.size();
    for (std::size_t i = offset; i < mNewestFirst.size() && page.sessions.size() < limit; ++i)
        page.sessions.push_back(summarize(mSessions[mNewestFirst[i]]));
    return page;
}

const LabelMap* SessionStore::labels(std::string_view actionId) const {
    auto it = mCatalogIndex.find(std::string(actionId));
    return it == mCatalogIndex.end() ? nullptr : &mCatalog[it->second].labels;
}

// ---- JSON ------------------------------------------------------------------

json toJson(const ActionInstance& a, const LabelMap* labels) {
    json j{{"session_id", a.session_id},
           {"source_row_id", a.source_row_id},
           {"action_id", a.action_id},
           {"timestamp", a.timestamp},
           {"intra_row_index", a.intra_row_index},
           {"step_index", a.step_index},
           {"entities", a.entities},
           {"url", a.url}};
    j["duration_ms"] = a.duration_ms ? json(*a.duration_ms) : json(nullptr);
    if (a.user_id) j["user_id"] = *a.user_id;
    if (labels) j["labels"] = *labels;
    return j;
}

json toJson(const SessionSummary& s) {
    return json{{"session_id", s.session_id},
                {"user_id", s.user_id ? json(*s.user_id) : json(nullptr)},
                {"logged_in", s.user_id.has_value()},
                {"start_ts", s.start_ts},
                {"duration_ms", s.duration_ms},
                {"action_count", s.action_count}};
}

namespace {

json sessionHeader(const Session& s) {
    return json{{"type", "session"},
                {"session_id", s.session_id},
                {"user_id", s.user_id ? json(*s.user_id) : json(nullptr)},
                {"start_ts", s.start_ts},
                {"end_ts", s.end_ts},
                {"duration_ms", s.duration_ms},
                {"action_count", s.action_count}};
}

ActionInstance actionFromJson(const json& j) {
    ActionInstance a;
    a.session_id = j.at("session_id").get<std::string>();
    a.source_row_id = j.at("source_row_id").get<RowId>();
    a.action_id = j.at("action_id").get<std::string>();
    a.timestamp = j.at("timestamp").get<TimestampMs>();
    a.intra_row_index = j.at("intra_row_index").get<std::uint32_t>();
    a.step_index = j.at("step_index").get<std::uint32_t>();
    if (auto it = j.find("duration_ms"); it != j.end() && !it->is_null()) a.duration_ms = it->get<std::int64_t>();
    a.entities = j.at("entities").get<EntityMap>();
    a.url = j.at("url").get<std::string>();
    if (auto it = j.find("user_id"); it != j.end() && !it->is_null()) a.user_id = it->get<std::string>();
    return a;
}

} // namespace

json toJson(const Session& s, const SessionStore* catalogOwner) {
    json j = sessionHeader(s);
    j.erase("type");
    j["logged_in"] = s.loggedIn();
    json actions = json::array();
    for (const auto& a : s.actions) actions.push_back(toJson(a, catalogOwner ? catalogOwner->labels(a.action_id) : nullptr));
    j["actions"] = std::move(actions);
    return j;
}

namespace {

constexpr std::size_t kWriteBlockSessions = 512;

void appendSession(std::string& buf, const Session& s) {
    buf += sessionHeader(s).dump();
    buf += '\n';
    for (const auto& a : s.actions) {
        json rec = toJson(a);
        rec["type"] = "action";
        buf += rec.dump();
        buf += '\n';
    }
}

} // namespace

void writeAnalysis(std::ostream& out, const ActionCatalog& catalog, std::span<const Session> sessions,
                   unsigned workers) {
    out << json{{"format", kAnalysisFormat}, {"version", kAnalysisVersion}}.dump() << '\n';
    json actions = json::array();
    for (const auto& info : catalog) actions.push_back(json{{"action_id", info.action_id}, {"labels", info.labels}});
    out << json{{"type", "catalog"}, {"actions", std::move(actions)}}.dump() << '\n';

    // Blocks of sessions are encoded concurrently, a bounded window at a
    // time, and written in session order.
    workers = std::max(workers, 1u);
    std::size_t blocks = (sessions.size() + kWriteBlockSessions - 1) / kWriteBlockSessions;
    std::size_t window = std::size_t{workers} * 4;
    std::vector<std::string> encoded(std::min(window, blocks));
    for (std::size_t first = 0; first < blocks; first += window) {
        std::size_t count = std::min(window, blocks - first);
        detail::parallelFor(count, workers, [&](std::size_t i) {
            std::size_t begin = (first + i) * kWriteBlockSessions;
            std::size_t end = std::min(sessions.size(), begin + kWriteBlockSessions);
            auto& buf = encoded[i];
            buf.clear();
            for (std::size_t k = begin; k < end; ++k) appendSession(buf, sessions[k]);
        });
        for (std::size_t i = 0; i < count; ++i) out.write(encoded[i].data(), static_cast<std::streamsize>(encoded[i].size()));
    }
}

void persistAnalysis(const std::filesystem::path& path, const ActionCatalog& catalog,
                     std::span<const Session> sessions, unsigned workers) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "unwritable_file", "cannot write " + path.string());
    writeAnalysis(out, catalog, sessions, workers);
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write_failed", "write failed for " + path.string());
}

SessionStore readAnalysis(std::istream& in) {
    std::string line;
    std::size_t lineNo = 0;
    auto fail = [&](const std::string& what) -> Error {
        return Error(ErrorKind::parse, "bad_analysis_file", "analysis line " + std::to_string(lineNo) + ": " + what);
    };

    ActionCatalog catalog;
    std::vector<Session> sessions;
    bool sawHeader = false;
    std::uint32_t pending = 0;
    try {
        while (std::getline(in, line)) {
            ++lineNo;
            if (line.empty()) continue;
            json j = json::parse(line);
            if (!sawHeader) {
                if (!j.is_object() || j.value("format", "") != kAnalysisFormat) throw fail("not a whose-analysis file");
                int version = j.value("version", 0);
                if (version != kAnalysisVersion)
                    throw Error(ErrorKind::unsupported_version, "unsupported_version",
                                "unsupported analysis version " + std::to_string(version));
                sawHeader = true;
                continue;
            }
            std::string type = j.at("type").get<std::string>();
            if (type == "catalog") {
                for (const auto& a : j.at("actions"))
                    catalog.push_back({a.at("action_id").get<std::string>(), a.at("labels").get<LabelMap>()});
            } else if (type == "session") {
                if (pending != 0) throw fail("session header before previous session's actions");
                Session s;
                s.session_id = j.at("session_id").get<std::string>();
                if (!j.at("user_id").is_null()) s.user_id = j.at("user_id").get<std::string>();
                s.start_ts = j.at("start_ts").get<TimestampMs>();
                s.end_ts = j.at("end_ts").get<TimestampMs>();
                s.duration_ms = j.at("duration_ms").get<std::int64_t>();
                s.action_count = j.at("action_count").get<std::uint32_t>();
                pending = s.action_count;
                s.actions.reserve(pending);
                sessions.push_back(std::move(s));
            } else if (type == "action") {
                if (pending == 0) throw fail("action record outside a session");
                auto a = actionFromJson(j);
                if (a.session_id != sessions.back().session_id) throw fail("action belongs to another session");
                sessions.back().actions.push_back(std::move(a));
                --pending;
            } else {
                throw fail("unknown record type '" + type + "'");
            }
        }
    } catch (const json::exception& e) {
        throw fail(e.what());
    }
    if (!sawHeader) throw Error(ErrorKind::parse, "bad_analysis_file", "empty analysis file");
    if (pending != 0) throw fail("truncated session");
    return SessionStore(std::move(catalog), std::move(sessions));
}

SessionStore loadAnalysis(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "unreadable_file", "cannot read " + path.string());
    return readAnalysis(in);
}

} // namespace whose
