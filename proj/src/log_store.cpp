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

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>

#include <json.hpp>

#include "whose/error.hpp"
#include "whose/ingest.hpp"

namespace whose {

namespace {

constexpr std::string_view kRowsFile = "rows.jsonl";
constexpr std::string_view kLockFile = ".lock";
constexpr std::string_view kRowsFormat = "whose-rows";
constexpr int kRowsVersion = 1;

class DirLock {
public:
    explicit DirLock(const std::filesystem::path& dir) {
        auto path = dir / kLockFile;
        mFd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (mFd < 0) throw Error(ErrorKind::io, "lock_failed", "cannot open " + path.string());
        if (::flock(mFd, LOCK_EX) != 0) {
            ::close(mFd);
            throw Error(ErrorKind::io, "lock_failed", "cannot lock " + path.string());
        }
    }
    ~DirLock() {
        ::flock(mFd, LOCK_UN);
        ::close(mFd);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    int mFd = -1;
};

nlohmann::json rowToJson(const LogRow& r) {
    nlohmann::json j{{"row_id", r.row_id},
                     {"session_id", r.session_id},
                     {"timestamp", r.timestamp},
                     {"resultlist_ids", r.resultlist_ids},
                     {"url", r.url},
                     {"referrer_url", r.referrer_url}};
    if (r.user_id) j["user_id"] = *r.user_id;
    return j;
}

LogRow rowFromJson(const nlohmann::json& j) {
    LogRow r;
    r.row_id = j.at("row_id").get<RowId>();
    r.session_id = j.at("session_id").get<std::string>();
    if (auto it = j.find("user_id"); it != j.end() && !it->is_null()) r.user_id = it->get<std::string>();
    r.timestamp = j.at("timestamp").get<TimestampMs>();
    r.resultlist_ids = j.at("resultlist_ids").get<std::vector<std::string>>();
    r.url = j.at("url").get<std::string>();
    r.referrer_url = j.at("referrer_url").get<std::string>();
    return r;
}

} // namespace

LogStore LogStore::open(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw Error(ErrorKind::io, "bad_store", "cannot create store directory " + dir.string());
    LogStore store;
    store.mDir = dir;
    store.reload();
    return store;
}

LogStore LogStore::inMemory() { return LogStore(); }

void LogStore::reload() {
    auto path = *mDir / kRowsFile;
    mRows.clear();
    mNextRowId = 1;
    mKnownSize = 0;
    if (!std::filesystem::exists(path)) return;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "unreadable_file", "cannot read " + path.string());
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            if (lineNo == 1) {
                if (j.value("format", "") != kRowsFormat)
                    throw Error(ErrorKind::parse, "bad_format", path.string() + " is not a row store");
                if (j.value("version", 0) != kRowsVersion)
                    throw Error(ErrorKind::unsupported_version, "unsupported_version",
                                path.string() + ": unsupported row store version");
                continue;
            }
            mRows.push_back(rowFromJson(j));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, "corrupt_store",
                        path.string() + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
    if (!mRows.empty()) mNextRowId = mRows.back().row_id + 1;
    mKnownSize = std::filesystem::file_size(path);
}

void LogStore::append(std::vector<LogRow> rows) {
    if (!mDir) {
        for (auto& r : rows) r.row_id = mNextRowId++;
        mRows.insert(mRows.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
        return;
    }

    DirLock lock(*mDir);
    auto path = *mDir / kRowsFile;
    std::error_code ec;
    auto size = std::filesystem::exists(path) ? std::filesystem::file_size(path, ec) : 0;
    if (size != mKnownSize) reload(); // another writer appended since we loaded

    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorKind::io, "unwritable_store", "cannot write " + path.string());
    if (size == 0) out << nlohmann::json{{"format", kRowsFormat}, {"version", kRowsVersion}}.dump() << '\n';
    for (auto& r : rows) {
        r.row_id = mNextRowId++;
        out << rowToJson(r).dump() << '\n';
    }
    out.flush();
    if (!out) throw Error(ErrorKind::io, "unwritable_store", "write failed for " + path.string());
    mRows.insert(mRows.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    mKnownSize = std::filesystem::file_size(path);
}

} // namespace whose
