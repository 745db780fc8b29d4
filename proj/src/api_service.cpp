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

#include "whose/api_service.hpp"

#include <chrono>

#include "whose/error.hpp"

namespace whose {

using nlohmann::json;

namespace {

ApiResponse errorResponse(int status, std::string_view code, std::string_view message,
                          const std::optional<std::string>& field = std::nullopt) {
    return {status, errorBody(code, message, field)};
}

ApiResponse fromError(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::not_found: return errorResponse(404, e.code(), e.what(), e.field());
    case ErrorKind::internal: return errorResponse(500, e.code(), e.what(), e.field());
    default: return errorResponse(400, e.code(), e.what(), e.field());
    }
}

json parseBody(std::string_view body) {
    if (body.empty()) return json::object();
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::invalid_argument, "malformed_json", "request body is not valid JSON");
    if (!j.is_object()) throw Error(ErrorKind::invalid_argument, "malformed_request", "request body must be an object");
    return j;
}

void onlyKeys(const json& j, std::initializer_list<std::string_view> keys) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto k : keys) known = known || key == k;
        if (!known) throw Error(ErrorKind::invalid_argument, "invalid_field", key + ": unknown field", key);
    }
}

std::uint64_t unsignedField(const json& v, const std::string& field) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw Error(ErrorKind::invalid_argument, "invalid_field", field + ": expected a non-negative integer", field);
    return v.get<std::uint64_t>();
}

struct Decoded {
    FilterSpec filter;
    TimeRange range;
};

Decoded decodeCommon(const json& j) {
    Decoded d;
    d.filter = filterFromJson(j.contains("filter") ? j.at("filter") : json());
    d.range = timeRangeFromJson(j.contains("time_range") ? j.at("time_range") : json());
    return d;
}

} // namespace

TimestampMs systemNow() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string errorBody(std::string_view code, std::string_view message, const std::optional<std::string>& field) {
    json j{{"error_code", code}, {"message", message}};
    if (field) j["field"] = *field;
    return j.dump();
}

std::string flowBody(const SessionStore& store, const FilterSpec& filter, const TimeRange& range,
                     std::uint32_t maxSteps) {
    auto matches = applyFilter(store.sessions(), filter, resolveTimeRange(range));
    return toJson(aggregate(std::span<const Session* const>(matches), maxSteps)).dump();
}

ApiService::ApiService(std::shared_ptr<const SessionStore> store, Clock clock)
    : mStore(std::move(store)), mClock(clock ? std::move(clock) : Clock(systemNow)) {}

TimestampMs ApiService::now(std::optional<TimestampMs> override) const { return override ? *override : mClock(); }

ApiResponse ApiService::actions() const {
    json out = json::array();
    for (const auto& a : mStore->catalog()) out.push_back(json{{"action_id", a.action_id}, {"labels", a.labels}});
    return {200, out.dump()};
}

ApiResponse ApiService::sessions(std::string_view body, std::optional<TimestampMs> nowOverride) const {
    try {
        json j = parseBody(body);
        onlyKeys(j, {"time_range", "filter", "page"});
        Decoded d = decodeCommon(j);
        std::size_t offset = 0;
        std::size_t limit = kDefaultPageLimit;
        if (j.contains("page")) {
            const json& p = j.at("page");
            if (!p.is_object()) throw Error(ErrorKind::invalid_argument, "invalid_field", "page: expected an object", "page");
            onlyKeys(p, {"offset", "limit"});
            if (p.contains("offset")) offset = unsignedField(p.at("offset"), "page.offset");
            if (p.contains("limit")) limit = unsignedField(p.at("limit"), "page.limit");
            if (limit < 1 || limit > kMaxPageLimit)
                throw Error(ErrorKind::invalid_argument, "invalid_field",
                            "page.limit: must be between 1 and " + std::to_string(kMaxPageLimit), "page.limit");
        }
        if (nowOverride || !d.range.now) d.range.now = now(nowOverride);

        auto matches = applyFilter(mStore->sessions(), d.filter, resolveTimeRange(d.range));
        json page = json::array();
        for (std::size_t i = offset; i < matches.size() && page.size() < limit; ++i)
            page.push_back(toJson(summarize(*matches[i])));
        json out{{"total", matches.size()}, {"offset", offset}, {"limit", limit}, {"sessions", std::move(page)}};
        return {200, out.dump()};
    } catch (const Error& e) {
        return fromError(e);
    }
}

ApiResponse ApiService::flow(std::string_view body, std::optional<TimestampMs> nowOverride) const {
    try {
        json j = parseBody(body);
        onlyKeys(j, {"time_range", "filter", "max_steps"});
        Decoded d = decodeCommon(j);
        std::uint32_t maxSteps = kDefaultMaxSteps;
        if (j.contains("max_steps") && !j.at("max_steps").is_null()) {
            auto n = unsignedField(j.at("max_steps"), "max_steps");
            if (n < 1 || n > 10'000)
                throw Error(ErrorKind::invalid_argument, "invalid_field", "max_steps: must be between 1 and 10000",
                            "max_steps");
            maxSteps = static_cast<std::uint32_t>(n);
        }
        if (nowOverride || !d.range.now) d.range.now = now(nowOverride);
        return {200, flowBody(*mStore, d.filter, d.range, maxSteps)};
    } catch (const Error& e) {
        return fromError(e);
    }
}

ApiResponse ApiService::session(std::string_view id) const {
    const Session* s = mStore->find(id);
    if (!s) return errorResponse(404, "not_found", "unknown session '" + std::string(id) + "'");
    return {200, toJson(*s, mStore.get()).dump()};
}

} // namespace whose
