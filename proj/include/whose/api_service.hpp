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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "whose/filter.hpp"
#include "whose/flow.hpp"
#include "whose/session.hpp"

namespace whose {

inline constexpr std::string_view kNowHeader = "X-Whose-Now";
inline constexpr std::size_t kMaxPageLimit = 500;
inline constexpr std::size_t kDefaultPageLimit = 50;

struct ApiResponse {
    int status = 200;
    std::string body;
};

// Transport-independent request handling for the HTTP endpoints. Responses
// are pure functions of the store, the request and the effective `now`.
//
// Errors are `{"error_code":..., "message":..., "field":...}` with 400 for
// malformed requests and 404 for unknown sessions.
class ApiService {
public:
    using Clock = std::function<TimestampMs()>;

    explicit ApiService(std::shared_ptr<const SessionStore> store, Clock clock = {});

    ApiResponse actions() const;                                                     // GET  /api/actions
    ApiResponse sessions(std::string_view body, std::optional<TimestampMs> now) const; // POST /api/sessions
    ApiResponse flow(std::string_view body, std::optional<TimestampMs> now) const;     // POST /api/flow
    ApiResponse session(std::string_view id) const;                                  // GET  /api/sessions/{id}

    const SessionStore& store() const noexcept { return *mStore; }

private:
    TimestampMs now(std::optional<TimestampMs> override) const;

    std::shared_ptr<const SessionStore> mStore;
    Clock mClock;
};

TimestampMs systemNow();

// Body of POST /api/flow for an already decoded request.
std::string flowBody(const SessionStore& store, const FilterSpec& filter, const TimeRange& range,
                     std::uint32_t maxSteps);

std::string errorBody(std::string_view code, std::string_view message,
                      const std::optional<std::string>& field = std::nullopt);

} // namespace whose
