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
#include <vector>

#include "whose/time_util.hpp"

namespace whose {

using RowId = std::uint64_t;

// One raw logged interaction, normalized.
struct LogRow {
    RowId row_id = 0;
    std::string session_id;
    std::optional<std::string> user_id;
    TimestampMs timestamp = 0;
    std::vector<std::string> resultlist_ids;
    std::string url;
    std::string referrer_url;

    bool operator==(const LogRow&) const = default;
};

} // namespace whose
