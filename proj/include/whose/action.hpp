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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "whose/log_row.hpp"
#include "whose/time_util.hpp"

namespace whose {

// Emitted for rows no mapping rule recognizes.
inline constexpr std::string_view kUnmatchedAction = "__unmatched__";

using EntityMap = std::map<std::string, std::vector<std::string>>;
using LabelMap = std::map<std::string, std::string>;

struct ActionInstance {
    std::string session_id;
    RowId source_row_id = 0;
    std::string action_id;
    TimestampMs timestamp = 0;
    std::uint32_t intra_row_index = 0;
    // 1-based; 0 until the session store assigns it.
    std::uint32_t step_index = 0;
    std::optional<std::int64_t> duration_ms;
    EntityMap entities;
    // Carried over from the source row for text search and session ownership.
    std::string url;
    std::optional<std::string> user_id;

    bool operator==(const ActionInstance&) const = default;
};

// Canonical analysis-table order.
inline bool canonicalLess(const ActionInstance& a, const ActionInstance& b) {
    if (a.session_id != b.session_id) return a.session_id < b.session_id;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.source_row_id != b.source_row_id) return a.source_row_id < b.source_row_id;
    return a.intra_row_index < b.intra_row_index;
}

struct ActionInfo {
    std::string action_id;
    LabelMap labels;

    bool operator==(const ActionInfo&) const = default;
};

using ActionCatalog = std::vector<ActionInfo>;

} // namespace whose
