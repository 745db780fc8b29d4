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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "whose/session.hpp"

namespace whose {

inline constexpr std::uint32_t kDefaultMaxSteps = 8;
// Actions are ranked by their occurrences within this many leading steps.
inline constexpr std::uint32_t kOrderingHorizon = 8;

struct FlowNode {
    std::uint32_t step = 0;
    std::string action_id;
    std::uint64_t count = 0;
    bool operator==(const FlowNode&) const = default;
};

struct FlowEdge {
    std::uint32_t step = 0; // step of the source node
    std::string from_action_id;
    std::string to_action_id;
    std::uint64_t count = 0;
    bool operator==(const FlowEdge&) const = default;
};

// Per-step action counts and step-to-step transitions behind the Sankey
// overview. Nodes are sorted by (step, action_id), edges by (step, from, to).
struct FlowGraph {
    std::uint32_t max_steps = kDefaultMaxSteps;
    std::vector<FlowNode> nodes;
    std::vector<FlowEdge> edges;
    std::map<std::uint32_t, std::uint64_t> endings;
    std::vector<std::string> action_order;
    std::uint64_t session_total = 0;

    bool operator==(const FlowGraph&) const = default;
};

// Counts that merge by addition, so sessions can be partitioned freely.
class FlowAccumulator {
public:
    explicit FlowAccumulator(std::uint32_t maxSteps);

    void add(const Session& s);
    void merge(const FlowAccumulator& other);
    FlowGraph finish() const;

private:
    std::uint32_t mMaxSteps;
    std::map<std::pair<std::uint32_t, std::string>, std::uint64_t> mNodes;
    std::map<std::tuple<std::uint32_t, std::string, std::string>, std::uint64_t> mEdges;
    std::map<std::uint32_t, std::uint64_t> mEndings;
    std::uint64_t mSessions = 0;
};

// Throws Error(invalid_argument) when maxSteps == 0.
FlowGraph aggregate(std::span<const Session> sessions, std::uint32_t maxSteps = kDefaultMaxSteps);
FlowGraph aggregate(std::span<const Session* const> sessions, std::uint32_t maxSteps = kDefaultMaxSteps);

struct FlowSubgraph {
    std::vector<FlowNode> nodes;
    std::vector<FlowEdge> edges;
    bool operator==(const FlowSubgraph&) const = default;
};

// Nodes and edges reachable forward from every node of `actionId`, plus the
// edges (and their source nodes) leading into those nodes. Counts are copied.
FlowSubgraph highlightPaths(const FlowGraph& flow, std::string_view actionId);

nlohmann::json toJson(const FlowGraph& flow);
nlohmann::json toJson(const FlowSubgraph& sub);
FlowGraph flowFromJson(const nlohmann::json& j);

} // namespace whose
