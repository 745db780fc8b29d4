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

#include "whose/flow.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "whose/error.hpp"

namespace whose {

using nlohmann::json;

FlowAccumulator::FlowAccumulator(std::uint32_t maxSteps) : mMaxSteps(maxSteps) {
    if (maxSteps == 0) throw Error(ErrorKind::invalid_argument, "bad_max_steps", "max_steps must be >= 1", "max_steps");
}

void FlowAccumulator::add(const Session& s) {
    ++mSessions;
    auto len = static_cast<std::uint32_t>(std::min<std::size_t>(s.actions.size(), mMaxSteps));
    for (std::uint32_t step = 1; step <= len; ++step) {
        const auto& action = s.actions[step - 1].action_id;
        ++mNodes[{step, action}];
        if (step < len) ++mEdges[{step, action, s.actions[step].action_id}];
    }
    // Sessions that run past the horizon have not ended inside it.
    if (!s.actions.empty() && s.actions.size() <= mMaxSteps) ++mEndings[len];
}

void FlowAccumulator::merge(const FlowAccumulator& other) {
    if (other.mMaxSteps != mMaxSteps)
        throw Error(ErrorKind::invalid_argument, "bad_max_steps", "cannot merge flows with different horizons");
    for (const auto& [k, v] : other.mNodes) mNodes[k] += v;
    for (const auto& [k, v] : other.mEdges) mEdges[k] += v;
    for (const auto& [k, v] : other.mEndings) mEndings[k] += v;
    mSessions += other.mSessions;
}

FlowGraph FlowAccumulator::finish() const {
    FlowGraph g;
    g.max_steps = mMaxSteps;
    g.session_total = mSessions;
    g.endings = mEndings;

    std::map<std::string, std::uint64_t> weight;
    std::uint32_t horizon = std::min(kOrderingHorizon, mMaxSteps);
    for (const auto& [key, count] : mNodes) {
        const auto& [step, action] = key;
        g.nodes.push_back({step, action, count});
        auto& w = weight[action];
        if (step <= horizon) w += count;
    }
    for (const auto& [key, count] : mEdges) {
        const auto& [step, from, to] = key;
        g.edges.push_back({step, from, to, count});
    }
    // std::map iterates by ascending action_id, so a stable sort on the
    // weight alone leaves ties in id order.
    std::vector<std::pair<std::string, std::uint64_t>> ranked(weight.begin(), weight.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [action, w] : ranked) g.action_order.push_back(action);
    return g;
}

FlowGraph aggregate(std::span<const Session> sessions, std::uint32_t maxSteps) {
    FlowAccumulator acc(maxSteps);
    for (const auto& s : sessions) acc.add(s);
    return acc.finish();
}

FlowGraph aggregate(std::span<const Session* const> sessions, std::uint32_t maxSteps) {
    FlowAccumulator acc(maxSteps);
    for (const Session* s : sessions) acc.add(*s);
    return acc.finish();
}

FlowSubgraph highlightPaths(const FlowGraph& flow, std::string_view actionId) {
    using NodeKey = std::pair<std::uint32_t, std::string>;
    std::multimap<NodeKey, const FlowEdge*> outgoing;
    std::multimap<NodeKey, const FlowEdge*> incoming;
    for (const auto& e : flow.edges) {
        outgoing.emplace(NodeKey{e.step, e.from_action_id}, &e);
        incoming.emplace(NodeKey{e.step + 1, e.to_action_id}, &e);
    }

    std::set<NodeKey> nodes;
    std::set<const FlowEdge*> edges;
    std::deque<NodeKey> queue;
    for (const auto& n : flow.nodes) {
        if (n.action_id != actionId) continue;
        NodeKey key{n.step, n.action_id};
        if (nodes.insert(key).second) queue.push_back(key);
        auto [lo, hi] = incoming.equal_range(key);
        for (auto it = lo; it != hi; ++it) {
            edges.insert(it->second);
            nodes.insert({it->second->step, it->second->from_action_id});
        }
    }
    while (!queue.empty()) {
        NodeKey key = queue.front();
        queue.pop_front();
        auto [lo, hi] = outgoing.equal_range(key);
        for (auto it = lo; it != hi; ++it) {
            edges.insert(it->second);
            NodeKey next{it->second->step + 1, it->second->to_action_id};
            if (nodes.insert(next).second) queue.push_back(next);
        }
    }

    FlowSubgraph sub;
    for (const auto& n : flow.nodes)
        if (nodes.contains({n.step, n.action_id})) sub.nodes.push_back(n);
    for (const auto& e : flow.edges)
        if (edges.contains(&e)) sub.edges.push_back(e);
    return sub;
}

// ---- JSON ------------------------------------------------------------------

namespace {

json nodesJson(const std::vector<FlowNode>& nodes) {
    json a = json::array();
    for (const auto& n : nodes) a.push_back(json{{"step", n.step}, {"action_id", n.action_id}, {"count", n.count}});
    return a;
}

json edgesJson(const std::vector<FlowEdge>& edges) {
    json a = json::array();
    for (const auto& e : edges)
        a.push_back(json{{"step", e.step},
                         {"from_action_id", e.from_action_id},
                         {"to_action_id", e.to_action_id},
                         {"count", e.count}});
    return a;
}

} // namespace

json toJson(const FlowGraph& flow) {
    json endings = json::array();
    for (const auto& [step, count] : flow.endings) endings.push_back(json{{"step", step}, {"count", count}});
    return json{{"max_steps", flow.max_steps},
                {"session_total", flow.session_total},
                {"action_order", flow.action_order},
                {"nodes", nodesJson(flow.nodes)},
                {"edges", edgesJson(flow.edges)},
                {"endings", std::move(endings)}};
}

json toJson(const FlowSubgraph& sub) { return json{{"nodes", nodesJson(sub.nodes)}, {"edges", edgesJson(sub.edges)}}; }

FlowGraph flowFromJson(const json& j) {
    FlowGraph g;
    g.max_steps = j.at("max_steps").get<std::uint32_t>();
    g.session_total = j.at("session_total").get<std::uint64_t>();
    g.action_order = j.at("action_order").get<std::vector<std::string>>();
    for (const auto& n : j.at("nodes"))
        g.nodes.push_back({n.at("step").get<std::uint32_t>(), n.at("action_id").get<std::string>(),
                           n.at("count").get<std::uint64_t>()});
    for (const auto& e : j.at("edges"))
        g.edges.push_back({e.at("step").get<std::uint32_t>(), e.at("from_action_id").get<std::string>(),
                           e.at("to_action_id").get<std::string>(), e.at("count").get<std::uint64_t>()});
    for (const auto& e : j.at("endings")) g.endings[e.at("step").get<std::uint32_t>()] = e.at("count").get<std::uint64_t>();
    return g;
}

} // namespace whose
