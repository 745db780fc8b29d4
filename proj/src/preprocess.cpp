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

#include <algorithm>
#include <iterator>

#include "whose/error.hpp"
#include "whose/mapping.hpp"

#include "parallel.hpp"

namespace whose {

namespace {

constexpr std::size_t kChunkRows = 4096;

void transformRow(const LogRow& row, const MappingTable& mapping, const ExtractionTable& extraction,
                  std::vector<ActionInstance>& out) {
    auto actions = matchRow(row, mapping);
    for (std::size_t k = 0; k < actions.size(); ++k) {
        ActionInstance a;
        a.session_id = row.session_id;
        a.source_row_id = row.row_id;
        a.timestamp = row.timestamp;
        a.intra_row_index = static_cast<std::uint32_t>(k);
        a.entities = extraction.extract(row, actions[k]);
        a.action_id = std::move(actions[k]);
        a.url = row.url;
        a.user_id = row.user_id;
        out.push_back(std::move(a));
    }
}

} // namespace

std::vector<ActionInstance> preprocess(std::span<const LogRow> rows, const MappingTable& mapping,
                                       const ExtractionTable& extraction, unsigned workerCount) {
    if (workerCount == 0) throw Error(ErrorKind::invalid_argument, "bad_worker_count", "worker count must be >= 1");

    // Workers claim fixed chunks, write them into per-chunk slots and sort
    // each slot by the canonical key. Sorted slots are then merged pairwise
    // in a fixed tree. Both the chunk boundaries and the merge tree depend
    // only on the input, so scheduling cannot influence the result.
    std::size_t chunks = (rows.size() + kChunkRows - 1) / kChunkRows;
    std::vector<std::vector<ActionInstance>> runs(chunks);
    detail::parallelFor(chunks, workerCount, [&](std::size_t c) {
        std::size_t begin = c * kChunkRows;
        std::size_t end = std::min(rows.size(), begin + kChunkRows);
        auto& run = runs[c];
        run.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) transformRow(rows[i], mapping, extraction, run);
        std::sort(run.begin(), run.end(), canonicalLess);
    });

    while (runs.size() > 1) {
        std::vector<std::vector<ActionInstance>> merged((runs.size() + 1) / 2);
        detail::parallelFor(merged.size(), workerCount, [&](std::size_t p) {
            auto& left = runs[2 * p];
            if (2 * p + 1 == runs.size()) {
                merged[p] = std::move(left);
                return;
            }
            auto& right = runs[2 * p + 1];
            auto& out = merged[p];
            out.reserve(left.size() + right.size());
            // Ties cannot occur across runs (row ids differ), so merge order
            // is fully determined by the key.
            std::merge(std::make_move_iterator(left.begin()), std::make_move_iterator(left.end()),
                       std::make_move_iterator(right.begin()), std::make_move_iterator(right.end()),
                       std::back_inserter(out), canonicalLess);
            std::vector<ActionInstance>().swap(left);
            std::vector<ActionInstance>().swap(right);
        });
        runs = std::move(merged);
    }
    return runs.empty() ? std::vector<ActionInstance>{} : std::move(runs.front());
}

} // namespace whose
