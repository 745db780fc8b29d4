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
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/regex.hpp>

#include "whose/action.hpp"
#include "whose/log_row.hpp"

namespace whose {

// One row of the mapping table. A rule fires when url_pattern is found in the
// row's url and, if given, referrer_pattern is found in its referrer.
struct MappingRule {
    std::uint32_t rule_order = 0;
    std::string action_id;
    LabelMap labels;
    std::string url_pattern;
    std::optional<std::string> referrer_pattern;
};

enum class ExtractionKind { text, field };

struct ExtractionRule {
    std::string action_id; // or "*"
    std::string entity_name;
    ExtractionKind kind = ExtractionKind::text;
    std::string source;
    std::string pattern; // text only
};

// Compiled, immutable mapping table; safe to share across threads.
//
// Patterns use Perl-compatible syntax (Boost.Regex) and are searched anywhere
// in the subject unless anchored.
class MappingTable {
public:
    MappingTable() = default;

    // Validates and compiles. Throws Error(parse) citing the 1-based data row.
    static MappingTable fromRules(std::vector<MappingRule> rules);
    static MappingTable parse(std::istream& csv);
    static MappingTable load(const std::filesystem::path& path);

    // File order.
    std::span<const MappingRule> rules() const noexcept { return mRules; }
    std::size_t size() const noexcept { return mRules.size(); }

    // Indices into rules() of every rule that fires, ascending by rule_order.
    std::vector<std::size_t> matchingRules(const LogRow& row) const;

    // Distinct actions by ascending rule_order of their first rule, then
    // `__unmatched__`.
    ActionCatalog catalog() const;

private:
    struct Compiled {
        boost::regex url;
        std::optional<boost::regex> referrer;
    };

    std::vector<MappingRule> mRules;
    std::vector<Compiled> mCompiled;
    std::vector<std::size_t> mByOrder;
};

class ExtractionTable {
public:
    ExtractionTable() = default;

    static ExtractionTable fromRules(std::vector<ExtractionRule> rules);
    static ExtractionTable parse(std::istream& csv);
    static ExtractionTable load(const std::filesystem::path& path);

    std::span<const ExtractionRule> rules() const noexcept { return mRules; }
    std::size_t size() const noexcept { return mRules.size(); }

    EntityMap extract(const LogRow& row, std::string_view actionId) const;

private:
    std::vector<ExtractionRule> mRules;
    std::vector<std::optional<boost::regex>> mCompiled;
};

// Action ids of all firing rules in rule_order, or just `__unmatched__`.
std::vector<std::string> matchRow(const LogRow& row, const MappingTable& rules);

// Text rules: every non-overlapping match's group, form-decoded. Field rules:
// the field's value(s). Only `*` field rules apply to `__unmatched__`.
EntityMap extractEntities(const LogRow& row, std::string_view actionId, const ExtractionTable& rules);

// Decodes %XX escapes and '+' as space. Malformed escapes are kept verbatim.
std::string formDecode(std::string_view text);

// Transforms every row into its actions (step_index and duration_ms unset),
// in canonical order. The result is identical for any workerCount >= 1.
std::vector<ActionInstance> preprocess(std::span<const LogRow> rows, const MappingTable& mapping,
                                       const ExtractionTable& extraction, unsigned workerCount);

struct RuleCoverage {
    std::uint64_t total_rows = 0;
    std::uint64_t unmatched_rows = 0;
    // Parallel to MappingTable::rules().
    std::vector<std::uint64_t> rule_matches;

    double coverage() const {
        return total_rows == 0 ? 0.0 : 1.0 - static_cast<double>(unmatched_rows) / static_cast<double>(total_rows);
    }
};

RuleCoverage measureCoverage(std::span<const LogRow> rows, const MappingTable& mapping);

} // namespace whose
