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

#include "whose/mapping.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "whose/csv.hpp"
#include "whose/error.hpp"
#include "whose/time_util.hpp"
#include "utf8.hpp"

namespace whose {

namespace {

const std::vector<std::string> kMappingHeader{"rule_order", "action_id", "label_en",
                                              "label_de",   "referrer_param", "url_param"};
const std::vector<std::string> kExtractionHeader{"action_id", "entity_name", "kind", "source", "pattern"};
const std::set<std::string, std::less<>> kFieldSources{"session_id",     "user_id", "timestamp",
                                                       "resultlist_ids", "url",     "referrer_url"};

[[noreturn]] void loadError(std::string_view code, std::size_t row, const std::string& detail = {}) {
    std::string msg = std::string(code) + " @ row " + std::to_string(row);
    if (!detail.empty()) msg += ": " + detail;
    throw Error(ErrorKind::parse, std::string(code), msg);
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

boost::regex compile(const std::string& pattern, std::size_t row) {
    try {
        return boost::regex(pattern, boost::regex::perl | boost::regex::no_mod_m);
    } catch (const boost::regex_error& e) {
        loadError("bad_pattern", row, e.what());
    }
}

// Reads the header and data rows; the header must match `expected` exactly.
std::vector<CsvRecord> readTable(std::istream& in, const std::vector<std::string>& expected) {
    CsvReader reader(in);
    auto header = reader.next();
    if (!header) throw Error(ErrorKind::parse, "bad_header", "bad_header: missing header row");
    if (!header->fields.empty() && header->fields[0].rfind("\xEF\xBB\xBF", 0) == 0) header->fields[0].erase(0, 3);
    for (auto& f : header->fields) f = trim(f);
    if (header->fields != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw Error(ErrorKind::parse, "bad_header", "bad_header: header must be: " + want);
    }
    std::vector<CsvRecord> rows;
    while (auto rec = reader.next()) {
        if (rec->fields.size() == 1 && trim(rec->fields[0]).empty()) continue;
        rows.push_back(std::move(*rec));
    }
    return rows;
}

std::ifstream openTable(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "unreadable_file", "cannot read " + path.string());
    return in;
}

bool searchSafe(const std::string& subject, const boost::regex& re) {
    try {
        return boost::regex_search(subject, re);
    } catch (const std::runtime_error&) {
        // Boost aborts pathological backtracking; treated as no match.
        return false;
    }
}

int hexValue(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

const std::string* textSource(const LogRow& row, const std::string& source) {
    if (source == "url") return &row.url;
    if (source == "referrer_url") return &row.referrer_url;
    return nullptr;
}

void appendField(const LogRow& row, const std::string& source, std::vector<std::string>& out) {
    if (source == "resultlist_ids") {
        out.insert(out.end(), row.resultlist_ids.begin(), row.resultlist_ids.end());
    } else if (source == "session_id") {
        out.push_back(row.session_id);
    } else if (source == "user_id") {
        if (row.user_id) out.push_back(*row.user_id);
    } else if (source == "timestamp") {
        out.push_back(formatIso8601(row.timestamp));
    } else if (source == "url") {
        if (!row.url.empty()) out.push_back(row.url);
    } else if (source == "referrer_url") {
        if (!row.referrer_url.empty()) out.push_back(row.referrer_url);
    }
}

} // namespace

// ---- mapping table ---------------------------------------------------------

MappingTable MappingTable::fromRules(std::vector<MappingRule> rules) {
    MappingTable t;
    std::unordered_set<std::uint32_t> seenOrders;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& r = rules[i];
        std::size_t row = i + 1;
        if (r.action_id.empty()) loadError("empty_action_id", row);
        if (r.action_id == kUnmatchedAction) loadError("reserved_action_id", row, r.action_id);
        if (r.labels.empty()) loadError("missing_label", row);
        if (r.url_pattern.empty()) loadError("missing_url_pattern", row);
        if (!seenOrders.insert(r.rule_order).second) loadError("duplicate_rule_order", row, std::to_string(r.rule_order));
        Compiled c{compile(r.url_pattern, row), std::nullopt};
        if (r.referrer_pattern) c.referrer = compile(*r.referrer_pattern, row);
        t.mCompiled.push_back(std::move(c));
    }
    t.mRules = std::move(rules);
    t.mByOrder.resize(t.mRules.size());
    for (std::size_t i = 0; i < t.mByOrder.size(); ++i) t.mByOrder[i] = i;
    std::sort(t.mByOrder.begin(), t.mByOrder.end(),
              [&](std::size_t a, std::size_t b) { return t.mRules[a].rule_order < t.mRules[b].rule_order; });
    return t;
}

MappingTable MappingTable::parse(std::istream& csv) {
    auto records = readTable(csv, kMappingHeader);
    std::vector<MappingRule> rules;
    rules.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& f = records[i].fields;
        std::size_t row = i + 1;
        if (f.size() != kMappingHeader.size()) loadError("wrong_arity", row);
        MappingRule r;
        std::string order = trim(f[0]);
        if (order.empty()) {
            r.rule_order = static_cast<std::uint32_t>(i);
        } else {
            auto [ptr, ec] = std::from_chars(order.data(), order.data() + order.size(), r.rule_order);
            if (ec != std::errc{} || ptr != order.data() + order.size()) loadError("bad_rule_order", row, order);
        }
        r.action_id = trim(f[1]);
        if (auto en = trim(f[2]); !en.empty()) r.labels["en"] = en;
        if (auto de = trim(f[3]); !de.empty()) r.labels["de"] = de;
        if (!f[4].empty()) r.referrer_pattern = f[4];
        r.url_pattern = f[5];
        rules.push_back(std::move(r));
    }
    return fromRules(std::move(rules));
}

MappingTable MappingTable::load(const std::filesystem::path& path) {
    auto in = openTable(path);
    return parse(in);
}

std::vector<std::size_t> MappingTable::matchingRules(const LogRow& row) const {
    std::vector<std::size_t> out;
    for (std::size_t idx : mByOrder) {
        const auto& c = mCompiled[idx];
        if (!searchSafe(row.url, c.url)) continue;
        if (c.referrer && !searchSafe(row.referrer_url, *c.referrer)) continue;
        out.push_back(idx);
    }
    return out;
}

ActionCatalog MappingTable::catalog() const {
    ActionCatalog cat;
    std::unordered_set<std::string> seen;
    for (std::size_t idx : mByOrder) {
        const auto& r = mRules[idx];
        if (seen.insert(r.action_id).second) cat.push_back({r.action_id, r.labels});
    }
    cat.push_back({std::string(kUnmatchedAction), {{"en", "Unmatched"}}});
    return cat;
}

// ---- extraction table ------------------------------------------------------

ExtractionTable ExtractionTable::fromRules(std::vector<ExtractionRule> rules) {
    ExtractionTable t;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& r = rules[i];
        std::size_t row = i + 1;
        if (r.action_id.empty()) loadError("empty_action_id", row);
        if (r.entity_name.empty()) loadError("empty_entity_name", row);
        if (r.kind == ExtractionKind::text) {
            if (!textSource(LogRow{}, r.source)) loadError("bad_source", row, r.source);
            if (r.pattern.empty()) loadError("pattern_needs_one_group", row);
            auto re = compile(r.pattern, row);
            if (re.mark_count() != 1) loadError("pattern_needs_one_group", row, r.pattern);
            t.mCompiled.emplace_back(std::move(re));
        } else {
            if (!kFieldSources.contains(r.source)) loadError("bad_source", row, r.source);
            if (!r.pattern.empty()) loadError("unexpected_pattern", row);
            t.mCompiled.emplace_back(std::nullopt);
        }
    }
    t.mRules = std::move(rules);
    return t;
}

ExtractionTable ExtractionTable::parse(std::istream& csv) {
    auto records = readTable(csv, kExtractionHeader);
    std::vector<ExtractionRule> rules;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& f = records[i].fields;
        std::size_t row = i + 1;
        if (f.size() != kExtractionHeader.size()) loadError("wrong_arity", row);
        ExtractionRule r;
        r.action_id = trim(f[0]);
        r.entity_name = trim(f[1]);
        std::string kind = trim(f[2]);
        if (kind == "text") r.kind = ExtractionKind::text;
        else if (kind == "field") r.kind = ExtractionKind::field;
        else loadError("bad_kind", row, kind);
        r.source = trim(f[3]);
        r.pattern = f[4];
        rules.push_back(std::move(r));
    }
    return fromRules(std::move(rules));
}

ExtractionTable ExtractionTable::load(const std::filesystem::path& path) {
    auto in = openTable(path);
    return parse(in);
}

EntityMap ExtractionTable::extract(const LogRow& row, std::string_view actionId) const {
    EntityMap out;
    bool unmatched = actionId == kUnmatchedAction;
    for (std::size_t i = 0; i < mRules.size(); ++i) {
        const auto& r = mRules[i];
        bool wildcard = r.action_id == "*";
        if (!wildcard && r.action_id != actionId) continue;
        if (unmatched && !(wildcard && r.kind == ExtractionKind::field)) continue;

        std::vector<std::string> values;
        if (r.kind == ExtractionKind::text) {
            const std::string& subject = *textSource(row, r.source);
            try {
                for (boost::sregex_iterator it(subject.begin(), subject.end(), *mCompiled[i]), end; it != end; ++it) {
                    const auto& group = (*it)[1];
                    if (group.matched && group.length() > 0) values.push_back(formDecode(group.str()));
                }
            } catch (const std::runtime_error&) {
                values.clear();
            }
        } else {
            appendField(row, r.source, values);
        }
        if (values.empty()) continue;
        auto& slot = out[r.entity_name];
        slot.insert(slot.end(), std::make_move_iterator(values.begin()), std::make_move_iterator(values.end()));
    }
    return out;
}

// ---- free functions --------------------------------------------------------

std::vector<std::string> matchRow(const LogRow& row, const MappingTable& rules) {
    std::vector<std::string> out;
    for (std::size_t idx : rules.matchingRules(row)) out.push_back(rules.rules()[idx].action_id);
    if (out.empty()) out.emplace_back(kUnmatchedAction);
    return out;
}

EntityMap extractEntities(const LogRow& row, std::string_view actionId, const ExtractionTable& rules) {
    return rules.extract(row, actionId);
}

std::string formDecode(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '+') {
            out.push_back(' ');
        } else if (c == '%' && i + 2 < text.size() && hexValue(text[i + 1]) >= 0 && hexValue(text[i + 2]) >= 0) {
            out.push_back(static_cast<char>(hexValue(text[i + 1]) * 16 + hexValue(text[i + 2])));
            i += 2;
        } else {
            out.push_back(c);
        }
    }
    return detail::sanitizeUtf8(out);
}

RuleCoverage measureCoverage(std::span<const LogRow> rows, const MappingTable& mapping) {
    RuleCoverage cov;
    cov.rule_matches.assign(mapping.size(), 0);
    for (const auto& row : rows) {
        ++cov.total_rows;
        auto hits = mapping.matchingRules(row);
        if (hits.empty()) ++cov.unmatched_rows;
        for (std::size_t idx : hits) ++cov.rule_matches[idx];
    }
    return cov;
}

} // namespace whose
