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

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <regex>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "whose/error.hpp"
#include "whose/mapping.hpp"

using namespace whose;

namespace {

const std::string kMapHeader = "rule_order,action_id,label_en,label_de,referrer_param,url_param\n";
const std::string kExtHeader = "action_id,entity_name,kind,source,pattern\n";

MappingTable mapping(const std::string& body) {
    std::istringstream in(kMapHeader + body);
    return MappingTable::parse(in);
}

ExtractionTable extraction(const std::string& body) {
    std::istringstream in(kExtHeader + body);
    return ExtractionTable::parse(in);
}

std::string loadError(const std::string& text, bool isMapping = true) {
    std::istringstream in(text);
    try {
        if (isMapping)
            MappingTable::parse(in);
        else
            ExtractionTable::parse(in);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
        return e.what();
    }
    return "";
}

LogRow row(std::string url, std::string referrer = {}) {
    LogRow r;
    r.row_id = 1;
    r.session_id = "s1";
    r.timestamp = 1'398'938'400'000;
    r.url = std::move(url);
    r.referrer_url = std::move(referrer);
    return r;
}

const std::string kHomepageSearch = "1,simple_search_home,Simple search from the homepage,Einfache Suche von der Startseite,"
                            "^https?://xy\\.example/$,/search/results\\?\n";

} // namespace

TEST_SUITE("mapping") {
    TEST_CASE("homepage search rule loads with labels and referrer pattern") {
        auto t = mapping(kHomepageSearch);
        REQUIRE(t.size() == 1);
        const auto& r = t.rules()[0];
        CHECK(r.action_id == "simple_search_home");
        CHECK(r.rule_order == 1);
        CHECK(r.referrer_pattern == "^https?://xy\\.example/$");
        CHECK(r.labels.at("en") == "Simple search from the homepage");
        CHECK(r.labels.at("de") == "Einfache Suche von der Startseite");
    }

    TEST_CASE("header-only file is an empty rule list") {
        CHECK(mapping("").size() == 0);
        CHECK(extraction("").size() == 0);
        CHECK(mapping("").catalog() == ActionCatalog{{"__unmatched__", {{"en", "Unmatched"}}}});
    }

    TEST_CASE("load errors name the offending data row") {
        CHECK(loadError(kMapHeader + "1,a,A,,,([\n").rfind("bad_pattern @ row 1", 0) == 0);
        CHECK(loadError(kMapHeader + "1,a,A,,,/a\n2,b,B,,([,/b\n").rfind("bad_pattern @ row 2", 0) == 0);
        CHECK(loadError("action,pattern\n").rfind("bad_header", 0) == 0);
        CHECK(loadError(kMapHeader + "1,a,A,,\n").rfind("wrong_arity @ row 1", 0) == 0);
        CHECK(loadError(kMapHeader + "x,a,A,,,/a\n").rfind("bad_rule_order @ row 1", 0) == 0);
        CHECK(loadError(kMapHeader + "1,,A,,,/a\n").rfind("empty_action_id @ row 1", 0) == 0);
        CHECK(loadError(kMapHeader + "1,__unmatched__,A,,,/a\n").rfind("reserved_action_id @ row 1", 0) == 0);
        CHECK(loadError(kMapHeader + "1,a,,,,/a\n").rfind("missing_label @ row 1", 0) == 0);
        CHECK(loadError(kMapHeader + "1,a,A,,,\n").rfind("missing_url_pattern @ row 1", 0) == 0);
        CHECK(loadError(kMapHeader + "1,a,A,,,/a\n1,b,B,,,/b\n").rfind("duplicate_rule_order @ row 2", 0) == 0);
    }

    TEST_CASE("extraction rules validate kind, source and group count") {
        auto t = extraction("simple_search_home,search_term,text,url,lookfor=([^&]*)\n*,result_ids,field,resultlist_ids,\n");
        REQUIRE(t.size() == 2);
        CHECK(t.rules()[1].kind == ExtractionKind::field);
        CHECK(loadError(kExtHeader + "a,e,text,url,lookfor=[^&]*\n", false).rfind("pattern_needs_one_group @ row 1", 0) ==
              0);
        CHECK(loadError(kExtHeader + "a,e,text,url,(a)(b)\n", false).rfind("pattern_needs_one_group @ row 1", 0) == 0);
        CHECK(loadError(kExtHeader + "a,e,text,resultlist_ids,(a)\n", false).rfind("bad_source @ row 1", 0) == 0);
        CHECK(loadError(kExtHeader + "a,e,field,colour,\n", false).rfind("bad_source @ row 1", 0) == 0);
        CHECK(loadError(kExtHeader + "a,e,field,url,(x)\n", false).rfind("unexpected_pattern @ row 1", 0) == 0);
        CHECK(loadError(kExtHeader + "a,e,blob,url,(x)\n", false).rfind("bad_kind @ row 1", 0) == 0);
        CHECK(loadError(kExtHeader + "a,,text,url,(x)\n", false).rfind("empty_entity_name @ row 1", 0) == 0);
        CHECK(loadError(kExtHeader + "a,e,text,url,((\n", false).rfind("bad_pattern @ row 1", 0) == 0);
    }

    TEST_CASE("match_row: homepage search example and the unmatched sentinel") {
        auto t = mapping(kHomepageSearch);
        CHECK(matchRow(row("/search/results?lookfor=religion", "https://xy.example/"), t) ==
              std::vector<std::string>{"simple_search_home"});
        // Referrer pattern is anchored: a deeper page does not qualify.
        CHECK(matchRow(row("/search/results?lookfor=religion", "https://xy.example/Record/1"), t) ==
              std::vector<std::string>{"__unmatched__"});
        CHECK(matchRow(row("/favorites/add?id=42"), t) == std::vector<std::string>{"__unmatched__"});
    }

    TEST_CASE("match_row emits actions by rule_order, not file order") {
        // Oracle: both patterns match; sorting the two orders gives rule 1 first.
        auto t = mapping("3,rule3_action,Three,,,/Record/\n1,rule1_action,One,,,^/Record/[0-9]+$\n");
        CHECK(matchRow(row("/Record/42"), t) == std::vector<std::string>{"rule1_action", "rule3_action"});
        CHECK(matchRow(row("/Record/abc"), t) == std::vector<std::string>{"rule3_action"});
        auto cat = t.catalog();
        REQUIRE(cat.size() == 3);
        CHECK(cat[0].action_id == "rule1_action");
        CHECK(cat[1].action_id == "rule3_action");
        CHECK(cat[2].action_id == "__unmatched__");
    }

    TEST_CASE("empty rule_order falls back to the row position") {
        auto t = mapping(",a,A,,,/a\n,b,B,,,/b\n");
        CHECK(t.rules()[0].rule_order == 0);
        CHECK(t.rules()[1].rule_order == 1);
    }

    TEST_CASE("catalog is distinct by action and keeps the first rule's labels") {
        auto t = mapping("1,search,Search,Suche,,lookfor=\n2,view,View,,,/Record/\n3,search,Search again,,,type=\n");
        auto cat = t.catalog();
        REQUIRE(cat.size() == 3);
        CHECK(cat[0] == ActionInfo{"search", {{"en", "Search"}, {"de", "Suche"}}});
        CHECK(cat[1] == ActionInfo{"view", {{"en", "View"}}});
    }

    TEST_CASE("extract_entities examples") {
        auto ext = extraction("simple_search_home,search_term,text,url,lookfor=([^&]*)\n"
                              "*,result_ids,field,resultlist_ids,\n");
        auto r = row("/search/results?lookfor=religion", "https://xy.example/");
        auto e = extractEntities(r, "simple_search_home", ext);
        CHECK(e == EntityMap{{"search_term", {"religion"}}});

        // Manual scan of "lookfor=a&lookfor=b": two non-overlapping matches, a then b.
        auto multi = extractEntities(row("/search/results?lookfor=a&lookfor=b"), "simple_search_home", ext);
        CHECK(multi == EntityMap{{"search_term", {"a", "b"}}});

        auto ids = row("/x");
        ids.resultlist_ids = {"d1", "d2"};
        CHECK(extractEntities(ids, "simple_search_home", ext) == EntityMap{{"result_ids", {"d1", "d2"}}});
        CHECK(extractEntities(row("/x"), "simple_search_home", ext).empty());
        CHECK(extractEntities(ids, "__unmatched__", ext) == EntityMap{{"result_ids", {"d1", "d2"}}});
        CHECK(extractEntities(r, "other_action", ext).empty());
    }

    TEST_CASE("text entities are decoded once and empty captures skipped") {
        auto ext = extraction("s,search_term,text,url,lookfor=([^&]*)\n");
        CHECK(extractEntities(row("/r?lookfor=social+science%20data&lookfor="), "s", ext) ==
              EntityMap{{"search_term", {"social science data"}}});
        CHECK(extractEntities(row("/r?lookfor=%2541"), "s", ext) == EntityMap{{"search_term", {"%41"}}});
        CHECK(extractEntities(row("/r?lookfor=K%C3%B6ln"), "s", ext) == EntityMap{{"search_term", {"K\xC3\xB6ln"}}});
    }

    TEST_CASE("form decoding agrees with the reference decoder") {
        for (std::string s : {"", "abc", "a+b", "%41%42", "%zz", "%4", "100%", "%e2%82%ac", "x%2By", "++%20++"})
            CHECK(formDecode(s) == testing::referenceDecode(s));
    }

    TEST_CASE("field extraction covers every row field") {
        auto ext = extraction("*,sid,field,session_id,\n*,uid,field,user_id,\n*,ts,field,timestamp,\n"
                              "*,u,field,url,\n*,ref,field,referrer_url,\n");
        auto r = row("/a", "/b");
        r.user_id = "u1";
        auto e = extractEntities(r, "anything", ext);
        CHECK(e.at("sid") == std::vector<std::string>{"s1"});
        CHECK(e.at("uid") == std::vector<std::string>{"u1"});
        CHECK(e.at("ts") == std::vector<std::string>{"2014-05-01T10:00:00.000Z"});
        CHECK(e.at("u") == std::vector<std::string>{"/a"});
        CHECK(e.at("ref") == std::vector<std::string>{"/b"});
    }

    TEST_CASE("catastrophic patterns count as no match instead of aborting") {
        auto t = mapping("1,slow,Slow,,,^(a+)+$\n");
        std::string url(5000, 'a');
        url += 'b';
        CHECK(matchRow(row(url), t) == std::vector<std::string>{"__unmatched__"});
    }

    TEST_CASE("rule coverage against a reference scan") {
        auto log = testing::generateLog({.sessions = 300, .seed = 21, .long_tail = true});
        auto t = testing::portalMapping();
        auto cov = measureCoverage(log.rows, t);
        auto ref = testing::referenceRules(testing::portalMappingCsv());
        std::uint64_t unmatched = 0;
        std::vector<std::uint64_t> perRule(ref.size(), 0);
        for (const auto& r : log.rows) {
            bool any = false;
            for (std::size_t i = 0; i < ref.size(); ++i) {
                bool m = std::regex_search(r.url, std::regex(ref[i].url_pattern)) &&
                         (ref[i].referrer_pattern.empty() ||
                          std::regex_search(r.referrer_url, std::regex(ref[i].referrer_pattern)));
                if (m) ++perRule[i], any = true;
            }
            if (!any) ++unmatched;
        }
        CHECK(cov.total_rows == log.rows.size());
        CHECK(cov.unmatched_rows == unmatched);
        CHECK(unmatched > 0);
        CHECK(cov.rule_matches == perRule);
        CHECK(cov.coverage() == doctest::Approx(1.0 - double(unmatched) / double(log.rows.size())));
    }
}

TEST_SUITE("preprocess") {
    TEST_CASE("empty store gives an empty analysis table") {
        std::vector<LogRow> none;
        CHECK(preprocess(none, testing::portalMapping(), testing::portalExtraction(), 4).empty());
    }

    TEST_CASE("row matching two rules yields intra_row_index 0 and 1") {
        auto t = mapping("3,rule3_action,Three,,,/Record/\n1,rule1_action,One,,,^/Record/[0-9]+$\n");
        std::vector<LogRow> rows{row("/Record/42")};
        auto out = preprocess(rows, t, ExtractionTable{}, 1);
        REQUIRE(out.size() == 2);
        CHECK(out[0].action_id == "rule1_action");
        CHECK(out[0].intra_row_index == 0);
        CHECK(out[1].action_id == "rule3_action");
        CHECK(out[1].intra_row_index == 1);
        CHECK(out[0].source_row_id == out[1].source_row_id);
        CHECK(out[0].timestamp == out[1].timestamp);
    }

    TEST_CASE("zero workers is rejected") {
        std::vector<LogRow> rows{row("/a")};
        CHECK_THROWS_AS(preprocess(rows, MappingTable{}, ExtractionTable{}, 0), Error);
    }

    TEST_CASE("worker counts 1 and 8 agree with each other and with the sequential reference") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            auto log = testing::generateLog({.sessions = 70, .seed = seed});
            auto one = preprocess(log.rows, testing::portalMapping(), testing::portalExtraction(), 1);
            auto eight = preprocess(log.rows, testing::portalMapping(), testing::portalExtraction(), 8);
            auto ref = testing::referenceAnalysis(log.rows, testing::referenceRules(testing::portalMappingCsv()),
                                                  testing::referenceExtractions(testing::portalExtractionCsv()));
            REQUIRE(one == eight);
            REQUIRE(one == ref);
            CHECK(std::is_sorted(one.begin(), one.end(), canonicalLess));
        }
    }

    TEST_CASE("large inputs spanning several chunks stay deterministic") {
        auto log = testing::generateLog({.sessions = 2500, .seed = 77, .long_tail = true});
        REQUIRE(log.rows.size() > 3 * 4096);
        auto a = preprocess(log.rows, testing::largeMapping(), testing::portalExtraction(), 1);
        auto b = preprocess(log.rows, testing::largeMapping(), testing::portalExtraction(), 3);
        auto c = preprocess(log.rows, testing::largeMapping(), testing::portalExtraction(), 8);
        CHECK(a == b);
        CHECK(a == c);
    }
}
