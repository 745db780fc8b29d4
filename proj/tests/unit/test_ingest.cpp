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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "synthetic.hpp"
#include "whose/csv.hpp"
#include "whose/error.hpp"
#include "whose/ingest.hpp"
#include "whose/time_util.hpp"

using namespace whose;
namespace fs = std::filesystem;

namespace {

fs::path tempDir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("whose-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TimestampMs chronoMs(std::chrono::sys_days d, std::chrono::milliseconds extra = {}) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(d.time_since_epoch() + extra).count();
}

IngestReport ingestText(const std::string& text, LogFormat format, const SchemaConfig& schema, LogStore& store) {
    std::istringstream in(text);
    return ingestStream(in, format, schema, store);
}

} // namespace

TEST_SUITE("time") {
    using namespace std::chrono;

    TEST_CASE("iso8601 variants agree with chrono calendar arithmetic") {
        TimestampMs may1 = chronoMs(sys_days{2014y / May / 1}, hours{10});
        CHECK(parseIso8601("2014-05-01T10:00:00Z") == may1);
        CHECK(parseIso8601("2014-05-01 10:00:00") == may1);
        CHECK(parseIso8601("2014-05-01T12:00:00+02:00") == may1);
        CHECK(parseIso8601("2014-05-01T10:00:00.250Z") == may1 + 250);
        CHECK(parseIso8601("2014-05-01T10:00Z") == may1);
        CHECK(parseIso8601("2014-05-01") == chronoMs(sys_days{2014y / May / 1}));
        CHECK(parseIso8601("2014-05-01T10:00:00", 60) == may1 - 3'600'000);
    }

    TEST_CASE("malformed timestamps are rejected") {
        for (auto bad : {"not-a-date", "", "2014-13-01", "2014-02-30T00:00:00Z", "2014-05-01T25:00:00Z",
                         "2014-05-01T10:00:00Zjunk", "2014/05/01"})
            CHECK_MESSAGE(!parseIso8601(bad), bad);
    }

    TEST_CASE("epoch and pattern formats") {
        CHECK(parseTimestamp("1398938400", TimestampFormat::parse("epoch_s")) == 1398938400000LL);
        CHECK(parseTimestamp("1398938400123", TimestampFormat::parse("epoch_ms")) == 1398938400123LL);
        CHECK(!parseTimestamp("12x", TimestampFormat::parse("epoch_ms")));
        auto f = TimestampFormat::parse("%d/%m/%Y %H:%M:%S");
        CHECK(parseTimestamp("01/05/2014 10:00:00", f) == chronoMs(sys_days{2014y / May / 1}, hours{10}));
        CHECK(parseTimestamp("01/05/2014 10:00:00", f, 120) == chronoMs(sys_days{2014y / May / 1}, hours{8}));
        CHECK(!parseTimestamp("garbage", f));
        CHECK_THROWS_AS(TimestampFormat::parse("fortnightly"), Error);
    }

    TEST_CASE("utc offsets") {
        CHECK(parseUtcOffset("UTC") == 0);
        CHECK(parseUtcOffset("+02:00") == 120);
        CHECK(parseUtcOffset("-0530") == -330);
        CHECK(!parseUtcOffset("Europe/Berlin"));
    }

    TEST_CASE("format/parse round trip over random instants") {
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<TimestampMs> d(-2'000'000'000'000LL, 4'000'000'000'000LL);
        for (int i = 0; i < 2000; ++i) {
            TimestampMs ts = d(rng);
            REQUIRE(parseIso8601(formatIso8601(ts)) == ts);
        }
    }
}

TEST_SUITE("csv") {
    TEST_CASE("rfc4180 quoting, embedded newlines and CRLF") {
        std::istringstream in("a,b,c\r\n\"x,1\",\"he said \"\"hi\"\"\",\"multi\nline\"\n,,\n");
        CsvReader r(in);
        auto h = r.next();
        REQUIRE(h);
        CHECK(h->fields == std::vector<std::string>{"a", "b", "c"});
        auto rec = r.next();
        REQUIRE(rec);
        CHECK(rec->line == 2);
        CHECK(rec->fields == std::vector<std::string>{"x,1", "he said \"hi\"", "multi\nline"});
        auto empty = r.next();
        REQUIRE(empty);
        CHECK(empty->line == 4);
        CHECK(empty->fields == std::vector<std::string>{"", "", ""});
        CHECK(!r.next());
    }

    TEST_CASE("alternate delimiter") {
        CHECK(splitCsvRecord("a\tb\t\"c\td\"", '\t') == std::vector<std::string>{"a", "b", "c\td"});
    }
}

TEST_SUITE("ingestion") {
    const SchemaConfig kDefault = SchemaConfig::parse("session_id = session_id\ntimestamp = timestamp\n");
    const std::string kHeader = "session_id,user_id,timestamp,resultlist_ids,url,referrer_url\n";

    TEST_CASE("parse_log_record normalizes a search row") {
        auto parser = RecordParser::forCsv(kDefault, splitCsvRecord(kHeader));
        auto result = parser.parse("s1,,2014-05-01T10:00:00Z,\"d1,d2\",/Search/Results?lookfor=religion,");
        REQUIRE(std::holds_alternative<LogRow>(result));
        const auto& row = std::get<LogRow>(result);
        CHECK(row.session_id == "s1");
        CHECK(row.url == "/Search/Results?lookfor=religion");
        CHECK(!row.user_id);
        CHECK(row.resultlist_ids == std::vector<std::string>{"d1", "d2"});
        CHECK(row.referrer_url.empty());
        CHECK(row.timestamp == parseIso8601("2014-05-01T10:00:00Z"));
    }

    TEST_CASE("parse_log_record rejections") {
        auto parser = RecordParser::forCsv(kDefault, splitCsvRecord(kHeader));
        auto reason = [&](std::string_view raw) {
            auto r = parser.parse(raw);
            REQUIRE(std::holds_alternative<Rejection>(r));
            return std::get<Rejection>(r).reason;
        };
        CHECK(reason(",u,2014-05-01T10:00:00Z,,/x,") == "missing_session_id");
        CHECK(reason("  ,u,2014-05-01T10:00:00Z,,/x,") == "missing_session_id");
        CHECK(reason("s1,u,not-a-date,,/x,") == "bad_timestamp");
        CHECK(reason("s1,u,2014-05-01T10:00:00Z,/x") == "wrong_arity");

        auto json = RecordParser::forJsonl(kDefault);
        auto r = json.parse("{not json");
        REQUIRE(std::holds_alternative<Rejection>(r));
        CHECK(std::get<Rejection>(r).reason == "malformed_record");
    }

    TEST_CASE("ingest_file counts: all valid, one missing session") {
        auto store = LogStore::inMemory();
        auto rep = ingestText(kHeader + "s1,,2014-05-01T10:00:00Z,,/a,\n"
                                        "s1,,2014-05-01T10:00:05Z,,/b,\n"
                                        "s2,u9,2014-05-01T11:00:00Z,,/c,\n",
                              LogFormat::csv, kDefault, store);
        CHECK(rep.accepted_count == 3);
        CHECK(rep.rejected_count == 0);

        auto store2 = LogStore::inMemory();
        auto rep2 = ingestText(kHeader + "s1,,2014-05-01T10:00:00Z,,/a,\n"
                                         ",,2014-05-01T10:00:05Z,,/b,\n"
                                         "s2,u9,2014-05-01T11:00:00Z,,/c,\n",
                               LogFormat::csv, kDefault, store2);
        CHECK(rep2.accepted_count == 2);
        CHECK(rep2.rejected_count == 1);
        REQUIRE(rep2.rejections.size() == 1);
        CHECK(rep2.rejections[0] == Rejection{"line 3", "missing_session_id"});
        CHECK(store2.rows().size() == 2);
    }

    TEST_CASE("row ids increase in ingest order across appends") {
        auto store = LogStore::inMemory();
        ingestText(kHeader + "s1,,2014-05-01T10:00:00Z,,/a,\ns1,,2014-05-01T09:00:00Z,,/b,\n", LogFormat::csv, kDefault,
                   store);
        ingestText(kHeader + "s1,,2014-05-01T10:00:00Z,,/a,\n", LogFormat::csv, kDefault, store);
        REQUIRE(store.rows().size() == 3); // re-ingest appends, no dedup
        for (std::size_t i = 1; i < store.rows().size(); ++i) CHECK(store.rows()[i - 1].row_id < store.rows()[i].row_id);
        CHECK(store.rows()[1].url == "/b");
    }

    TEST_CASE("jsonl with arrays, numbers and a custom schema") {
        auto schema = SchemaConfig::parse(
            "# legacy export\n"
            "session_id = sid\nuser_id = uid\ntimestamp = ts\nresultlist_ids = hits\nurl = request\n"
            "referrer_url =\ntimestamp_format = epoch_s\n");
        auto store = LogStore::inMemory();
        auto rep = ingestText("{\"sid\":\"a\",\"uid\":null,\"ts\":1398938400,\"hits\":[\"x\",\"y\"],\"request\":\"/r\"}\n"
                              "\n"
                              "{\"sid\":\"a\",\"uid\":\"u1\",\"ts\":\"1398938460\",\"hits\":\"p;q\",\"request\":\"/s\"}\n"
                              "[1,2]\n",
                              LogFormat::jsonl, schema, store);
        CHECK(rep.accepted_count == 2);
        CHECK(rep.rejected_count == 1);
        CHECK(rep.rejections[0] == Rejection{"line 4", "malformed_record"});
        CHECK(store.rows()[0].resultlist_ids == std::vector<std::string>{"x", "y"});
        CHECK(store.rows()[0].timestamp == 1398938400000LL);
        CHECK(store.rows()[1].user_id == "u1");
        CHECK(store.rows()[1].resultlist_ids == std::vector<std::string>{"p;q"});
    }

    TEST_CASE("positional columns, tab delimiter, list delimiter and timezone") {
        auto schema = SchemaConfig::parse("session_id = #2\ntimestamp = #1\nurl = #3\nuser_id =\nresultlist_ids = #4\n"
                                          "referrer_url =\ncsv_delimiter = \\t\nlist_delimiter = ;\ntimezone = +02:00\n");
        auto store = LogStore::inMemory();
        auto rep = ingestText("when\twho\twhat\tids\n2014-05-01 12:00:00\ts7\t/Record/1\ta;b\n", LogFormat::csv, schema,
                              store);
        REQUIRE(rep.accepted_count == 1);
        const auto& r = store.rows()[0];
        CHECK(r.session_id == "s7");
        CHECK(r.timestamp == parseIso8601("2014-05-01T10:00:00Z"));
        CHECK(r.resultlist_ids == std::vector<std::string>{"a", "b"});
    }

    TEST_CASE("missing mandatory column and bad schema are fatal") {
        auto store = LogStore::inMemory();
        CHECK_THROWS_AS(ingestText("sid,url\na,/x\n", LogFormat::csv, kDefault, store), Error);
        CHECK_THROWS_AS(SchemaConfig::parse("colour = blue\n"), Error);
        CHECK_THROWS_AS(SchemaConfig::parse("session_id =\n"), Error);
        CHECK_THROWS_AS(SchemaConfig::parse("timezone = Mars/Olympus\n"), Error);
        try {
            ingestFile("/nonexistent/log.csv", LogFormat::csv, kDefault, store);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::io);
        }
    }

    TEST_CASE("invalid utf-8 is replaced so rows always serialize") {
        auto store = LogStore::inMemory();
        ingestText(kHeader + "s1,,2014-05-01T10:00:00Z,,/Search?lookfor=K\xF6ln,\n", LogFormat::csv, kDefault, store);
        CHECK(store.rows()[0].url == "/Search?lookfor=K\xEF\xBF\xBDln");
    }

    TEST_CASE("directory store round-trips rows field for field") {
        auto dir = tempDir("store");
        auto log = testing::generateLog({.sessions = 200, .seed = 11});
        std::ostringstream csv;
        testing::writeCsv(csv, log.rows);
        {
            auto store = LogStore::open(dir);
            auto rep = ingestText(csv.str(), LogFormat::csv, SchemaConfig{}, store);
            CHECK(rep.accepted_count == log.rows.size());
        }
        auto reopened = LogStore::open(dir);
        REQUIRE(reopened.rows().size() == log.rows.size());
        for (std::size_t i = 0; i < log.rows.size(); ++i) REQUIRE(reopened.rows()[i] == log.rows[i]);

        // A second writer handle sees appends made through the first.
        auto a = LogStore::open(dir);
        auto b = LogStore::open(dir);
        ingestText(kHeader + "z1,,2014-05-01T10:00:00Z,,/a,\n", LogFormat::csv, SchemaConfig{}, a);
        ingestText(kHeader + "z2,,2014-05-01T10:00:00Z,,/b,\n", LogFormat::csv, SchemaConfig{}, b);
        auto c = LogStore::open(dir);
        REQUIRE(c.rows().size() == log.rows.size() + 2);
        CHECK(c.rows()[c.rows().size() - 2].row_id + 1 == c.rows().back().row_id);
        fs::remove_all(dir);
    }

    TEST_CASE("100k-row synthetic legacy export ingests completely") {
        auto log = testing::generateLog({.sessions = 14'300, .seed = 5, .max_length = 13});
        REQUIRE(log.rows.size() >= 90'000);
        std::ostringstream csv;
        testing::writeCsv(csv, log.rows);
        auto store = LogStore::inMemory();
        auto rep = ingestText(csv.str(), LogFormat::csv, SchemaConfig{}, store);
        CHECK(rep.accepted_count == log.rows.size());
        CHECK(rep.rejected_count == 0);
        CHECK(store.rows().size() == log.rows.size());
    }
}
