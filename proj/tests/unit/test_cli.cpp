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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <csignal>
#include <filesystem>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "oracles.hpp"
#include "process.hpp"
#include "synthetic.hpp"
#include "whose/api_service.hpp"
#include "whose/ingest.hpp"

namespace fs = std::filesystem;
using namespace whose;
using namespace whose::testing;

namespace {

const std::string kCli = WHOSE_CLI_PATH;

ProcResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), kCli);
    return runProcess(args);
}

std::string field(const std::string& out, const std::string& key) {
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
    return "<missing " + key + ">";
}

struct Prepared {
    FixtureFiles fx;
    fs::path store;
};

Prepared ingested(const std::string& tag, const SynthSpec& spec) {
    Prepared p{writePortalFixture(freshTempDir(tag), spec), {}};
    p.store = p.fx.dir / "store";
    auto r = cli({"ingest", "--log", p.fx.log, "--format", "csv", "--schema", p.fx.schema, "--store", p.store});
    REQUIRE(r.exit_code == 0);
    return p;
}

} // namespace

TEST_SUITE("cli") {
    TEST_CASE("version and usage errors") {
        auto v = cli({"--version"});
        CHECK(v.exit_code == 0);
        CHECK(!v.out.empty());
        CHECK(cli({}).exit_code == 1);
        CHECK(cli({"frobnicate"}).exit_code == 1);
        CHECK(cli({"ingest", "--log", "x"}).exit_code == 1);
    }

    TEST_CASE("ingest reports the same counts as the library") {
        auto dir = freshTempDir("cli-ingest");
        auto fx = writePortalFixture(dir, {.sessions = 40, .seed = 3});
        auto text = readFile(fx.log.string());
        text += ",u1,2014-05-01T10:00:00Z,,/Search/Results?lookfor=x,\n";
        text += "s-bad,,not-a-date,,/x,\n";
        writeFile(fx.log.string(), text);

        auto r = cli({"ingest", "--log", fx.log, "--format", "csv", "--schema", fx.schema, "--store", dir / "store"});
        CHECK(r.exit_code == 0);
        auto mem = LogStore::inMemory();
        auto rep = ingestFile(fx.log, LogFormat::csv, SchemaConfig::load(fx.schema), mem);
        CHECK(field(r.out, "accepted") == std::to_string(rep.accepted_count));
        CHECK(field(r.out, "rejected") == "2");
        CHECK(r.out.find("rejection: line " + std::to_string(fx.data.rows.size() + 2) + " missing_session_id") !=
              std::string::npos);
        CHECK(r.out.find("bad_timestamp") != std::string::npos);
        CHECK(field(r.out, "store_rows") == std::to_string(rep.accepted_count));

        auto missing = cli({"ingest", "--log", dir / "nope.csv", "--format", "csv", "--schema", fx.schema, "--store",
                            dir / "store"});
        CHECK(missing.exit_code == 1);
        auto badSchema = dir / "bad.conf";
        writeFile(badSchema.string(), "colour = blue\n");
        CHECK(cli({"ingest", "--log", fx.log, "--format", "csv", "--schema", badSchema, "--store", dir / "store"})
                  .exit_code == 1);
        fs::remove_all(dir);
    }

    TEST_CASE("validate-mapping: success, bad pattern, coverage against a reference scan") {
        auto p = ingested("cli-validate", {.sessions = 80, .seed = 9, .long_tail = true});
        auto ok = cli({"validate-mapping", "--mapping", p.fx.mapping, "--extraction", p.fx.extraction});
        CHECK(ok.exit_code == 0);
        CHECK(field(ok.out, "mapping_rules") == "12");
        CHECK(field(ok.out, "actions") == "13");

        auto bad = p.fx.dir / "bad.csv";
        writeFile(bad.string(), "rule_order,action_id,label_en,label_de,referrer_param,url_param\n1,a,A,,,/ok\n2,b,B,,,([\n");
        auto r = cli({"validate-mapping", "--mapping", bad, "--extraction", p.fx.extraction});
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("bad_pattern @ row 2") != std::string::npos);

        auto cov = cli({"validate-mapping", "--mapping", p.fx.mapping, "--extraction", p.fx.extraction, "--sample",
                        p.store});
        REQUIRE(cov.exit_code == 0);
        auto rules = referenceRules(portalMappingCsv());
        auto ref = referenceAnalysis(p.fx.data.rows, rules, {});
        std::set<RowId> unmatched;
        for (const auto& a : ref)
            if (a.action_id == "__unmatched__") unmatched.insert(a.source_row_id);
        double pct = 100.0 * (1.0 - double(unmatched.size()) / double(p.fx.data.rows.size()));
        CHECK(field(cov.out, "sample_rows") == std::to_string(p.fx.data.rows.size()));
        CHECK(field(cov.out, "unmatched_rows") == std::to_string(unmatched.size()));
        CHECK(std::stod(field(cov.out, "coverage_percent")) == doctest::Approx(pct).epsilon(1e-6));

        auto viaLog = cli({"validate-mapping", "--mapping", p.fx.mapping, "--extraction", p.fx.extraction, "--sample",
                           p.fx.log, "--schema", p.fx.schema, "--format", "csv"});
        CHECK(viaLog.exit_code == 0);
        CHECK(field(viaLog.out, "coverage_percent") == field(cov.out, "coverage_percent"));
        fs::remove_all(p.fx.dir);
    }

    TEST_CASE("preprocess is byte identical for 1 and 8 threads; empty store gives an empty analysis") {
        auto p = ingested("cli-prep", {.sessions = 120, .seed = 12});
        auto run = [&](int threads, const std::string& name) {
            auto out = p.fx.dir / name;
            auto r = cli({"preprocess", "--store", p.store, "--mapping", p.fx.mapping, "--extraction", p.fx.extraction,
                          "--threads", std::to_string(threads), "--out", out});
            REQUIRE(r.exit_code == 0);
            CHECK(field(r.out, "rows") == std::to_string(p.fx.data.rows.size()));
            CHECK(field(r.out, "threads") == std::to_string(threads));
            CHECK(field(r.out, "rows_per_sec").find("missing") == std::string::npos);
            return readFile(out.string());
        };
        auto one = run(1, "a1.jsonl");
        CHECK(!one.empty());
        CHECK(run(8, "a8.jsonl") == one);

        auto empty = p.fx.dir / "empty-store";
        fs::create_directories(empty);
        auto out = p.fx.dir / "empty.jsonl";
        auto r = cli({"preprocess", "--store", empty, "--mapping", p.fx.mapping, "--extraction", p.fx.extraction,
                      "--out", out});
        CHECK(r.exit_code == 0);
        auto store = loadAnalysis(out);
        CHECK(store.sessions().empty());
        CHECK(store.catalog().size() == 13);

        CHECK(cli({"preprocess", "--store", p.fx.dir / "nope", "--mapping", p.fx.mapping, "--extraction",
                   p.fx.extraction, "--out", out})
                  .exit_code == 1);
        CHECK(cli({"preprocess", "--store", p.store, "--mapping", p.fx.mapping, "--extraction", p.fx.extraction,
                   "--threads", "0", "--out", out})
                  .exit_code == 1);
        fs::remove_all(p.fx.dir);
    }

    TEST_CASE("export-flow equals the service body, defaults to 8 steps, rejects bad filters") {
        auto p = ingested("cli-flow", {.sessions = 90, .seed = 33});
        auto analysis = p.fx.dir / "analysis.jsonl";
        REQUIRE(cli({"preprocess", "--store", p.store, "--mapping", p.fx.mapping, "--extraction", p.fx.extraction,
                     "--out", analysis})
                    .exit_code == 0);
        auto store = std::make_shared<const SessionStore>(loadAnalysis(analysis));
        ApiService api(store, [] { return TimestampMs{0}; });

        auto out = p.fx.dir / "flow.json";
        std::string filter = R"({"logged_in_only":true})";
        auto filterFile = p.fx.dir / "filter.json";
        writeFile(filterFile.string(), filter);
        auto r = cli({"export-flow", "--store", analysis, "--filter", filterFile, "--time-range",
                      R"({"preset":"last_30_days"})", "--now", "1407456000000", "--out", out});
        REQUIRE(r.exit_code == 0);
        auto body = api.flow(R"({"filter":{"logged_in_only":true},"time_range":{"preset":"last_30_days"}})",
                             1'407'456'000'000);
        CHECK(readFile(out.string()) == body.body);
        CHECK(nlohmann::json::parse(body.body)["max_steps"] == 8);

        CHECK(cli({"export-flow", "--store", analysis, "--filter", "{broken", "--out", out}).exit_code == 1);
        CHECK(cli({"export-flow", "--store", analysis, "--filter", R"({"colour":1})", "--out", out}).exit_code == 1);
        CHECK(cli({"export-flow", "--store", analysis, "--max-steps", "0", "--out", out}).exit_code == 1);
        CHECK(cli({"export-flow", "--store", p.fx.dir / "missing.jsonl", "--out", out}).exit_code == 1);
        fs::remove_all(p.fx.dir);
    }

    TEST_CASE("serve answers the API and shuts down cleanly on SIGTERM") {
        auto p = ingested("cli-serve", {.sessions = 30, .seed = 8});
        auto analysis = p.fx.dir / "analysis.jsonl";
        REQUIRE(cli({"preprocess", "--store", p.store, "--mapping", p.fx.mapping, "--extraction", p.fx.extraction,
                     "--out", analysis})
                    .exit_code == 0);

        Child server({kCli, "serve", "--store", analysis.string(), "--port", "0"});
        std::string line;
        while ((line = server.readLine()).rfind("listening: ", 0) != 0 && !line.empty()) {
        }
        REQUIRE(line.rfind("listening: http://127.0.0.1:", 0) == 0);
        int port = std::stoi(line.substr(line.rfind(':') + 1));

        httplib::Client client("127.0.0.1", port);
        auto actions = client.Get("/api/actions");
        REQUIRE(actions);
        CHECK(actions->status == 200);
        CHECK(nlohmann::json::parse(actions->body).size() == 13);

        server.signal(SIGTERM);
        CHECK(server.wait() == 0);

        auto bad = p.fx.dir / "bad.jsonl";
        writeFile(bad.string(), "garbage\n");
        CHECK(cli({"serve", "--store", bad, "--port", "0"}).exit_code == 1);
        fs::remove_all(p.fx.dir);
    }
}
