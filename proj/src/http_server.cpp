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

#include "whose/http_server.hpp"

#include <charconv>

#include <httplib.h>

#include "whose/error.hpp"

namespace whose {

namespace {

constexpr const char* kJson = "application/json";

std::optional<TimestampMs> nowHeader(const httplib::Request& req) {
    if (!req.has_header(std::string(kNowHeader).c_str())) return std::nullopt;
    std::string v = req.get_header_value(std::string(kNowHeader).c_str());
    TimestampMs ms = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), ms);
    if (ec != std::errc{} || ptr != v.data() + v.size()) return std::nullopt;
    return ms;
}

void send(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, kJson);
}

} // namespace

struct HttpServer::Impl {
    ApiService api;
    httplib::Server server;
    bool bound = false;
    std::atomic<bool> stopRequested{false};

    Impl(std::shared_ptr<const SessionStore> store, ApiService::Clock clock) : api(std::move(store), std::move(clock)) {}
};

HttpServer::HttpServer(std::shared_ptr<const SessionStore> store, std::optional<std::filesystem::path> uiDir,
                       ApiService::Clock clock)
    : mImpl(std::make_unique<Impl>(std::move(store), std::move(clock))) {
    auto& srv = mImpl->server;
    const ApiService& api = mImpl->api;

    srv.Get("/api/actions", [&api](const httplib::Request&, httplib::Response& res) { send(res, api.actions()); });
    srv.Post("/api/sessions", [&api](const httplib::Request& req, httplib::Response& res) {
        send(res, api.sessions(req.body, nowHeader(req)));
    });
    srv.Post("/api/flow", [&api](const httplib::Request& req, httplib::Response& res) {
        send(res, api.flow(req.body, nowHeader(req)));
    });
    srv.Get(R"(/api/sessions/(.+))", [&api](const httplib::Request& req, httplib::Response& res) {
        send(res, api.session(req.matches[1].str()));
    });
    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(errorBody("internal", what), kJson);
    });

    if (uiDir) {
        if (!std::filesystem::is_directory(*uiDir))
            throw Error(ErrorKind::invalid_argument, "bad_ui_dir", "UI directory not found: " + uiDir->string());
        srv.set_mount_point("/", uiDir->string());
    }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    auto& srv = mImpl->server;
    int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorKind::io, "bind_failed", "cannot listen on " + host + ":" + std::to_string(port));
    mImpl->bound = true;
    return bound;
}

void HttpServer::run() {
    if (!mImpl->bound) throw Error(ErrorKind::invalid_argument, "not_bound", "bind() must precede run()");
    if (mImpl->stopRequested) return;
    mImpl->server.listen_after_bind();
}

void HttpServer::waitUntilReady() const { mImpl->server.wait_until_ready(); }

void HttpServer::stop() {
    if (!mImpl) return;
    mImpl->stopRequested = true;
    mImpl->server.stop();
}

} // namespace whose
