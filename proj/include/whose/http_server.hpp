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

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "whose/api_service.hpp"

namespace whose {

// HTTP/1.1 front end for ApiService; optionally serves static UI assets at /.
class HttpServer {
public:
    HttpServer(std::shared_ptr<const SessionStore> store, std::optional<std::filesystem::path> uiDir = std::nullopt,
               ApiService::Clock clock = {});
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 binds an ephemeral port. Returns the bound port; throws Error(io).
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void run();
    // Blocks until run() is accepting connections.
    void waitUntilReady() const;
    // Safe to call from any thread.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> mImpl;
};

} // namespace whose
