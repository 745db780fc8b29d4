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

// Child-process helpers for driving the command-line tool from tests.

#include <string>
#include <sys/types.h>
#include <vector>

namespace whose::testing {

struct ProcResult {
    int exit_code = -1; // -1 when killed by a signal
    std::string out;
    std::string err;
};

// Runs argv to completion, capturing stdout and stderr.
ProcResult runProcess(const std::vector<std::string>& argv);

// A background child whose stdout is readable line by line.
class Child {
public:
    explicit Child(const std::vector<std::string>& argv);
    ~Child();
    Child(const Child&) = delete;
    Child& operator=(const Child&) = delete;

    // Next stdout line, or empty once the stream closes or timeoutMs passes.
    std::string readLine(int timeoutMs = 10'000);
    void signal(int sig);
    // Exit code, or -1 if killed by a signal; kills after timeoutMs.
    int wait(int timeoutMs = 10'000);

private:
    pid_t mPid = -1;
    int mFd = -1;
    std::string mBuffer;
    bool mReaped = false;
    int mStatus = 0;
};

std::string readFile(const std::string& path);
void writeFile(const std::string& path, const std::string& content);

} // namespace whose::testing
