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

#include <optional>
#include <stdexcept>
#include <string>

namespace whose {

enum class ErrorKind {
    invalid_argument,
    io,
    parse,
    not_found,
    unsupported_version,
    internal,
};

// Every failure raised by the library carries a short machine-readable code
// (e.g. "bad_pattern", "unsupported_version") next to the human message.
// `field` names the offending request field for validation errors.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message,
          std::optional<std::string> field = std::nullopt)
        : std::runtime_error(message), mKind(kind), mCode(std::move(code)), mField(std::move(field)) {}

    ErrorKind kind() const noexcept { return mKind; }
    const std::string& code() const noexcept { return mCode; }
    const std::optional<std::string>& field() const noexcept { return mField; }

private:
    ErrorKind mKind;
    std::string mCode;
    std::optional<std::string> mField;
};

} // namespace whose
