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

#include "whose/time_util.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "whose/error.hpp"

namespace whose {

namespace {

class Cursor {
public:
    explicit Cursor(std::string_view s) : mText(s) {}

    bool done() const { return mPos >= mText.size(); }
    char peek() const { return done() ? '\0' : mText[mPos]; }
    bool consume(char c) {
        if (peek() != c) return false;
        ++mPos;
        return true;
    }
    // Exactly `width` digits.
    std::optional<int> digits(std::size_t width) {
        if (mPos + width > mText.size()) return std::nullopt;
        int v = 0;
        for (std::size_t i = 0; i < width; ++i) {
            char c = mText[mPos + i];
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            v = v * 10 + (c - '0');
        }
        mPos += width;
        return v;
    }
    // One or more digits; returns the value scaled to milliseconds.
    std::optional<int> fraction() {
        std::size_t start = mPos;
        int ms = 0;
        int scale = 100;
        while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
            ms += (peek() - '0') * scale;
            scale /= 10;
            ++mPos;
        }
        if (mPos == start) return std::nullopt;
        return ms;
    }

private:
    std::string_view mText;
    std::size_t mPos = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool validCivil(int y, int mo, int d, int h, int mi, int s) {
    using namespace std::chrono;
    if (mo < 1 || mo > 12 || h > 23 || mi > 59 || s > 60) return false;
    return year_month_day{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}}.ok();
}

std::optional<std::int64_t> parseInteger(std::string_view s) {
    s = trim(s);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

} // namespace

TimestampFormat TimestampFormat::parse(std::string_view text) {
    text = trim(text);
    TimestampFormat f;
    if (text.empty() || text == "iso8601") {
        f.kind = Kind::iso8601;
    } else if (text == "epoch_s" || text == "epoch_seconds") {
        f.kind = Kind::epoch_seconds;
    } else if (text == "epoch_ms" || text == "epoch_millis") {
        f.kind = Kind::epoch_millis;
    } else if (text.find('%') != std::string_view::npos) {
        f.kind = Kind::pattern;
        f.pattern = std::string(text);
    } else {
        throw Error(ErrorKind::parse, "bad_timestamp_format", "unknown timestamp format '" + std::string(text) + "'");
    }
    return f;
}

TimestampMs fromCivil(int year, unsigned month, unsigned day, int hour, int minute, int second, int millis) {
    using namespace std::chrono;
    sys_days days{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
    return static_cast<TimestampMs>(days.time_since_epoch().count()) * kMillisPerDay +
           ((static_cast<TimestampMs>(hour) * 60 + minute) * 60 + second) * 1000 + millis;
}

std::optional<int> parseUtcOffset(std::string_view text) {
    text = trim(text);
    if (text == "UTC" || text == "utc" || text == "Z" || text == "GMT") return 0;
    Cursor c(text);
    int sign = 1;
    if (c.consume('-')) sign = -1;
    else if (!c.consume('+')) return std::nullopt;
    auto hh = c.digits(2);
    if (!hh) return std::nullopt;
    int mm = 0;
    if (!c.done()) {
        c.consume(':');
        auto m = c.digits(2);
        if (!m) return std::nullopt;
        mm = *m;
    }
    if (!c.done() || *hh > 23 || mm > 59) return std::nullopt;
    return sign * (*hh * 60 + mm);
}

std::optional<TimestampMs> parseIso8601(std::string_view text, int defaultOffsetMinutes) {
    Cursor c(trim(text));
    auto y = c.digits(4);
    if (!y || !c.consume('-')) return std::nullopt;
    auto mo = c.digits(2);
    if (!mo || !c.consume('-')) return std::nullopt;
    auto d = c.digits(2);
    if (!d) return std::nullopt;
    int h = 0, mi = 0, s = 0, ms = 0;
    if (c.consume('T') || c.consume(' ')) {
        auto hh = c.digits(2);
        if (!hh || !c.consume(':')) return std::nullopt;
        auto mm = c.digits(2);
        if (!mm) return std::nullopt;
        h = *hh;
        mi = *mm;
        if (c.consume(':')) {
            auto ss = c.digits(2);
            if (!ss) return std::nullopt;
            s = *ss;
            if (c.consume('.') || c.consume(',')) {
                auto frac = c.fraction();
                if (!frac) return std::nullopt;
                ms = *frac;
            }
        }
    }
    int offset = defaultOffsetMinutes;
    if (c.consume('Z') || c.consume('z')) {
        offset = 0;
    } else if (c.peek() == '+' || c.peek() == '-') {
        int sign = c.peek() == '-' ? -1 : 1;
        c.consume(c.peek());
        auto oh = c.digits(2);
        if (!oh) return std::nullopt;
        c.consume(':');
        auto om = c.digits(2);
        if (!om || *oh > 23 || *om > 59) return std::nullopt;
        offset = sign * (*oh * 60 + *om);
    }
    if (!c.done() || !validCivil(*y, *mo, *d, h, mi, s)) return std::nullopt;
    return fromCivil(*y, static_cast<unsigned>(*mo), static_cast<unsigned>(*d), h, mi, s, ms) -
           static_cast<TimestampMs>(offset) * 60'000;
}

std::optional<TimestampMs> parseTimestamp(std::string_view text, const TimestampFormat& format,
                                          int defaultOffsetMinutes) {
    switch (format.kind) {
    case TimestampFormat::Kind::iso8601:
        return parseIso8601(text, defaultOffsetMinutes);
    case TimestampFormat::Kind::epoch_seconds: {
        auto v = parseInteger(text);
        if (!v) return std::nullopt;
        return *v * 1000;
    }
    case TimestampFormat::Kind::epoch_millis:
        return parseInteger(text);
    case TimestampFormat::Kind::pattern: {
        std::tm tm{};
        std::istringstream in{std::string(trim(text))};
        in >> std::get_time(&tm, format.pattern.c_str());
        if (in.fail()) return std::nullopt;
        in >> std::ws;
        if (!in.eof()) return std::nullopt;
        int y = tm.tm_year + 1900, mo = tm.tm_mon + 1;
        if (!validCivil(y, mo, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec)) return std::nullopt;
        return fromCivil(y, static_cast<unsigned>(mo), static_cast<unsigned>(tm.tm_mday), tm.tm_hour, tm.tm_min,
                         tm.tm_sec) -
               static_cast<TimestampMs>(defaultOffsetMinutes) * 60'000;
    }
    }
    return std::nullopt;
}

std::string formatIso8601(TimestampMs ts) {
    using namespace std::chrono;
    TimestampMs days = ts / kMillisPerDay;
    TimestampMs rem = ts % kMillisPerDay;
    if (rem < 0) {
        rem += kMillisPerDay;
        --days;
    }
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3'600'000), static_cast<int>(rem / 60'000 % 60),
                  static_cast<int>(rem / 1000 % 60), static_cast<int>(rem % 1000));
    return buf;
}

} // namespace whose
