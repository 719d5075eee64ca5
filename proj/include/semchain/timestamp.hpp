#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace semchain {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

inline Timestamp now_utc() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

// "2025-06-17T09:30:00.250Z"
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);  // throws std::invalid_argument

// A clock that can be pinned to the epoch for reproducible logs.
struct Clock {
    bool frozen = false;
    Timestamp now() const { return frozen ? Timestamp{} : now_utc(); }
};

}  // namespace semchain
