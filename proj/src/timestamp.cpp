#include "semchain/timestamp.hpp"

#include <cstdio>
#include <stdexcept>

#include <fmt/format.h>

namespace semchain {

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                       hms.minutes().count(), hms.seconds().count(), hms.subseconds().count());
}

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0, ms = 0;
    const std::string buf(text);
    if (std::sscanf(buf.c_str(), "%d-%u-%uT%u:%u:%u.%3uZ", &y, &mo, &d, &h, &mi, &s, &ms) != 7) {
        throw std::invalid_argument(fmt::format("bad timestamp '{}'", text));
    }
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw std::invalid_argument(fmt::format("bad timestamp '{}'", text));
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

}  // namespace semchain
