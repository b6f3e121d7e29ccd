#include "tutor/clock.hpp"

#include <cctype>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "tutor/error.hpp"

namespace tutor {

using namespace std::chrono;

std::int64_t to_millis(Timestamp ts) { return ts.time_since_epoch().count(); }

Timestamp from_millis(std::int64_t ms) { return Timestamp{milliseconds{ms}}; }

std::string format_iso8601(Timestamp ts) {
  const auto day = floor<days>(ts);
  const year_month_day ymd{day};
  const hh_mm_ss<milliseconds> tod{ts - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                static_cast<long>(tod.seconds().count()), static_cast<long>(tod.subseconds().count()));
  return buf;
}

Timestamp parse_iso8601(const std::string& text) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6) {
    throw ValidationError("invalid timestamp: " + text);
  }
  std::size_t pos = static_cast<std::size_t>(consumed);
  long millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw ValidationError("invalid timestamp: " + text);
    for (; digits < 3; ++digits) millis *= 10;
  }
  if (pos + 1 != text.size() || text[pos] != 'Z') throw ValidationError("invalid timestamp: " + text);
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw ValidationError("invalid timestamp: " + text);
  return time_point_cast<milliseconds>(sys_days{ymd}) + hours{h} + minutes{mi} + seconds{s} + milliseconds{millis};
}

std::string format_hh_mm(Timestamp ts) {
  const auto day = floor<days>(ts);
  const hh_mm_ss<milliseconds> tod{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02ld:%02ld", static_cast<long>(tod.hours().count()),
                static_cast<long>(tod.minutes().count()));
  return buf;
}

Timestamp SystemClock::now() { return time_point_cast<milliseconds>(system_clock::now()); }

RandomIdGenerator::RandomIdGenerator() {
  std::random_device rd;
  std::seed_seq seq{rd(), rd(), rd(), rd()};
  rng_.seed(seq);
}

std::string RandomIdGenerator::next(const std::string& prefix) {
  std::uint64_t hi = 0, lo = 0;
  {
    std::lock_guard lock(mu_);
    hi = rng_();
    lo = rng_();
  }
  std::ostringstream out;
  out << prefix << '-' << std::hex << std::setfill('0') << std::setw(16) << hi << std::setw(16) << lo;
  return out.str();
}

std::string SequentialIdGenerator::next(const std::string& prefix) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(++counter_));
  return prefix + "-" + buf;
}

}  // namespace tutor
