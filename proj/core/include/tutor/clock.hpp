#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>

namespace tutor {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Milliseconds since the Unix epoch.
std::int64_t to_millis(Timestamp ts);
Timestamp from_millis(std::int64_t ms);

/// "2026-10-14T05:07:00.000Z"
std::string format_iso8601(Timestamp ts);
/// Inverse of format_iso8601. Accepts an optional fractional part; throws
/// tutor::ValidationError on anything else.
Timestamp parse_iso8601(const std::string& text);
/// "HH:MM" in UTC.
std::string format_hh_mm(Timestamp ts);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() override;
};

/// Deterministic clock for tests and replays: every call returns the current
/// value, then advances it by `step`.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start, std::chrono::milliseconds step = std::chrono::seconds(1))
      : next_(to_millis(start)), step_(step.count()) {}

  Timestamp now() override { return from_millis(next_.fetch_add(step_)); }
  void advance(std::chrono::milliseconds by) { next_.fetch_add(by.count()); }

 private:
  std::atomic<std::int64_t> next_;
  std::int64_t step_;
};

class IdGenerator {
 public:
  virtual ~IdGenerator() = default;
  /// Fresh identifier; `prefix` is a short record tag such as "ses" or "msg".
  virtual std::string next(const std::string& prefix) = 0;
};

/// 128 random bits, hex encoded.
class RandomIdGenerator final : public IdGenerator {
 public:
  RandomIdGenerator();
  std::string next(const std::string& prefix) override;

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

/// "ses-000001", "msg-000002", ... one shared counter across prefixes.
class SequentialIdGenerator final : public IdGenerator {
 public:
  std::string next(const std::string& prefix) override;

 private:
  std::atomic<std::uint64_t> counter_{0};
};

}  // namespace tutor
