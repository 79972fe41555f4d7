// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

namespace dacp {

/// Wall clock in unix seconds. Token expiry and stream TTLs are evaluated
/// against this so tests can move time explicitly.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::uint64_t now_unix() const = 0;
};

class SystemClock final : public Clock {
 public:
  std::uint64_t now_unix() const override;
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::uint64_t start) : now_(start) {}
  std::uint64_t now_unix() const override { return now_.load(); }
  void set(std::uint64_t t) { now_.store(t); }
  void advance(std::uint64_t seconds) { now_.fetch_add(seconds); }

 private:
  std::atomic<std::uint64_t> now_;
};

std::shared_ptr<Clock> system_clock();

}  // namespace dacp
