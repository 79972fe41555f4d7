// SPDX-License-Identifier: Apache-2.0
#include "dacp/util/clock.hpp"

#include <chrono>

namespace dacp {

std::uint64_t SystemClock::now_unix() const {
  auto now = std::chrono::system_clock::now().time_since_epoch();
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(now).count());
}

std::shared_ptr<Clock> system_clock() {
  static const auto clock = std::make_shared<SystemClock>();
  return clock;
}

}  // namespace dacp
