#pragma once

#include <atomic>

namespace declarui {

// Counts outbound HTTP requests made by any client in this process. Tests
// assert it stays at zero when only fixture backends are configured.
inline std::atomic<long long>& http_request_count() {
  static std::atomic<long long> count{0};
  return count;
}

}  // namespace declarui
