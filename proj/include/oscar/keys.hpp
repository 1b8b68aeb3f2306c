#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace oscar {

// Per-response content key, a deterministic function of the access secret
// and the (key_id, message_id, sender_id) triple it was derived for.
struct ContentKey {
  std::array<std::uint8_t, 16> bytes{};
  std::uint16_t key_id = 0;
  std::uint16_t message_id = 0;
  std::string sender_id;

  bool operator==(const ContentKey&) const = default;
};

}  // namespace oscar
