#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace eyevis {

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace eyevis
