// hashing.hpp

#ifndef CALLGRAM_HASHING_HPP
#define CALLGRAM_HASHING_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace callgram {

/// 32-bit FNV-1a
std::uint32_t fnv1a32(std::string_view bytes) noexcept;

/// lowercase, zero-padded, 8 characters
std::string hex8(std::uint32_t value);

/// lowercase hex SHA-256 digest (64 characters)
std::string sha256_hex(std::string_view bytes);

}  // namespace callgram

#endif  // CALLGRAM_HASHING_HPP
