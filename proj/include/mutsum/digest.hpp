#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace mutsum::digest {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// SHA-256 over length-prefixed fields, so ("ab","c") and ("a","bc") differ.
std::string fields_hex(std::initializer_list<std::string_view> fields);

/// 64-bit FNV-1a; used only for seeding, never for identity.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace mutsum::digest
