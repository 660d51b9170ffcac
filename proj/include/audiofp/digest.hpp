#pragma once

#include <span>
#include <string>
#include <string_view>

namespace audiofp {

/// Lowercase hex MD5 of raw bytes.
std::string md5_hex(std::string_view bytes);

/// MD5 over the little-endian IEEE-754 binary32 encodings of `values`, in order.
std::string digest_buffer(std::span<const double> values);

bool is_hex_digest(std::string_view s, std::size_t length = 32);

}  // namespace audiofp
