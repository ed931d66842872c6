#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace titl::utf8 {

// Byte offset of the first byte that does not start a well-formed UTF-8
// sequence, or nullopt when the whole input is valid.
std::optional<std::size_t> first_invalid(std::string_view bytes);

// Throws EncodingError on malformed input.
std::u32string decode(std::string_view bytes);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

// Number of scalar values; input must be valid UTF-8.
std::size_t length(std::string_view bytes);

bool is_space(char32_t cp);
char32_t to_lower(char32_t cp);

}  // namespace titl::utf8
