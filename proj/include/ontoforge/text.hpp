#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers backed by ICU.
namespace ontoforge::text {

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset of the first code unit
  std::size_t length;  // encoded length in bytes
};

bool valid_utf8(std::string_view s);

// Decodes valid UTF-8. Invalid sequences decode to U+FFFD.
std::vector<CodePoint> decode(std::string_view s);
std::string encode(char32_t cp);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_upper(char32_t cp);
bool is_space(char32_t cp);

std::string fold_case(std::string_view s);
std::string to_lower(std::string_view s);
std::string nfc(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace ontoforge::text
