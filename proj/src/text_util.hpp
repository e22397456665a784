#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace clir::detail {

std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

bool is_space(char32_t c);
bool is_punct(char32_t c);
char32_t to_lower(char32_t c);

/// Splits on ASCII whitespace (space/tab); used by the line-oriented file formats.
std::vector<std::string_view> split_fields(std::string_view line);

std::string_view trim_line_end(std::string_view line);

}  // namespace clir::detail
