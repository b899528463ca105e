#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lexent::text {

bool is_valid_utf8(std::string_view s);

/// Decodes one code point starting at s[pos] and advances pos. Invalid bytes
/// decode as U+FFFD and advance by one.
char32_t next_code_point(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

bool is_cjk(char32_t cp);

/// Letters and digits outside the CJK blocks (ASCII, Latin, Greek, Cyrillic).
bool is_word_char(char32_t cp);

char32_t to_lower(char32_t cp);

std::string_view trim(std::string_view s);

std::vector<std::string> read_lines(const std::string& path);

/// One entry per non-empty, non-comment ('#') line, trimmed.
std::vector<std::string> read_word_list(const std::string& path);

std::string read_file(const std::string& path);

void write_file(const std::string& path, std::string_view contents);

}  // namespace lexent::text
