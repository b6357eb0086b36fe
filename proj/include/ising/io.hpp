#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace ising {

// printf %.17g with the C locale: 17 significant digits, enough to round-trip
// any double exactly. All CSV numbers go through this, which is what makes
// rerun artifacts byte-identical.
std::string format_g17(double v);

// Flat key=value text: one pair per line, '#' starts a comment, blank lines
// ignored, keys unique. Throws std::invalid_argument with the line number on
// malformed input or duplicate keys.
std::map<std::string, std::string> parse_flat_kv(const std::string& text);

// FNV-1a 64-bit over the given text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

std::string read_text_file(const std::string& path);       // invalid_argument if unreadable
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ising
