#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ideajudge {

/// Lowercased ASCII alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);
std::set<std::string> token_set(std::string_view text);

/// |a ∩ b| / |a ∪ b| over token sets; 0 when both are empty.
double token_overlap(const std::set<std::string>& a, const std::set<std::string>& b);

/// At most `max_bytes` bytes of `text`, never splitting a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view text, std::size_t max_bytes);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace ideajudge
