#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace agentcf {

std::string to_lower(std::string_view s);

/// Splits into lowercased alphanumeric runs ("Rock; AOR!" -> {"rock", "aor"}).
std::vector<std::string> tokenize(std::string_view s);

/// Whitespace-separated token count (the word counter used by dataset stats).
std::size_t count_words(std::string_view s);

/// Lowercases, drops punctuation, collapses whitespace. Used before any fuzzy
/// title comparison.
std::string normalize_title(std::string_view s);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - dist/max(len); 1.0 for two empty strings.
double edit_similarity(std::string_view a, std::string_view b);

std::string trim(std::string_view s);

/// Case-insensitive search; npos when absent.
std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from = 0);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace agentcf
