#pragma once
// String helpers for exact-match comparison.

#include <string>

namespace difbench {

std::string trim(const std::string& s);

// Trim plus Unicode canonical composition (NFC). Case and internal
// punctuation are preserved exactly.
std::string normalize_feature(const std::string& s);

// rough token estimate used only when a provider reports no usage
std::size_t approximate_token_count(const std::string& s);

}  // namespace difbench
