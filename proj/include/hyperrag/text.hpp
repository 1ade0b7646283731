#pragma once

#include <set>
#include <string>
#include <vector>

namespace hyperrag {

// Lowercase ASCII letters in place semantics; non-ASCII bytes pass through.
std::string to_lower(const std::string& s);

// Strip leading/trailing whitespace.
std::string trim(const std::string& s);

// Entity-name normalization: lowercased and trimmed.
std::string normalize_name(const std::string& s);

// Whitespace-delimited tokens, order preserved.
std::vector<std::string> split_words(const std::string& s);

// Remove ASCII punctuation characters from a token.
std::string strip_punct(const std::string& token);

// Lowercased, punctuation-stripped word tokens; empty tokens dropped.
std::vector<std::string> normalized_tokens(const std::string& s);

// Same tokens deduplicated to a set.
std::set<std::string> token_set(const std::string& s);

size_t word_count(const std::string& s);

// Set F1 in its Dice form 2|A∩B| / (|A|+|B|), exact for small rationals.
// 0.0 when either set is empty.
double token_set_f1(const std::set<std::string>& a, const std::set<std::string>& b);

} // namespace hyperrag
