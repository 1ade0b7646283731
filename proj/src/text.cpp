#include "hyperrag/text.hpp"

#include <cctype>
#include <sstream>

namespace hyperrag {

std::string to_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::string normalize_name(const std::string& s) {
    return to_lower(trim(s));
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> words;
    std::istringstream in(s);
    std::string w;
    while (in >> w) {
        words.push_back(w);
    }
    return words;
}

std::string strip_punct(const std::string& token) {
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        if (!std::ispunct(static_cast<unsigned char>(c))) {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<std::string> normalized_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    for (const std::string& w : split_words(s)) {
        std::string t = strip_punct(to_lower(w));
        if (!t.empty()) {
            tokens.push_back(t);
        }
    }
    return tokens;
}

std::set<std::string> token_set(const std::string& s) {
    auto tokens = normalized_tokens(s);
    return std::set<std::string>(tokens.begin(), tokens.end());
}

size_t word_count(const std::string& s) {
    return split_words(s).size();
}


double token_set_f1(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    if (inter == 0) return 0.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a.size() + b.size());
}

} // namespace hyperrag
