#include "skillhub/text.hpp"

namespace skillhub::text {

namespace {

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool in_range(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

}  // namespace

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
    const auto lead = static_cast<unsigned char>(s[pos]);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        ++pos;
        return 0xFFFD;
    }
    if (pos + len > s.size()) {
        ++pos;
        return 0xFFFD;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto cont = static_cast<unsigned char>(s[pos + i]);
        if ((cont & 0xC0) != 0x80) {
            ++pos;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    pos += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_token_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    // Latin-1 punctuation and symbols, keeping the ordinal indicators and micro sign.
    if (in_range(cp, 0x80, 0xBF)) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (in_range(cp, 0x2000, 0x206F)) return false;  // general punctuation
    if (in_range(cp, 0x20A0, 0x20CF)) return false;  // currency
    if (in_range(cp, 0x2190, 0x2BFF)) return false;  // arrows, math, box drawing, symbols
    if (in_range(cp, 0x3000, 0x303F)) return false;  // CJK punctuation
    if (in_range(cp, 0xFE30, 0xFE4F)) return false;
    if (in_range(cp, 0xFF00, 0xFF0F) || in_range(cp, 0xFF1A, 0xFF20) ||
        in_range(cp, 0xFF3B, 0xFF40) || in_range(cp, 0xFF5B, 0xFF65)) {
        return false;
    }
    if (cp == 0xFFFD || cp == 0xFEFF) return false;
    if (in_range(cp, 0x1F000, 0x1FAFF)) return false;  // emoji and pictographs
    return true;
}

char32_t fold_case(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp < 0xC0) return cp;
    if (in_range(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
    if (in_range(cp, 0x100, 0x137) || in_range(cp, 0x14A, 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
    if (in_range(cp, 0x139, 0x148) || in_range(cp, 0x179, 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (in_range(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
    if (cp == 0x386) return 0x3AC;
    if (in_range(cp, 0x388, 0x38A)) return cp + 37;
    if (cp == 0x38C) return 0x3CC;
    if (in_range(cp, 0x38E, 0x38F)) return cp + 63;
    if (in_range(cp, 0x400, 0x40F)) return cp + 0x50;
    if (in_range(cp, 0x410, 0x42F)) return cp + 0x20;
    if (in_range(cp, 0x460, 0x481) || in_range(cp, 0x48A, 0x4BF)) return (cp % 2 == 0) ? cp + 1 : cp;
    if (in_range(cp, 0xFF21, 0xFF3A)) return cp + 0x20;
    return cp;
}

std::vector<std::string> tokenize(std::string_view input) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t pos = 0;
    while (pos < input.size()) {
        const char32_t cp = decode_utf8(input, pos);
        if (is_token_char(cp)) {
            append_utf8(current, fold_case(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string_view> split_words(std::string_view input) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < input.size()) {
        while (i < input.size() && is_ascii_space(input[i])) ++i;
        const std::size_t start = i;
        while (i < input.size() && !is_ascii_space(input[i])) ++i;
        if (i > start) words.push_back(input.substr(start, i - start));
    }
    return words;
}

std::string make_snippet(std::string_view content, std::size_t max_words) {
    std::string out;
    std::size_t taken = 0;
    for (auto word : split_words(content)) {
        if (taken == max_words) break;
        if (taken > 0) out.push_back(' ');
        out.append(word);
        ++taken;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_ascii_space(s[b])) ++b;
    while (e > b && is_ascii_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::string_view truncate_utf8(std::string_view s, std::size_t max_bytes) {
    if (s.size() <= max_bytes) return s;
    std::size_t cut = max_bytes;
    while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
    return s.substr(0, cut);
}

}  // namespace skillhub::text
