#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skillhub::text {

/// Splits `input` into lowercase tokens: maximal runs of alphanumeric code
/// points (ASCII letters/digits plus non-ASCII letters). Punctuation, symbols
/// and whitespace separate tokens. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view input);

/// True when `cp` belongs inside a token.
bool is_token_char(char32_t cp);

/// Simple one-to-one lowercase mapping for the scripts the tokenizer folds.
char32_t fold_case(char32_t cp);

/// Decodes one UTF-8 sequence at `pos`, advancing it. Invalid bytes decode
/// to U+FFFD and advance by one.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

/// Splits on ASCII whitespace runs.
std::vector<std::string_view> split_words(std::string_view input);

/// First 100 whitespace-delimited words of `content`, joined by single spaces.
std::string make_snippet(std::string_view content, std::size_t max_words = 100);

std::string_view trim(std::string_view s);

/// Largest prefix of `s` that is at most `max_bytes` long and does not cut a
/// UTF-8 sequence.
std::string_view truncate_utf8(std::string_view s, std::size_t max_bytes);

}  // namespace skillhub::text
