#include <doctest.h>

#include <string>
#include <vector>

#include "skillhub/text.hpp"

using skillhub::text::make_snippet;
using skillhub::text::split_words;
using skillhub::text::tokenize;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize lowercases and splits on punctuation") {
    CHECK(tokenize("React Testing") == Tokens{"react", "testing"});
    CHECK(tokenize("implement+authentication+JWT") == Tokens{"implement", "authentication", "jwt"});
    CHECK(tokenize("k8s/helm-v3, (beta)") == Tokens{"k8s", "helm", "v3", "beta"});
    CHECK(tokenize("snake_case") == Tokens{"snake", "case"});
    CHECK(tokenize("  ...  ").empty());
    CHECK(tokenize("").empty());
}

TEST_CASE("tokenize folds non-ASCII letters and keeps them inside tokens") {
    CHECK(tokenize("Café ÜBER naïve") == Tokens{"café", "über", "naïve"});
    CHECK(tokenize("ΑΘΗΝΑ Москва") == Tokens{"αθηνα", "москва"});
    CHECK(tokenize("ＡＢＣ") == Tokens{"ａｂｃ"});
}

TEST_CASE("snippet keeps the first 100 words") {
    std::string doc;
    for (int i = 0; i < 250; ++i) doc += "w" + std::to_string(i) + (i % 7 == 0 ? "\n\n" : " ");
    const std::string s = make_snippet(doc);
    CHECK(split_words(s).size() == 100);
    CHECK(s.rfind("w0 w1 w2", 0) == 0);
    CHECK(s.substr(s.size() - 3) == "w99");
}

TEST_CASE("snippet of short and irregular input") {
    CHECK(make_snippet("one two three four five six seven") == "one two three four five six seven");
    CHECK(make_snippet("a  b\nc") == "a b c");
    CHECK(make_snippet("") == "");
    CHECK(make_snippet("**bold** `code` [link](x)") == "**bold** `code` [link](x)");
}

TEST_CASE("snippet is a prefix of the word sequence") {
    const std::string doc = "\t# Title\r\n\nsome  words\there ";
    const auto all = split_words(doc);
    for (std::size_t k = 0; k <= all.size() + 1; ++k) {
        const std::string snippet = make_snippet(doc, k);
        const auto got = split_words(snippet);
        REQUIRE(got.size() == std::min(k, all.size()));
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == all[i]);
    }
}

TEST_CASE("truncate_utf8 never splits a sequence") {
    const std::string s = "aé€😀";  // 1 + 2 + 3 + 4 bytes
    CHECK(skillhub::text::truncate_utf8(s, 100) == s);
    CHECK(skillhub::text::truncate_utf8(s, 2) == "a");
    CHECK(skillhub::text::truncate_utf8(s, 3) == "aé");
    CHECK(skillhub::text::truncate_utf8(s, 9) == "aé€");
    CHECK(skillhub::text::truncate_utf8(s, 0) == "");
}

TEST_CASE("trim") {
    CHECK(skillhub::text::trim("  x y \n") == "x y");
    CHECK(skillhub::text::trim(" \t ") == "");
}
