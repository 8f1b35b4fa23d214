#include "skillhub/query.hpp"

#include <optional>

#include "skillhub/errors.hpp"
#include "skillhub/text.hpp"

namespace skillhub {

QueryAst QueryAst::term(std::string text) { return {Kind::term, {std::move(text)}, {}}; }
QueryAst QueryAst::prefix(std::string stem) { return {Kind::prefix, {std::move(stem)}, {}}; }
QueryAst QueryAst::phrase(std::vector<std::string> terms) { return {Kind::phrase, std::move(terms), {}}; }
QueryAst QueryAst::all_of(std::vector<QueryAst> children) { return {Kind::and_, {}, std::move(children)}; }
QueryAst QueryAst::any_of(std::vector<QueryAst> children) { return {Kind::or_, {}, std::move(children)}; }
QueryAst QueryAst::negate(QueryAst child) {
    QueryAst n{Kind::not_, {}, {}};
    n.children.push_back(std::move(child));
    return n;
}

namespace {

struct Token {
    enum class Type { atom, and_op, or_op, not_op, lparen, rparen };
    Type type;
    std::size_t offset;  // byte offset into the raw query
    std::optional<QueryAst> leaf;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class Parser {
public:
    explicit Parser(std::string_view raw) : raw_(raw) { lex(); }

    QueryAst parse() {
        if (tokens_.empty()) throw error("empty query", 0);
        QueryAst ast = parse_or();
        if (pos_ < tokens_.size()) {
            const Token& t = tokens_[pos_];
            if (t.type == Token::Type::rparen) throw error("unbalanced ')'", t.offset);
            throw error("unexpected operator", t.offset);
        }
        return ast;
    }

private:
    QueryParseError error(const std::string& what, std::size_t byte_offset) const {
        // Report code-point offsets so multibyte input lines up with what a user sees.
        std::size_t chars = 0;
        std::size_t p = 0;
        while (p < byte_offset && p < raw_.size()) {
            text::decode_utf8(raw_, p);
            ++chars;
        }
        return QueryParseError(what, chars);
    }

    void lex() {
        std::size_t i = 0;
        while (i < raw_.size()) {
            const char c = raw_[i];
            if (is_space(c)) {
                ++i;
            } else if (c == '(') {
                tokens_.push_back({Token::Type::lparen, i, std::nullopt});
                ++i;
            } else if (c == ')') {
                tokens_.push_back({Token::Type::rparen, i, std::nullopt});
                ++i;
            } else if (c == '"') {
                const auto close = raw_.find('"', i + 1);
                if (close == std::string_view::npos) throw error("unbalanced quote", i);
                auto terms = text::tokenize(raw_.substr(i + 1, close - i - 1));
                if (terms.empty()) throw error("empty phrase", i);
                tokens_.push_back({Token::Type::atom, i, QueryAst::phrase(std::move(terms))});
                i = close + 1;
            } else {
                const std::size_t start = i;
                while (i < raw_.size() && !is_space(raw_[i]) && raw_[i] != '(' && raw_[i] != ')' && raw_[i] != '"') {
                    ++i;
                }
                lex_word(raw_.substr(start, i - start), start);
            }
        }
    }

    void lex_word(std::string_view word, std::size_t offset) {
        if (word == "AND") return tokens_.push_back({Token::Type::and_op, offset, std::nullopt});
        if (word == "OR") return tokens_.push_back({Token::Type::or_op, offset, std::nullopt});
        if (word == "NOT") return tokens_.push_back({Token::Type::not_op, offset, std::nullopt});

        bool prefix = false;
        while (!word.empty() && word.back() == '*') {
            word.remove_suffix(1);
            prefix = true;
        }
        auto terms = text::tokenize(word);
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const bool last = k + 1 == terms.size();
            tokens_.push_back({Token::Type::atom, offset,
                               (prefix && last) ? QueryAst::prefix(std::move(terms[k]))
                                                : QueryAst::term(std::move(terms[k]))});
        }
    }

    bool at(Token::Type type) const { return pos_ < tokens_.size() && tokens_[pos_].type == type; }

    bool starts_unary() const {
        return at(Token::Type::atom) || at(Token::Type::not_op) || at(Token::Type::lparen);
    }

    QueryAst parse_or() {
        std::vector<QueryAst> parts;
        parts.push_back(parse_and());
        while (at(Token::Type::or_op)) {
            ++pos_;
            parts.push_back(parse_and());
        }
        if (parts.size() == 1) return std::move(parts.front());
        return QueryAst::any_of(std::move(parts));
    }

    QueryAst parse_and() {
        std::vector<QueryAst> parts;
        parts.push_back(parse_unary());
        for (;;) {
            if (at(Token::Type::and_op)) {
                ++pos_;
                parts.push_back(parse_unary());
            } else if (starts_unary()) {
                parts.push_back(parse_unary());
            } else {
                break;
            }
        }
        if (parts.size() == 1) return std::move(parts.front());
        return QueryAst::all_of(std::move(parts));
    }

    QueryAst parse_unary() {
        if (at(Token::Type::not_op)) {
            ++pos_;
            return QueryAst::negate(parse_unary());
        }
        return parse_atom();
    }

    QueryAst parse_atom() {
        if (pos_ >= tokens_.size()) throw error("expected a term", raw_.size());
        Token& t = tokens_[pos_];
        switch (t.type) {
            case Token::Type::atom:
                ++pos_;
                return std::move(*t.leaf);
            case Token::Type::lparen: {
                ++pos_;
                QueryAst inner = parse_or();
                if (!at(Token::Type::rparen)) {
                    if (pos_ >= tokens_.size()) throw error("unbalanced '('", t.offset);
                    throw error("expected ')'", tokens_[pos_].offset);
                }
                ++pos_;
                return inner;
            }
            case Token::Type::rparen: throw error("unbalanced ')'", t.offset);
            default: throw error("expected a term", t.offset);
        }
    }

    std::string_view raw_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

QueryAst parse_query(std::string_view raw) { return Parser(raw).parse(); }

std::string render_query(const QueryAst& ast) {
    using K = QueryAst::Kind;
    auto grouped = [](const QueryAst& child, bool wrap) {
        std::string s = render_query(child);
        return wrap ? "(" + s + ")" : s;
    };
    switch (ast.kind) {
        case K::term: return ast.terms.front();
        case K::prefix: return ast.terms.front() + "*";
        case K::phrase: return "\"" + join(ast.terms, " ") + "\"";
        case K::and_: {
            std::vector<std::string> parts;
            for (const auto& c : ast.children) parts.push_back(grouped(c, c.kind == K::and_ || c.kind == K::or_));
            return join(parts, " ");
        }
        case K::or_: {
            std::vector<std::string> parts;
            for (const auto& c : ast.children) parts.push_back(grouped(c, c.kind == K::or_));
            return join(parts, " OR ");
        }
        case K::not_: {
            const auto& c = ast.children.front();
            return "NOT " + grouped(c, c.kind == K::and_ || c.kind == K::or_);
        }
    }
    return {};
}

std::string describe_query(const QueryAst& ast) {
    using K = QueryAst::Kind;
    auto list = [](const std::vector<QueryAst>& children) {
        std::vector<std::string> parts;
        for (const auto& c : children) parts.push_back(describe_query(c));
        return join(parts, ", ");
    };
    switch (ast.kind) {
        case K::term: return "Term(" + ast.terms.front() + ")";
        case K::prefix: return "Prefix(" + ast.terms.front() + ")";
        case K::phrase: return "Phrase(" + join(ast.terms, ", ") + ")";
        case K::and_: return "And(" + list(ast.children) + ")";
        case K::or_: return "Or(" + list(ast.children) + ")";
        case K::not_: return "Not(" + list(ast.children) + ")";
    }
    return {};
}

}  // namespace skillhub
