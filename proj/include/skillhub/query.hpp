#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace skillhub {

/// Parsed keyword query.
///
/// Leaves carry their lowercase terms: a Term or Prefix holds exactly one
/// entry in `terms`, a Phrase holds one or more. And/Or hold two or more
/// `children`, Not holds exactly one.
struct QueryAst {
    enum class Kind { term, prefix, phrase, and_, or_, not_ };

    Kind kind = Kind::term;
    std::vector<std::string> terms;
    std::vector<QueryAst> children;

    static QueryAst term(std::string text);
    static QueryAst prefix(std::string stem);
    static QueryAst phrase(std::vector<std::string> terms);
    static QueryAst all_of(std::vector<QueryAst> children);
    static QueryAst any_of(std::vector<QueryAst> children);
    static QueryAst negate(QueryAst child);

    bool is_leaf() const { return kind == Kind::term || kind == Kind::prefix || kind == Kind::phrase; }

    friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

/// Parses the keyword search syntax:
///
///   query    := or_expr
///   or_expr  := and_expr ("OR" and_expr)*
///   and_expr := unary (("AND")? unary)*
///   unary    := "NOT" unary | atom
///   atom     := "\"" words "\"" | word "*" | word | "(" or_expr ")"
///
/// Operators are case-sensitive. Bare words are split into terms on
/// punctuation; adjacent atoms are implicitly AND-ed. Throws QueryParseError.
QueryAst parse_query(std::string_view raw);

/// Canonical text that parses back to the same tree.
std::string render_query(const QueryAst& ast);

/// Debug form, e.g. `Or(Term(react), Prefix(vue))`.
std::string describe_query(const QueryAst& ast);

}  // namespace skillhub
