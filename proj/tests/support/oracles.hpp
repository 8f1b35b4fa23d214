#pragma once

// Brute-force reference implementations used by the tests. They recompute
// everything from raw token lists and rank positions, sharing no code with
// the indexes they check.

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skillhub/corpus.hpp"
#include "skillhub/lexical_index.hpp"
#include "skillhub/query.hpp"

namespace skillhub::testing {

/// Token lists of one document: name, description, content.
struct OracleDoc {
    std::array<std::vector<std::string>, 3> fields;
};

/// Weighted sum of per-field Okapi BM25 over the positive leaves of `query`.
double oracle_bm25(const std::vector<OracleDoc>& docs, std::size_t doc, const QueryAst& query,
                   const LexicalConfig& config);

/// Boolean filter of `query` evaluated directly on the token lists.
bool oracle_matches(const std::vector<OracleDoc>& docs, std::size_t doc, const QueryAst& query,
                    const LexicalConfig& config);

/// (skill_id, bm25) for every matching document, best first, ties by id.
std::vector<std::pair<std::string, double>> oracle_keyword_ranking(const std::vector<OracleDoc>& docs,
                                                                   const std::vector<std::string>& ids,
                                                                   const QueryAst& query,
                                                                   const LexicalConfig& config);

struct OracleList {
    std::vector<std::string> ids;  // best first
    double weight = 0;
};

/// sum_s w_s / (k + rank_s), lists visited in the order given.
std::vector<std::pair<std::string, double>> oracle_rrf(const std::vector<OracleList>& lists, double k);

double oracle_cosine(std::span<const float> a, std::span<const float> b);

/// Random corpus of lowercase words from a small vocabulary, with the token
/// lists kept alongside so the oracle never runs the tokenizer.
struct RandomCorpus {
    CorpusManifest manifest;
    std::vector<OracleDoc> docs;
    std::vector<std::string> vocabulary;
};

RandomCorpus random_corpus(std::mt19937_64& rng, std::size_t docs, std::size_t vocabulary = 24);

/// Random query over `vocabulary`: 1 to 3 leaves, some prefixes and phrases,
/// occasionally OR / NOT.
QueryAst random_query(std::mt19937_64& rng, const std::vector<std::string>& vocabulary);

/// Random AST of depth at most `max_depth` satisfying the node invariants.
QueryAst random_ast(std::mt19937_64& rng, int max_depth);

}  // namespace skillhub::testing
