#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "skillhub/dense_index.hpp"
#include "skillhub/lexical_index.hpp"
#include "skillhub/ranked_list.hpp"

namespace skillhub {

struct FusionConfig {
    double rrf_k = 60.0;
    double keyword_weight = 0.5;
    double semantic_weight = 0.5;
    /// Hits pulled from each leg before fusing.
    std::size_t candidate_depth = 100;

    /// Throws InvalidArgument for rrf_k <= 0, a negative weight, or both
    /// weights zero.
    void validate() const;
};

struct WeightedList {
    const RankedList* list = nullptr;
    double weight = 0.0;
};

/// Reciprocal rank fusion: score(s) = sum over lists containing s of
/// weight / (rrf_k + rank), with 1-based ranks. Lists with zero weight
/// contribute nothing, not even membership. Output is best first, ties by
/// skill_id.
RankedList rrf_fuse(std::span<const WeightedList> lists, double rrf_k);
RankedList rrf_fuse(const RankedList& keyword, const RankedList& semantic, const FusionConfig& config);

struct SearchSettings {
    LexicalConfig lexical;
    SemanticConfig semantic;
    FusionConfig fusion;
};

struct HybridResult {
    RankedList list;
    /// Set when the keyword leg was dropped because the query did not parse.
    std::optional<std::string> warning;
};

/// Runs both legs to candidate_depth, fuses, truncates to top_k.
HybridResult search_hybrid(const InvertedIndex& lexical, const DenseIndex& dense, std::string_view raw_query,
                           const EmbeddingVector& query_vector, std::size_t top_k, const SearchSettings& settings);

/// Same, embedding `raw_query` through `provider` first.
HybridResult search_hybrid(const InvertedIndex& lexical, const DenseIndex& dense, EmbeddingProvider& provider,
                           std::string_view raw_query, std::size_t top_k, const SearchSettings& settings);

}  // namespace skillhub
