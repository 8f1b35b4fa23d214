#include "skillhub/fusion.hpp"

#include <algorithm>
#include <unordered_map>

#include "skillhub/errors.hpp"

namespace skillhub {

void FusionConfig::validate() const {
    if (!(rrf_k > 0)) throw InvalidArgument("rrf_k must be positive");
    if (keyword_weight < 0 || semantic_weight < 0) throw InvalidArgument("fusion weights must be non-negative");
    if (keyword_weight == 0 && semantic_weight == 0) throw InvalidArgument("at least one fusion weight must be positive");
    if (candidate_depth == 0) throw InvalidArgument("candidate_depth must be at least 1");
}

RankedList rrf_fuse(std::span<const WeightedList> lists, double rrf_k) {
    if (!(rrf_k > 0)) throw InvalidArgument("rrf_k must be positive");
    bool any_positive = false;
    for (const auto& wl : lists) {
        if (wl.weight < 0) throw InvalidArgument("fusion weights must be non-negative");
        any_positive = any_positive || wl.weight > 0;
    }
    if (!any_positive) throw InvalidArgument("at least one fusion weight must be positive");

    std::unordered_map<std::string_view, double> scores;
    std::vector<std::string_view> order;
    for (const auto& wl : lists) {
        if (wl.weight == 0 || wl.list == nullptr) continue;
        const auto& hits = wl.list->hits;
        for (std::size_t i = 0; i < hits.size(); ++i) {
            const double contribution = wl.weight / (rrf_k + static_cast<double>(i + 1));
            auto [it, inserted] = scores.try_emplace(hits[i].skill_id, 0.0);
            if (inserted) order.push_back(it->first);
            it->second += contribution;
        }
    }

    RankedList out;
    out.kind = ScoreKind::rrf;
    out.hits.reserve(order.size());
    for (auto id : order) out.hits.push_back({std::string(id), scores[id]});
    std::sort(out.hits.begin(), out.hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.skill_id < b.skill_id;
    });
    return out;
}

RankedList rrf_fuse(const RankedList& keyword, const RankedList& semantic, const FusionConfig& config) {
    config.validate();
    const WeightedList lists[] = {{&keyword, config.keyword_weight}, {&semantic, config.semantic_weight}};
    return rrf_fuse(lists, config.rrf_k);
}

HybridResult search_hybrid(const InvertedIndex& lexical, const DenseIndex& dense, std::string_view raw_query,
                           const EmbeddingVector& query_vector, std::size_t top_k, const SearchSettings& settings) {
    settings.fusion.validate();
    if (top_k == 0) throw InvalidArgument("top_k must be at least 1");
    const std::size_t depth = std::max(settings.fusion.candidate_depth, top_k);

    HybridResult result;
    RankedList keyword{ScoreKind::keyword, {}};
    FusionConfig fusion = settings.fusion;
    try {
        keyword = search_keyword(lexical, raw_query, depth, settings.lexical);
    } catch (const QueryParseError& e) {
        result.warning = std::string("keyword leg skipped: ") + e.what();
        fusion.keyword_weight = 0.0;
        if (fusion.semantic_weight == 0.0) fusion.semantic_weight = 1.0;
    }
    const RankedList semantic = dense.search(query_vector, depth, settings.semantic);

    result.list = rrf_fuse(keyword, semantic, fusion);
    if (result.list.hits.size() > top_k) result.list.hits.resize(top_k);
    return result;
}

HybridResult search_hybrid(const InvertedIndex& lexical, const DenseIndex& dense, EmbeddingProvider& provider,
                           std::string_view raw_query, std::size_t top_k, const SearchSettings& settings) {
    auto vectors = embed({std::string(raw_query)}, true, provider, settings.semantic, dense.dimension());
    return search_hybrid(lexical, dense, raw_query, vectors.front(), top_k, settings);
}

}  // namespace skillhub
