#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace skillhub {

/// Which convention a RankedList's scores follow.
///  - keyword:  negated BM25; more negative is better, listed ascending.
///  - semantic: cosine blend; higher is better, listed descending.
///  - rrf:      reciprocal rank fusion; higher is better, listed descending.
enum class ScoreKind { keyword, semantic, rrf };

std::string_view to_string(ScoreKind kind);

struct Hit {
    std::string skill_id;
    double score = 0.0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

struct RankedList {
    ScoreKind kind = ScoreKind::semantic;
    std::vector<Hit> hits;

    std::size_t size() const { return hits.size(); }
    bool empty() const { return hits.empty(); }

    std::vector<std::string> ids() const;

    /// True when hits are unique and ordered per `kind`, ties by skill_id.
    bool well_ordered() const;

    friend bool operator==(const RankedList&, const RankedList&) = default;
};

}  // namespace skillhub
