#include "skillhub/ranked_list.hpp"

#include <unordered_set>

namespace skillhub {

std::string_view to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::keyword: return "keyword";
        case ScoreKind::semantic: return "semantic";
        case ScoreKind::rrf: return "rrf";
    }
    return "unknown";
}

std::vector<std::string> RankedList::ids() const {
    std::vector<std::string> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.skill_id);
    return out;
}

bool RankedList::well_ordered() const {
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (!seen.insert(hits[i].skill_id).second) return false;
        if (i == 0) continue;
        const Hit& a = hits[i - 1];
        const Hit& b = hits[i];
        const bool better = kind == ScoreKind::keyword ? a.score < b.score : a.score > b.score;
        if (!better && !(a.score == b.score && a.skill_id < b.skill_id)) return false;
    }
    return true;
}

}  // namespace skillhub
