#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skillhub/corpus.hpp"
#include "skillhub/query.hpp"
#include "skillhub/ranked_list.hpp"

namespace skillhub {

enum class Field : std::uint8_t { name = 0, description = 1, content = 2 };
inline constexpr std::array<Field, 3> kAllFields{Field::name, Field::description, Field::content};

std::string_view to_string(Field field);

/// BM25 parameters and per-field weights. The weighted sum of per-field BM25
/// scores is the document score.
struct LexicalConfig {
    double weight_name = 10.0;
    double weight_description = 5.0;
    double weight_content = 5.0;
    double k1 = 1.2;
    double b = 0.75;
    bool include_content_field = true;

    double weight(Field field) const;

    /// Throws InvalidArgument when a weight is negative, k1 <= 0 or b is
    /// outside [0, 1].
    void validate() const;
};

/// Postings for one term in one field, sorted by document ordinal. The
/// positions of document `docs[i]` occupy `tfs[i]` consecutive entries of
/// `positions`, in document order.
struct PostingList {
    std::vector<std::uint32_t> docs;
    std::vector<std::uint32_t> tfs;
    std::vector<std::uint32_t> positions;
};

struct FieldIndex {
    std::map<std::string, PostingList, std::less<>> terms;
    std::vector<std::uint32_t> lengths;  // tokens per document
    double average_length = 0.0;
};

/// Field-weighted inverted index over name, description and (optionally)
/// SKILL.md content. Immutable after build.
class InvertedIndex {
public:
    static InvertedIndex build(const CorpusManifest& manifest, const LexicalConfig& config = {});

    std::size_t doc_count() const { return skill_ids_.size(); }
    const std::string& skill_id(std::uint32_t ordinal) const { return skill_ids_.at(ordinal); }
    std::optional<std::uint32_t> ordinal_of(std::string_view skill_id) const;
    const std::vector<std::string>& skill_ids() const { return skill_ids_; }

    bool has_field(Field field) const { return fields_[static_cast<std::size_t>(field)].has_value(); }
    /// Throws InvalidArgument when the field was not indexed.
    const FieldIndex& field(Field field) const;
    const PostingList* postings(Field field, std::string_view term) const;

    /// Weighted BM25 of one document for the positive leaves of `query`. The
    /// boolean structure of the query is not applied here.
    double score(std::uint32_t ordinal, const QueryAst& query, const LexicalConfig& config) const;

    /// Ordinals satisfying the boolean structure of `query`, ascending.
    std::vector<std::uint32_t> matching_docs(const QueryAst& query) const;

    /// Matching documents ordered by BM25 descending (ties by skill_id). Hit
    /// scores are negated BM25, so the best hit has the most negative score.
    RankedList search(const QueryAst& query, std::size_t top_k, const LexicalConfig& config) const;

    void save(const std::filesystem::path& path) const;
    std::string serialize() const;
    static InvertedIndex load(const std::filesystem::path& path);
    static InvertedIndex deserialize(std::string_view bytes);

    friend bool operator==(const InvertedIndex& a, const InvertedIndex& b);

private:
    void finalize();

    std::vector<std::string> skill_ids_;
    std::unordered_map<std::string, std::uint32_t> ordinals_;
    std::array<std::optional<FieldIndex>, 3> fields_;
};

/// Convenience wrapper: parse + search. Propagates QueryParseError.
RankedList search_keyword(const InvertedIndex& index, std::string_view raw_query, std::size_t top_k,
                          const LexicalConfig& config);

}  // namespace skillhub
