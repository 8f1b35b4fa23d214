#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "skillhub/corpus.hpp"
#include "skillhub/embedding.hpp"
#include "skillhub/ranked_list.hpp"

namespace skillhub {

inline constexpr std::string_view kDefaultInstruction = "Find skills matching this query:";

struct SemanticConfig {
    /// Share of the content similarity in the blended score.
    double content_weight = 0.05;
    std::string instruction_prefix{kDefaultInstruction};
    bool normalize = true;

    void validate() const;
};

struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dimension() const { return values.size(); }
    double norm() const;
};

/// Embeds `texts` through `provider`. Queries are sent as
/// `instruction_prefix + " " + text`; documents go verbatim, cut to the
/// provider's input limit. When `expected_dimension` is set, a mismatch
/// throws DimensionMismatch.
std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts, bool is_query, EmbeddingProvider& provider,
                                   const SemanticConfig& config,
                                   std::optional<std::size_t> expected_dimension = std::nullopt);

/// Text embedded for a skill's metadata representation.
std::string metadata_text(const SkillRecord& record);

/// Two ordinal-aligned embedding matrices (metadata, full content), scanned
/// exhaustively at query time. Immutable after build.
class DenseIndex {
public:
    static DenseIndex build(const CorpusManifest& manifest, EmbeddingProvider& provider, const SemanticConfig& config,
                            std::size_t batch_size = 64);

    /// Rows are row-major, `ids.size() * dimension` floats per matrix.
    static DenseIndex from_matrices(std::vector<std::string> ids, std::size_t dimension, std::vector<float> meta,
                                    std::vector<float> content, ProviderFingerprint fingerprint, bool normalized);

    std::size_t size() const { return ids_.size(); }
    std::size_t dimension() const { return dimension_; }
    bool normalized() const { return normalized_; }
    const ProviderFingerprint& fingerprint() const { return fingerprint_; }
    const std::vector<std::string>& skill_ids() const { return ids_; }
    std::optional<std::uint32_t> ordinal_of(const std::string& skill_id) const;

    std::span<const float> meta_row(std::size_t ordinal) const;
    std::span<const float> content_row(std::size_t ordinal) const;

    double meta_cosine(std::size_t ordinal, const EmbeddingVector& query) const;
    double content_cosine(std::size_t ordinal, const EmbeddingVector& query) const;

    /// (1 - w) * cos(query, meta) + w * cos(query, content), best first, ties by
    /// skill_id.
    RankedList search(const EmbeddingVector& query, std::size_t top_k, const SemanticConfig& config) const;

    void save(const std::filesystem::path& path) const;
    std::string serialize() const;
    static DenseIndex load(const std::filesystem::path& path);
    static DenseIndex deserialize(std::string_view bytes);

    friend bool operator==(const DenseIndex&, const DenseIndex&);

private:
    void finalize();

    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> ordinals_;
    std::size_t dimension_ = 0;
    std::vector<float> meta_;
    std::vector<float> content_;
    std::vector<double> meta_norms_;
    std::vector<double> content_norms_;
    ProviderFingerprint fingerprint_;
    bool normalized_ = true;
};

RankedList search_semantic(const DenseIndex& index, const EmbeddingVector& query, std::size_t top_k,
                           const SemanticConfig& config);

}  // namespace skillhub
