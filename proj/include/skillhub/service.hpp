#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skillhub/corpus.hpp"
#include "skillhub/dense_index.hpp"
#include "skillhub/embedding.hpp"
#include "skillhub/fusion.hpp"
#include "skillhub/lexical_index.hpp"

namespace skillhub {

inline constexpr int kDefaultPort = 8742;
inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr std::size_t kMaxTopK = 100;

/// Everything a request reads. Built once, never mutated.
struct IndexSnapshot {
    CorpusManifest manifest;
    InvertedIndex lexical;
    DenseIndex dense;

    /// Throws unless all three cover the same skill_ids in the same order.
    void check_consistent() const;
};

std::shared_ptr<const IndexSnapshot> make_snapshot(CorpusManifest manifest, InvertedIndex lexical, DenseIndex dense);

struct ServiceResponse {
    int status = 200;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// Request handlers for the search API, independent of the HTTP transport.
/// Responses are JSON; errors carry {"error": message}.
class SkillService {
public:
    SkillService(std::shared_ptr<EmbeddingProvider> provider, SearchSettings settings = {});

    /// Swaps in a new snapshot; requests already running keep the old one.
    /// Throws DimensionMismatch when the provider disagrees with the vectors.
    void install(std::shared_ptr<const IndexSnapshot> snapshot);
    std::shared_ptr<const IndexSnapshot> snapshot() const;

    const SearchSettings& settings() const { return settings_; }

    ServiceResponse keyword(const QueryParams& params) const;
    ServiceResponse semantic(const QueryParams& params) const;
    ServiceResponse hybrid(const QueryParams& params) const;
    /// `skill_id` arrives already URL-decoded.
    ServiceResponse detail(std::string_view skill_id) const;

private:
    std::shared_ptr<EmbeddingProvider> provider_;
    SearchSettings settings_;
    mutable std::mutex mutex_;
    std::shared_ptr<const IndexSnapshot> snapshot_;
};

/// JSON array of hit objects: name, description, skill_md_snippet, skill_id,
/// github_stars and either score or rrf_score.
std::string render_hits(const IndexSnapshot& snapshot, const RankedList& list);
std::string render_detail(const SkillRecord& record);

/// Text of SKILL.md without its YAML front-matter block.
std::string_view strip_front_matter(std::string_view skill_md);

/// HTTP/1.1 transport for SkillService: GET /keyword, /semantic, /hybrid,
/// /detail/{skill_id}.
class SkillServer {
public:
    explicit SkillServer(const SkillService& service);
    ~SkillServer();
    SkillServer(const SkillServer&) = delete;
    SkillServer& operator=(const SkillServer&) = delete;

    /// Blocks until stop(). Returns false when the socket cannot be bound.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it (or -1), serve with listen_after_bind().
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace skillhub
