#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace skillhub {

/// Identifies the model behind a set of vectors.
struct ProviderFingerprint {
    std::string model;
    std::size_t dimension = 0;

    friend bool operator==(const ProviderFingerprint&, const ProviderFingerprint&) = default;
};

/// Source of embedding vectors. Implementations receive texts exactly as they
/// should be embedded; instruction prefixes are added by the caller.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::vector<std::vector<float>> embed_batch(const std::vector<std::string>& texts, bool is_query) = 0;
    virtual ProviderFingerprint fingerprint() = 0;

    /// Longest document text, in bytes, the provider accepts. 0 means no limit.
    virtual std::size_t max_input_bytes() const { return 0; }
};

/// Offline provider for tests and benchmarks.
///
/// Each text maps to a unit vector built from signed feature hashing of its
/// tokens plus a small text-specific component, all derived from 64-bit
/// FNV-1a/SplitMix64 hashes keyed by `seed`. Output depends only on (seed,
/// dimension, text bytes), so it is reproducible across platforms.
class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::uint64_t seed = 0, std::size_t dimension = 64);

    std::vector<std::vector<float>> embed_batch(const std::vector<std::string>& texts, bool is_query) override;
    ProviderFingerprint fingerprint() override;

    std::vector<float> embed_one(std::string_view text) const;

private:
    std::uint64_t seed_;
    std::size_t dimension_;
};

std::unique_ptr<EmbeddingProvider> deterministic_test_provider(std::uint64_t seed, std::size_t dimension = 64);

struct HttpProviderOptions {
    std::chrono::milliseconds timeout{30000};
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::size_t max_input_bytes = 32768;
};

/// Client for the `/embed` wire protocol:
///   POST /embed {"texts": [...], "is_query": bool}
///     -> {"vectors": [[...]], "dim": int, "model": string}
/// Connection failures and 5xx answers are retried with exponential backoff,
/// then surface as ProviderError.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(std::string base_url, HttpProviderOptions options = {});

    std::vector<std::vector<float>> embed_batch(const std::vector<std::string>& texts, bool is_query) override;
    ProviderFingerprint fingerprint() override;
    std::size_t max_input_bytes() const override { return options_.max_input_bytes; }

private:
    std::string base_url_;
    HttpProviderOptions options_;
    std::mutex mutex_;
    std::optional<ProviderFingerprint> fingerprint_;
};

}  // namespace skillhub
