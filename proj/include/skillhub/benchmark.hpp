#pragma once

#include <cstdint>
#include <string>

#include "skillhub/corpus.hpp"

namespace skillhub {

/// Synthetic corpus with Zipf-distributed pseudo-words in every field.
CorpusManifest synthetic_corpus(std::size_t skills, std::uint64_t seed);

struct BenchmarkOptions {
    std::size_t skills = 34198;
    std::size_t queries = 200;
    std::size_t top_k = 10;
    std::size_t dimension = 64;
    std::uint64_t seed = 42;
};

struct BenchmarkReport {
    std::size_t skills = 0;
    std::size_t queries = 0;
    double lexical_build_seconds = 0;
    double dense_build_seconds = 0;
    double build_seconds = 0;  // lexical + dense
    double p50_ms = 0;
    double p95_ms = 0;
    double max_ms = 0;

    std::string render() const;
    std::string to_json() const;
};

/// Builds both indexes over a synthetic corpus with the hash provider and
/// times /hybrid requests end to end through the request handler.
BenchmarkReport run_benchmark(const BenchmarkOptions& options);

}  // namespace skillhub
