#include "skillhub/embedding.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "skillhub/errors.hpp"
#include "skillhub/text.hpp"

namespace skillhub {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t keyed_hash(std::uint64_t key, std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ splitmix64(key);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(h);
}

constexpr double kNoiseAmplitude = 0.25;
constexpr int kSlotsPerToken = 2;

}  // namespace

HashEmbeddingProvider::HashEmbeddingProvider(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {
    if (dimension == 0) throw InvalidArgument("embedding dimension must be positive");
}

std::vector<float> HashEmbeddingProvider::embed_one(std::string_view text) const {
    std::vector<double> acc(dimension_, 0.0);
    for (const auto& token : text::tokenize(text)) {
        const std::uint64_t h = keyed_hash(seed_, token);
        for (int j = 0; j < kSlotsPerToken; ++j) {
            const std::uint64_t hj = splitmix64(h + static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ULL);
            const double sign = (hj >> 63) ? -1.0 : 1.0;
            acc[hj % dimension_] += sign;
        }
    }
    std::uint64_t state = keyed_hash(seed_ ^ 0xA5A5A5A5A5A5A5A5ULL, text);
    for (std::size_t i = 0; i < dimension_; ++i) {
        state = splitmix64(state);
        const double unit = static_cast<double>(state >> 11) * 0x1.0p-53;  // [0, 1)
        acc[i] += kNoiseAmplitude * (2.0 * unit - 1.0);
    }

    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<float> out(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) {
        out[i] = norm > 0 ? static_cast<float>(acc[i] / norm) : (i == 0 ? 1.0f : 0.0f);
    }
    return out;
}

std::vector<std::vector<float>> HashEmbeddingProvider::embed_batch(const std::vector<std::string>& texts, bool) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

ProviderFingerprint HashEmbeddingProvider::fingerprint() {
    return {"hash-embed-v1:seed=" + std::to_string(seed_), dimension_};
}

std::unique_ptr<EmbeddingProvider> deterministic_test_provider(std::uint64_t seed, std::size_t dimension) {
    return std::make_unique<HashEmbeddingProvider>(seed, dimension);
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, HttpProviderOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (base_url_.rfind("http://", 0) != 0) {
        throw InvalidArgument("provider URL must start with http://: " + base_url_);
    }
    if (options_.attempts < 1) options_.attempts = 1;
}

namespace {

template <typename Call>
nlohmann::json with_retries(const HttpProviderOptions& opts, const std::string& what, Call&& call) {
    auto backoff = opts.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= opts.attempts; ++attempt) {
        httplib::Result res = call();
        if (!res) {
            last_error = httplib::to_string(res.error());
        } else if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw Error(what + " rejected with HTTP " + std::to_string(res->status) + ": " + res->body);
        } else {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(what + " returned malformed JSON: " + e.what());
            }
        }
        if (attempt < opts.attempts) {
            spdlog::warn("{} failed ({}), retrying in {} ms", what, last_error, backoff.count());
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw ProviderError(what + " failed after " + std::to_string(opts.attempts) + " attempts: " + last_error);
}

}  // namespace

std::vector<std::vector<float>> HttpEmbeddingProvider::embed_batch(const std::vector<std::string>& texts,
                                                                   bool is_query) {
    const std::string body = nlohmann::json{{"texts", texts}, {"is_query", is_query}}.dump();
    const auto reply = with_retries(options_, "embedding request to " + base_url_, [&] {
        httplib::Client client(base_url_);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        return client.Post("/embed", body, "application/json");
    });

    std::vector<std::vector<float>> vectors;
    std::size_t dim = 0;
    try {
        vectors = reply.at("vectors").get<std::vector<std::vector<float>>>();
        dim = reply.at("dim").get<std::size_t>();
        std::lock_guard lock(mutex_);
        fingerprint_ = ProviderFingerprint{reply.at("model").get<std::string>(), dim};
    } catch (const nlohmann::json::exception& e) {
        throw Error("embedding response does not follow the protocol: " + std::string(e.what()));
    }
    if (vectors.size() != texts.size()) throw Error("embedding response has the wrong number of vectors");
    for (const auto& v : vectors) {
        if (v.size() != dim) throw DimensionMismatch("embedding response vector length differs from dim");
    }
    return vectors;
}

ProviderFingerprint HttpEmbeddingProvider::fingerprint() {
    {
        std::lock_guard lock(mutex_);
        if (fingerprint_) return *fingerprint_;
    }
    const auto reply = with_retries(options_, "health check of " + base_url_, [&] {
        httplib::Client client(base_url_);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        return client.Get("/health");
    });
    ProviderFingerprint fp;
    try {
        fp = {reply.at("model").get<std::string>(), reply.at("dim").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error("health response does not follow the protocol: " + std::string(e.what()));
    }
    std::lock_guard lock(mutex_);
    fingerprint_ = fp;
    return fp;
}

}  // namespace skillhub
