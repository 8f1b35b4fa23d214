#include "skillhub/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <nlohmann/json.hpp>

#include "skillhub/dense_index.hpp"
#include "skillhub/errors.hpp"
#include "skillhub/lexical_index.hpp"
#include "skillhub/service.hpp"

namespace skillhub {

namespace {

constexpr std::size_t kVocabulary = 8000;

class WordSource {
public:
    explicit WordSource(std::uint64_t seed) : rng_(seed) {
        static constexpr const char* kSyllables[] = {"ka", "to", "re", "mi", "su", "no", "la", "vi", "de", "po",
                                                     "xa", "qu", "br", "el", "an", "or", "is", "un", "ty", "ge"};
        constexpr std::size_t n = std::size(kSyllables);
        words_.reserve(kVocabulary);
        for (std::size_t i = 0; i < kVocabulary; ++i) {
            std::string w;
            std::size_t x = i + n;  // at least two syllables
            while (x > 0) {
                w += kSyllables[x % n];
                x /= n;
            }
            words_.push_back(std::move(w));
        }
        cumulative_.resize(kVocabulary);
        double total = 0.0;
        for (std::size_t r = 0; r < kVocabulary; ++r) {
            total += 1.0 / static_cast<double>(r + 1);
            cumulative_[r] = total;
        }
        for (auto& c : cumulative_) c /= total;
    }

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    const std::string& zipf_word() {
        const double u = uniform();
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto r = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), kVocabulary - 1);
        return words_[r];
    }

    std::string sentence(std::size_t words) {
        std::string out;
        for (std::size_t i = 0; i < words; ++i) {
            if (i) out.push_back(' ');
            out += zipf_word();
        }
        return out;
    }

private:
    std::mt19937_64 rng_;
    std::vector<std::string> words_;
    std::vector<double> cumulative_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

CorpusManifest synthetic_corpus(std::size_t skills, std::uint64_t seed) {
    WordSource words(seed);
    CorpusManifest m;
    m.created_at = "1970-01-01T00:00:00Z";
    m.source_root = "synthetic";
    m.records.reserve(skills);
    for (std::size_t i = 0; i < skills; ++i) {
        char id[64];
        std::snprintf(id, sizeof id, "author%04zu--skill-%06zu", i % 997, i);
        SkillRecord r;
        r.skill_id = id;
        r.name = words.sentence(2 + words.below(2));
        r.description = words.sentence(8 + words.below(13));
        r.content = "# " + r.name + "\n\n" + words.sentence(60 + words.below(91)) + "\n\nref " + std::to_string(i) + "\n";
        r.license = (i % 4 == 0) ? License::apache() : License::mit();
        r.github_stars = static_cast<std::int64_t>(words.below(5000));
        r.content_hash = sha256_hex(r.content);
        m.records.push_back(std::move(r));
    }
    std::sort(m.records.begin(), m.records.end(),
              [](const SkillRecord& a, const SkillRecord& b) { return a.skill_id < b.skill_id; });
    m.counts.scanned = m.counts.kept = static_cast<std::int64_t>(skills);
    return m;
}

BenchmarkReport run_benchmark(const BenchmarkOptions& options) {
    if (options.skills == 0 || options.queries == 0) throw InvalidArgument("benchmark needs skills and queries");
    BenchmarkReport report;
    report.skills = options.skills;
    report.queries = options.queries;

    CorpusManifest manifest = synthetic_corpus(options.skills, options.seed);
    auto provider = std::make_shared<HashEmbeddingProvider>(options.seed, options.dimension);
    SearchSettings settings;

    auto t0 = std::chrono::steady_clock::now();
    InvertedIndex lexical = InvertedIndex::build(manifest, settings.lexical);
    report.lexical_build_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    DenseIndex dense = DenseIndex::build(manifest, *provider, settings.semantic);
    report.dense_build_seconds = seconds_since(t0);
    report.build_seconds = report.lexical_build_seconds + report.dense_build_seconds;

    SkillService service(provider, settings);
    service.install(make_snapshot(std::move(manifest), std::move(lexical), std::move(dense)));

    WordSource words(options.seed ^ 0x5EEDULL);
    std::vector<double> latencies;
    latencies.reserve(options.queries);
    for (std::size_t i = 0; i < options.queries; ++i) {
        std::string q;
        switch (i % 4) {
            case 0: q = words.zipf_word(); break;
            case 1: q = words.sentence(2); break;
            case 2: q = words.zipf_word() + " OR " + words.zipf_word(); break;
            default: q = words.zipf_word().substr(0, 3) + "*"; break;
        }
        QueryParams params{{"q", q}, {"top_k", std::to_string(options.top_k)}};
        const auto start = std::chrono::steady_clock::now();
        const ServiceResponse resp = service.hybrid(params);
        latencies.push_back(seconds_since(start) * 1000.0);
        if (resp.status != 200) throw Error("benchmark query failed: " + resp.body);
    }
    std::sort(latencies.begin(), latencies.end());
    auto quantile = [&](double p) {
        const auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(latencies.size())));
        return latencies[std::min(latencies.size() - 1, idx == 0 ? 0 : idx - 1)];
    };
    report.p50_ms = quantile(0.50);
    report.p95_ms = quantile(0.95);
    report.max_ms = latencies.back();
    return report;
}

std::string BenchmarkReport::render() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "skills              %zu\n"
                  "lexical build       %.2f s\n"
                  "dense build         %.2f s\n"
                  "total build         %.2f s\n"
                  "hybrid queries      %zu\n"
                  "hybrid p50          %.2f ms\n"
                  "hybrid p95          %.2f ms\n"
                  "hybrid max          %.2f ms\n",
                  skills, lexical_build_seconds, dense_build_seconds, build_seconds, queries, p50_ms, p95_ms, max_ms);
    return buf;
}

std::string BenchmarkReport::to_json() const {
    return nlohmann::ordered_json{{"skills", skills},
                                  {"queries", queries},
                                  {"lexical_build_seconds", lexical_build_seconds},
                                  {"dense_build_seconds", dense_build_seconds},
                                  {"build_seconds", build_seconds},
                                  {"hybrid_p50_ms", p50_ms},
                                  {"hybrid_p95_ms", p95_ms},
                                  {"hybrid_max_ms", max_ms}}
        .dump(2);
}

}  // namespace skillhub
