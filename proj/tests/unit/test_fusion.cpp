#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "skillhub/errors.hpp"
#include "skillhub/fusion.hpp"

using namespace skillhub;
using skillhub::testing::OracleList;

namespace {

RankedList list_of(ScoreKind kind, const std::vector<std::string>& ids) {
    RankedList l{kind, {}};
    double s = 1.0;
    for (const auto& id : ids) l.hits.push_back({id, kind == ScoreKind::keyword ? -(s -= 0.01) - 1 : (s -= 0.01)});
    return l;
}

double score_of(const RankedList& l, const std::string& id) {
    for (const auto& h : l.hits) {
        if (h.skill_id == id) return h.score;
    }
    return 0.0;
}

std::vector<std::string> random_ids(std::mt19937_64& rng, std::size_t n, std::size_t universe) {
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < universe; ++i) pool.push_back("s--" + std::to_string(i));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(n, universe));
    return pool;
}

}  // namespace

TEST_CASE("rank one in both lists scores 1/61") {
    const auto kw = list_of(ScoreKind::keyword, {"a--x", "b--y"});
    const auto sem = list_of(ScoreKind::semantic, {"a--x", "c--z"});
    const auto fused = rrf_fuse(kw, sem, FusionConfig{});
    CHECK(fused.kind == ScoreKind::rrf);
    REQUIRE(fused.hits[0].skill_id == "a--x");
    CHECK(fused.hits[0].score == doctest::Approx(1.0 / 61).epsilon(1e-15));
    CHECK(std::abs(fused.hits[0].score - 0.0163934) < 1e-7);
}

TEST_CASE("rank three in one list scores 0.5/63") {
    const auto kw = list_of(ScoreKind::keyword, {"a--1", "a--2", "a--3"});
    const auto sem = list_of(ScoreKind::semantic, {"b--1"});
    const auto fused = rrf_fuse(kw, sem, FusionConfig{});
    CHECK(score_of(fused, "a--3") == doctest::Approx(0.5 / 63).epsilon(1e-15));
    CHECK(std::abs(score_of(fused, "a--3") - 0.0079365) < 1e-7);
}

TEST_CASE("mirrored ranks tie and fall back to skill_id") {
    const auto kw = list_of(ScoreKind::keyword, {"m--b", "m--a"});
    const auto sem = list_of(ScoreKind::semantic, {"m--a", "m--b"});
    const auto fused = rrf_fuse(kw, sem, FusionConfig{});
    REQUIRE(fused.hits.size() == 2);
    CHECK(fused.hits[0].score == fused.hits[1].score);
    CHECK(fused.hits[0].skill_id == "m--a");
}

TEST_CASE("zero weight contributes nothing, not even membership") {
    const auto kw = list_of(ScoreKind::keyword, {"k--only", "both--x"});
    const auto sem = list_of(ScoreKind::semantic, {"both--x", "s--only"});
    FusionConfig cfg;
    cfg.keyword_weight = 0;
    cfg.semantic_weight = 1;
    const auto fused = rrf_fuse(kw, sem, cfg);
    CHECK(fused.ids() == sem.ids());

    cfg.semantic_weight = 0;
    CHECK_THROWS_AS(rrf_fuse(kw, sem, cfg), InvalidArgument);
    cfg = {};
    cfg.keyword_weight = -0.1;
    CHECK_THROWS_AS(rrf_fuse(kw, sem, cfg), InvalidArgument);
}

TEST_CASE("random pairs match the oracle exactly") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_ids(rng, 20, 30);
        const auto b = random_ids(rng, 20, 30);
        const double wa = weight(rng), wb = weight(rng);
        const auto kw = list_of(ScoreKind::keyword, a);
        const auto sem = list_of(ScoreKind::semantic, b);
        const WeightedList lists[] = {{&kw, wa}, {&sem, wb}};
        const auto got = rrf_fuse(lists, 60.0);
        const auto want = skillhub::testing::oracle_rrf({{a, wa}, {b, wb}}, 60.0);
        REQUIRE(got.hits.size() == want.size());
        for (std::size_t j = 0; j < want.size(); ++j) {
            CHECK(got.hits[j].skill_id == want[j].first);
            CHECK(got.hits[j].score == want[j].second);
        }
    }
}

TEST_CASE("rank monotonicity and upper bound") {
    std::mt19937_64 rng(8);
    const FusionConfig cfg;
    for (int i = 0; i < 100; ++i) {
        auto a = random_ids(rng, 15, 20);
        const auto b = random_ids(rng, 15, 20);
        const std::size_t pos = 1 + rng() % (a.size() - 1);
        const std::string target = a[pos];
        const double before = score_of(rrf_fuse(list_of(ScoreKind::keyword, a), list_of(ScoreKind::semantic, b), cfg), target);
        std::swap(a[pos], a[pos - 1]);
        const auto fused = rrf_fuse(list_of(ScoreKind::keyword, a), list_of(ScoreKind::semantic, b), cfg);
        CHECK(score_of(fused, target) >= before);
        for (const auto& h : fused.hits) CHECK(h.score <= (cfg.keyword_weight + cfg.semantic_weight) / (cfg.rrf_k + 1));
    }
}

TEST_CASE("hybrid on the docker toy corpus equals a hand fold of the two legs") {
    HashEmbeddingProvider provider(17);
    const auto m = skillhub::testing::docker_toy_manifest();
    const SearchSettings settings;
    const auto lexical = InvertedIndex::build(m, settings.lexical);
    const auto dense = DenseIndex::build(m, provider, settings.semantic);
    const std::string q = "docker deploy";
    const auto qv = embed({q}, true, provider, settings.semantic)[0];

    const auto kw = search_keyword(lexical, q, 100, settings.lexical);
    const auto sem = search_semantic(dense, qv, 100, settings.semantic);
    const auto want = skillhub::testing::oracle_rrf({{kw.ids(), 0.5}, {sem.ids(), 0.5}}, 60.0);

    const auto got = search_hybrid(lexical, dense, provider, q, 3, settings);
    CHECK_FALSE(got.warning);
    REQUIRE(got.list.hits.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(got.list.hits[i].skill_id == want[i].first);
        CHECK(got.list.hits[i].score == want[i].second);
    }
    // The keyword leg requires both terms, so only docs with "docker" and "deploy" appear there.
    CHECK(kw.ids() == std::vector<std::string>{"ops--docker-deploy"});
}

TEST_CASE("keyword weight 0 reproduces the semantic order") {
    HashEmbeddingProvider provider(17);
    const auto m = skillhub::testing::docker_toy_manifest();
    SearchSettings settings;
    settings.fusion.keyword_weight = 0;
    settings.fusion.semantic_weight = 1;
    const auto lexical = InvertedIndex::build(m);
    const auto dense = DenseIndex::build(m, provider, {});
    const auto qv = embed({"docker"}, true, provider, {})[0];
    const auto got = search_hybrid(lexical, dense, "docker", qv, 8, settings);
    CHECK(got.list.ids() == search_semantic(dense, qv, 8, {}).ids());
}

TEST_CASE("unparseable keyword query degrades to semantic only") {
    HashEmbeddingProvider provider(17);
    const auto m = skillhub::testing::docker_toy_manifest();
    const auto lexical = InvertedIndex::build(m);
    const auto dense = DenseIndex::build(m, provider, {});
    const std::string q = "\"docker deploy";
    const auto qv = embed({q}, true, provider, {})[0];
    const auto got = search_hybrid(lexical, dense, q, qv, 5, SearchSettings{});
    REQUIRE(got.warning);
    CHECK(got.list.ids() == search_semantic(dense, qv, 5, {}).ids());
    CHECK(got.list.hits[0].score == doctest::Approx(0.5 / 61));
}

TEST_CASE("candidate depth caps each leg") {
    HashEmbeddingProvider provider(17);
    const auto m = skillhub::testing::docker_toy_manifest();
    SearchSettings settings;
    settings.fusion.candidate_depth = 2;
    const auto lexical = InvertedIndex::build(m);
    const auto dense = DenseIndex::build(m, provider, {});
    const auto qv = embed({"docker"}, true, provider, {})[0];
    // top_k above the depth lifts the depth to top_k.
    CHECK(search_hybrid(lexical, dense, "docker", qv, 1, settings).list.hits.size() == 1);
    const auto wide = search_hybrid(lexical, dense, "docker", qv, 6, settings);
    CHECK(wide.list.hits.size() == 6);
}
