#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "skillhub/errors.hpp"
#include "skillhub/lexical_index.hpp"
#include "skillhub/text.hpp"

using namespace skillhub;
using skillhub::testing::manifest_of;
using skillhub::testing::ToySkill;

namespace {

CorpusManifest five_docs() {
    return manifest_of({
        {"a--jwt-auth", "jwt-auth", "JWT authentication for APIs", "Issue a JWT after auth. Validate every JWT."},
        {"b--oauth", "oauth-login", "OAuth login flows", "Redirect, exchange code, store auth session."},
        {"c--react", "react-testing", "Test React components", "render, screen, userEvent"},
        {"d--api-keys", "api-keys", "Rotate API keys", "keys, rotation, auth headers and jwt fallbacks"},
        {"e--docs", "docs", "Write docs", "auth auth auth everywhere"},
    });
}

std::vector<skillhub::testing::OracleDoc> oracle_docs(const CorpusManifest& m) {
    std::vector<skillhub::testing::OracleDoc> docs;
    for (const auto& r : m.records) {
        skillhub::testing::OracleDoc d;
        d.fields[0] = text::tokenize(r.name);
        d.fields[1] = text::tokenize(r.description);
        d.fields[2] = text::tokenize(r.content);
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace

TEST_CASE("construction") {
    const auto m = manifest_of({{"a--x", "React Testing", "d1", "b"},
                                {"b--y", "react hooks", "d2", "b"},
                                {"c--z", "REACT native", "d3", "b"}});
    const auto index = InvertedIndex::build(m);
    CHECK(index.doc_count() == 3);
    const PostingList* pl = index.postings(Field::name, "react");
    REQUIRE(pl);
    CHECK(pl->docs == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(index.field(Field::name).lengths[0] == 2);
    CHECK(index.field(Field::name).average_length == doctest::Approx(2.0));
    CHECK(index.postings(Field::name, "React") == nullptr);
}

TEST_CASE("empty manifest is an error") {
    CHECK_THROWS_AS(InvertedIndex::build(CorpusManifest{}), InvalidArgument);
}

TEST_CASE("include_content_field=false leaves content out") {
    const auto m = five_docs();
    LexicalConfig cfg;
    cfg.include_content_field = false;
    const auto index = InvertedIndex::build(m, cfg);
    CHECK_FALSE(index.has_field(Field::content));
    CHECK(index.postings(Field::content, "everywhere") == nullptr);
    CHECK(search_keyword(index, "everywhere", 10, cfg).hits.empty());
    CHECK(search_keyword(InvertedIndex::build(m), "everywhere", 10, {}).hits.size() == 1);
}

TEST_CASE("five-doc corpus matches the brute-force evaluator") {
    const auto m = five_docs();
    const auto docs = oracle_docs(m);
    const LexicalConfig cfg;
    const auto index = InvertedIndex::build(m, cfg);
    for (const char* raw : {"jwt auth", "auth", "jwt OR react", "\"jwt authentication\"", "auth*", "auth NOT jwt"}) {
        INFO(raw);
        const QueryAst q = parse_query(raw);
        for (std::uint32_t d = 0; d < docs.size(); ++d) {
            CHECK(std::abs(index.score(d, q, cfg) - skillhub::testing::oracle_bm25(docs, d, q, cfg)) < 1e-9);
        }
    }
}

TEST_CASE("absent term scores zero") {
    const auto index = InvertedIndex::build(five_docs());
    CHECK(index.score(2, parse_query("jwt"), {}) == 0.0);
}

TEST_CASE("name weight 10 vs description weight 5 gives exactly 2x") {
    // Same term, same tf and field length in each doc, and both fields have
    // the same df and average length.
    auto m = manifest_of({{"a--n", "kubernetes tool", "alpha beta", ""}, {"b--d", "alpha beta", "kubernetes tool", ""}});
    for (auto& r : m.records) {
        r.content = "body text";
        r.content_hash = sha256_hex(r.content);
    }
    const auto index = InvertedIndex::build(m);
    const QueryAst q = parse_query("kubernetes");
    const double name_doc = index.score(0, q, {});
    const double desc_doc = index.score(1, q, {});
    REQUIRE(desc_doc > 0);
    CHECK(name_doc == 2.0 * desc_doc);
}

TEST_CASE("keyword scores are negated BM25, best first, ties by skill_id") {
    const auto m = five_docs();
    const auto index = InvertedIndex::build(m);
    const auto docs = oracle_docs(m);
    const QueryAst q = parse_query("auth");
    const RankedList list = index.search(q, 10, {});
    CHECK(list.kind == ScoreKind::keyword);
    CHECK(list.well_ordered());
    const auto want = skillhub::testing::oracle_keyword_ranking(docs, index.skill_ids(), q, {});
    REQUIRE(list.hits.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(list.hits[i].skill_id == want[i].first);
        CHECK(std::abs(list.hits[i].score + want[i].second) < 1e-9);
    }
    for (const auto& hit : list.hits) CHECK(hit.score < 0);
    for (std::size_t i = 1; i < list.hits.size(); ++i) CHECK(list.hits[i - 1].score <= list.hits[i].score);

    const auto top3 = index.search(q, 3, {});
    CHECK(top3.hits.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(top3.hits[i].skill_id == list.hits[i].skill_id);

    CHECK(index.search(parse_query("nothingmatches"), 10, {}).hits.empty());
}

TEST_CASE("tie-break by skill_id") {
    const auto m = manifest_of({{"z--b", "same words", "d", "c"}, {"a--b", "same words", "d", "c2"}});
    const auto list = InvertedIndex::build(m).search(parse_query("same"), 10, {});
    REQUIRE(list.hits.size() == 2);
    CHECK(list.hits[0].score == list.hits[1].score);
    CHECK(list.hits[0].skill_id == "a--b");
}

TEST_CASE("phrases require adjacency within one field") {
    const auto m = manifest_of({{"a--1", "code review", "d", "x"},
                                {"b--2", "review code", "d", "x"},
                                {"c--3", "code", "review", "x"}});
    const auto index = InvertedIndex::build(m);
    CHECK(index.search(parse_query("\"code review\""), 10, {}).ids() == std::vector<std::string>{"a--1"});
    CHECK(index.search(parse_query("code review"), 10, {}).hits.size() == 3);
}

TEST_CASE("boolean filtering") {
    const auto index = InvertedIndex::build(five_docs());
    CHECK(index.search(parse_query("jwt NOT oauth"), 10, {}).hits.size() == 2);
    const auto ids = index.search(parse_query("react OR oauth"), 10, {}).ids();
    CHECK(ids.size() == 2);
    // Negated leaves filter but do not score.
    const auto with_not = index.search(parse_query("auth NOT react"), 10, {});
    const auto plain = index.search(parse_query("auth"), 10, {});
    CHECK(with_not.hits == plain.hits);
    // A purely negative query matches the complement with score 0.
    const auto only_not = index.search(parse_query("NOT auth"), 10, {});
    REQUIRE(only_not.hits.size() == 1);
    CHECK(only_not.hits[0].skill_id == "c--react");
    CHECK(only_not.hits[0].score == 0.0);
}

TEST_CASE("tf monotonicity") {
    const auto base = manifest_of({{"a--1", "deploy", "deploy tools here", "x"}, {"b--2", "other", "d", "x"}});
    const auto more = manifest_of({{"a--1", "deploy", "deploy deploy tools", "x"}, {"b--2", "other", "d", "x"}});
    const QueryAst q = parse_query("deploy");
    CHECK(InvertedIndex::build(more).score(0, q, {}) >= InvertedIndex::build(base).score(0, q, {}));
}

TEST_CASE("random corpora match the oracle") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 40; ++round) {
        auto corpus = skillhub::testing::random_corpus(rng, 1 + rng() % 50);
        LexicalConfig cfg;
        cfg.include_content_field = rng() % 4 != 0;
        const auto index = InvertedIndex::build(corpus.manifest, cfg);
        for (int qi = 0; qi < 5; ++qi) {
            const QueryAst q = skillhub::testing::random_query(rng, corpus.vocabulary);
            INFO(render_query(q));
            for (std::uint32_t d = 0; d < corpus.docs.size(); ++d) {
                const double want = skillhub::testing::oracle_bm25(corpus.docs, d, q, cfg);
                CHECK(std::abs(index.score(d, q, cfg) - want) <= 1e-9 * std::max(1.0, std::abs(want)));
            }
            const auto matches = index.matching_docs(q);
            std::vector<std::uint32_t> want_matches;
            for (std::uint32_t d = 0; d < corpus.docs.size(); ++d) {
                if (skillhub::testing::oracle_matches(corpus.docs, d, q, cfg)) want_matches.push_back(d);
            }
            CHECK(matches == want_matches);
        }
    }
}

TEST_CASE("save and load round trip") {
    skillhub::testing::TempDir dir;
    const auto index = InvertedIndex::build(five_docs());
    index.save(dir / "lex.idx");
    const auto back = InvertedIndex::load(dir / "lex.idx");
    CHECK(back == index);
    CHECK(back.serialize() == index.serialize());
    CHECK(back.search(parse_query("auth"), 10, {}).hits == index.search(parse_query("auth"), 10, {}).hits);

    const std::string bytes = index.serialize();
    CHECK_THROWS_AS(InvertedIndex::deserialize(bytes.substr(0, bytes.size() - 3)), FormatError);
    CHECK_THROWS_AS(InvertedIndex::deserialize("NOTANIDX"), FormatError);
}

TEST_CASE("config validation") {
    LexicalConfig bad;
    bad.k1 = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.b = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.weight_name = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
