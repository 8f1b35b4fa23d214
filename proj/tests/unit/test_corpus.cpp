#include <doctest.h>

#include <algorithm>
#include <string>

#include "fixtures.hpp"
#include "skillhub/corpus.hpp"
#include "skillhub/errors.hpp"

using namespace skillhub;
using skillhub::testing::TempDir;
using skillhub::testing::skill_md;
using skillhub::testing::write_skill;

namespace {

CorpusManifest ingest_fixture(const TempDir& dir) {
    IngestOptions options;
    options.created_at = "2026-01-01T00:00:00Z";
    return ingest(dir.path(), options);
}

}  // namespace

TEST_CASE("ingest fixture counts") {
    TempDir dir;
    skillhub::testing::write_ingest_fixture(dir.path());
    const CorpusManifest m = ingest_fixture(dir);
    CHECK(m.counts.scanned == 20);
    CHECK(m.counts.rejected_license == 5);
    CHECK(m.counts.rejected_invalid == 1);
    CHECK(m.counts.rejected_duplicate == 1);
    CHECK(m.counts.kept == 13);
    CHECK(m.records.size() == 13);
    CHECK(m.counts.kept ==
          m.counts.scanned - m.counts.rejected_license - m.counts.rejected_invalid - m.counts.rejected_duplicate);

    SUBCASE("duplicate survivor has more stars") {
        CHECK(m.find("bob--mit-08") != nullptr);
        CHECK(m.find("bob--mit-08")->github_stars == 300);
        CHECK(m.find("bob--mit-07") == nullptr);
    }
    SUBCASE("license is checked before dedup") {
        // dave--gpl-0 is a 9000-star copy of alice--mit-00.
        CHECK(m.find("alice--mit-00") != nullptr);
        CHECK(m.find("dave--gpl-0") == nullptr);
    }
    SUBCASE("records sorted, unique ids and hashes") {
        CHECK(std::is_sorted(m.records.begin(), m.records.end(),
                             [](const auto& a, const auto& b) { return a.skill_id < b.skill_id; }));
        for (std::size_t i = 1; i < m.records.size(); ++i) CHECK(m.records[i - 1].skill_id != m.records[i].skill_id);
        for (const auto& r : m.records) {
            CHECK(r.content_hash == sha256_hex(r.content));
            CHECK(r.content_hash.size() == 64);
        }
    }
    SUBCASE("helper files") {
        const SkillRecord* r = m.find("alice--mit-00");
        REQUIRE(r);
        REQUIRE(r->helper_files.size() == 2);
        CHECK(r->helper_files[0].path == "README.txt");
        CHECK(r->helper_files[0].size == 7);
        CHECK(r->helper_files[1].path == "scripts/run.sh");
        CHECK(r->helper_files[1].size == 18);
    }
}

TEST_CASE("ingest is byte-for-byte deterministic") {
    TempDir dir;
    skillhub::testing::write_ingest_fixture(dir.path());
    CHECK(serialize_manifest(ingest_fixture(dir)) == serialize_manifest(ingest_fixture(dir)));
}

TEST_CASE("duplicate tie broken by smaller skill_id") {
    TempDir dir;
    const std::string md = skill_md("x", "same", "same");
    write_skill(dir.path(), "zed", "copy", md, R"({"license":"MIT","github_stars":5})");
    write_skill(dir.path(), "amy", "copy", md, R"({"license":"MIT","github_stars":5})");
    const auto m = ingest(dir.path());
    REQUIRE(m.records.size() == 1);
    CHECK(m.records[0].skill_id == "amy--copy");
}

TEST_CASE("front matter wins over meta.json, meta.json fills gaps") {
    TempDir dir;
    write_skill(dir.path(), "a", "both", skill_md("from-front", "front desc", "body"),
                R"({"license":"MIT","github_stars":1,"name":"from-meta","description":"meta desc"})");
    write_skill(dir.path(), "a", "meta-only", "# No front matter\n\nbody\n",
                R"({"license":"Apache-2.0","github_stars":2,"name":"meta-name","description":"meta only desc"})");
    const auto m = ingest(dir.path());
    REQUIRE(m.records.size() == 2);
    CHECK(m.find("a--both")->name == "from-front");
    CHECK(m.find("a--both")->description == "front desc");
    CHECK(m.find("a--meta-only")->name == "meta-name");
    CHECK(m.find("a--meta-only")->license == License::apache());
}

TEST_CASE("invalid skills are counted, never fatal") {
    TempDir dir;
    write_skill(dir.path(), "a", "ok", skill_md("ok", "fine", "body"), R"({"license":"MIT"})");
    write_skill(dir.path(), "a", "no-name", skill_md("  ", "desc", "body"), R"({"license":"MIT"})");
    write_skill(dir.path(), "a", "bad-stars", skill_md("s", "d", "b1"), R"({"license":"MIT","github_stars":-3})");
    write_skill(dir.path(), "a", "bad-json", skill_md("j", "d", "b2"), "{not json");
    write_skill(dir.path(), "a", "bad--id", skill_md("i", "d", "b3"), R"({"license":"MIT"})");
    skillhub::testing::write_file(dir / "a" / "no-meta" / "SKILL.md", skill_md("m", "d", "b4"));
    skillhub::testing::write_file(dir / "a" / "no-skill" / "meta.json", R"({"license":"MIT"})");
    write_skill(dir.path(), "a", "latin1", std::string("---\nname: x\ndescription: \xE9t\xE9\n---\n"),
                R"({"license":"MIT"})");
    const auto m = ingest(dir.path());
    CHECK(m.counts.scanned == 8);
    CHECK(m.counts.rejected_invalid == 7);
    CHECK(m.counts.kept == 1);
    CHECK(m.records.at(0).github_stars == 0);
}

TEST_CASE("missing source root is fatal") {
    CHECK_THROWS_AS(ingest("/nonexistent/skillhub/root"), Error);
}

TEST_CASE("allowlist restricts licenses") {
    TempDir dir;
    skillhub::testing::write_ingest_fixture(dir.path());
    IngestOptions options;
    options.license_allowlist = {License::Kind::apache_2_0};
    const auto m = ingest(dir.path(), options);
    CHECK(m.counts.rejected_license == 17);
    CHECK(m.counts.kept == 3);
}

TEST_CASE("manifest round trip") {
    TempDir dir;
    skillhub::testing::write_ingest_fixture(dir.path());
    const CorpusManifest m = ingest_fixture(dir);
    save_manifest(m, dir / "m.jsonl");
    const CorpusManifest back = load_manifest(dir / "m.jsonl");
    CHECK(back == m);
    CHECK(serialize_manifest(back) == serialize_manifest(m));

    CorpusManifest three = m;
    three.records.resize(3);
    three.counts = {3, 0, 0, 0, 3};
    CHECK(parse_manifest(serialize_manifest(three)) == three);
}

TEST_CASE("truncated manifest reports a byte offset") {
    TempDir dir;
    skillhub::testing::write_ingest_fixture(dir.path());
    const std::string text = serialize_manifest(ingest_fixture(dir));

    const std::string cut = text.substr(0, text.size() / 2);
    try {
        parse_manifest(cut);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("byte offset") != std::string::npos);
        CHECK(msg.find("manifest record") != std::string::npos);
    }

    // Dropping whole trailing records is caught by the header's kept count.
    const auto last_line = text.rfind('\n', text.size() - 2);
    CHECK_THROWS_AS(parse_manifest(text.substr(0, last_line + 1)), FormatError);
    CHECK_THROWS_AS(parse_manifest(""), FormatError);
}

TEST_CASE("tampered record names its index") {
    TempDir dir;
    skillhub::testing::write_ingest_fixture(dir.path());
    std::string text = serialize_manifest(ingest_fixture(dir));
    const auto pos = text.find("Body of mit-01");
    REQUIRE(pos != std::string::npos);
    text[pos] = 'X';
    try {
        parse_manifest(text);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("manifest record 1 ") != std::string::npos);
    }
}

TEST_CASE("skill id shape") {
    CHECK(split_skill_id("author--name") == std::pair<std::string, std::string>{"author", "name"});
    CHECK_FALSE(split_skill_id("author-name"));
    CHECK_FALSE(split_skill_id("--name"));
    CHECK_FALSE(split_skill_id("author--"));
    CHECK_FALSE(split_skill_id("a--b--c"));
}

TEST_CASE("license tags") {
    CHECK(License::parse("MIT") == License::mit());
    CHECK(License::parse("mit") == License::mit());
    CHECK(License::parse("Apache-2.0") == License::apache());
    CHECK(License::parse("Apache 2.0") == License::apache());
    CHECK(License::parse("GPL-3.0").kind == License::Kind::other);
    CHECK(License::parse("GPL-3.0").to_string() == "GPL-3.0");
    CHECK(License::apache().to_string() == "Apache-2.0");
}

TEST_CASE("sha256 test vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
