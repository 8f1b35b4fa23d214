#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "skillhub/corpus.hpp"
#include "skillhub/embedding.hpp"
#include "skillhub/service.hpp"

namespace skillhub::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(std::string_view child) const { return path_ / child; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// `<root>/<author>/<name>/SKILL.md` plus meta.json.
void write_skill(const std::filesystem::path& root, const std::string& author, const std::string& name,
                 const std::string& skill_md, const std::string& meta_json);

std::string skill_md(const std::string& name, const std::string& description, const std::string& body);

/// 20 skills: 12 MIT, 3 Apache-2.0, 5 GPL-3.0. Among the permissive ones two
/// share byte-identical SKILL.md (10 and 300 stars) and one has an empty
/// description. Some GPL skills also fail later checks so the rejection order
/// matters.
void write_ingest_fixture(const std::filesystem::path& root);

std::filesystem::path test_data_dir();
std::filesystem::path fixture_skills_dir();

inline constexpr std::string_view kFixtureTimestamp = "2026-01-01T00:00:00Z";

/// The ten-skill corpus under tests/data/fixture_skills.
CorpusManifest fixture_manifest();

/// Manifest built from (skill_id, name, description, body) tuples.
struct ToySkill {
    std::string skill_id;
    std::string name;
    std::string description;
    std::string body;
    std::int64_t stars = 0;
};
CorpusManifest manifest_of(const std::vector<ToySkill>& skills);

/// Eight skills around containers and deployment.
CorpusManifest docker_toy_manifest();

std::shared_ptr<const IndexSnapshot> snapshot_of(const CorpusManifest& manifest, EmbeddingProvider& provider,
                                                 const SearchSettings& settings = {});

}  // namespace skillhub::testing
