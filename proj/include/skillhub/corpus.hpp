#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace skillhub {

/// Declared license of a skill. Anything other than MIT / Apache-2.0 keeps its
/// original tag in `other`.
struct License {
    enum class Kind { mit, apache_2_0, other };

    Kind kind = Kind::other;
    std::string other;

    static License mit() { return {Kind::mit, {}}; }
    static License apache() { return {Kind::apache_2_0, {}}; }

    /// Normalizes common spellings ("mit", "Apache 2.0", "apache-2.0", ...).
    static License parse(std::string_view tag);

    std::string to_string() const;

    friend bool operator==(const License&, const License&) = default;
};

struct HelperFile {
    std::string path;  // relative to the skill folder, '/' separated
    std::uint64_t size = 0;

    friend bool operator==(const HelperFile&, const HelperFile&) = default;
};

struct SkillRecord {
    std::string skill_id;  // author--name
    std::string name;
    std::string description;
    std::string content;  // raw SKILL.md bytes
    std::vector<HelperFile> helper_files;
    License license;
    std::int64_t github_stars = 0;
    std::string content_hash;  // lowercase hex SHA-256 of `content`

    friend bool operator==(const SkillRecord&, const SkillRecord&) = default;
};

struct CorpusCounts {
    std::int64_t scanned = 0;
    std::int64_t rejected_license = 0;
    std::int64_t rejected_invalid = 0;
    std::int64_t rejected_duplicate = 0;
    std::int64_t kept = 0;

    friend bool operator==(const CorpusCounts&, const CorpusCounts&) = default;
};

struct CorpusManifest {
    std::vector<SkillRecord> records;  // sorted by skill_id
    std::string created_at;            // ISO-8601 UTC, e.g. 2026-01-31T12:00:00Z
    std::string source_root;
    CorpusCounts counts;

    const SkillRecord* find(std::string_view skill_id) const;

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct IngestOptions {
    std::set<License::Kind> license_allowlist{License::Kind::mit, License::Kind::apache_2_0};
    /// Fixed timestamp for reproducible output; current time when unset.
    std::optional<std::string> created_at;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Splits "author--name". Returns nullopt unless there is exactly one `--`
/// with non-empty sides.
std::optional<std::pair<std::string, std::string>> split_skill_id(std::string_view skill_id);

/// Name/description pulled from a SKILL.md YAML front-matter block.
struct FrontMatter {
    std::optional<std::string> name;
    std::optional<std::string> description;
};
FrontMatter parse_front_matter(std::string_view skill_md);

/// Scans `<source_root>/<author>/<name>/` folders. Rejections are applied in
/// the order license, validity, duplicate content; duplicates keep the record
/// with more stars, then the smaller skill_id. Throws Error when
/// `source_root` is not a directory.
CorpusManifest ingest(const std::filesystem::path& source_root, const IngestOptions& options = {});

/// One header line (counts and metadata) followed by one JSON record per line.
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
std::string serialize_manifest(const CorpusManifest& manifest);

/// Throws FormatError naming the offending record index and byte offset.
CorpusManifest load_manifest(const std::filesystem::path& path);
CorpusManifest parse_manifest(std::string_view text);

std::string utc_now_iso8601();

}  // namespace skillhub
