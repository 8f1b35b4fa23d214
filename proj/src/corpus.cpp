#include "skillhub/corpus.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skillhub/errors.hpp"
#include "skillhub/text.hpp"

namespace skillhub {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool valid_utf8(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto lead = static_cast<unsigned char>(s[pos]);
        if (lead < 0x80) {
            ++pos;
            continue;
        }
        std::size_t before = pos;
        const char32_t cp = text::decode_utf8(s, pos);
        if (cp == 0xFFFD && pos == before + 1) return false;
    }
    return true;
}

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) return std::nullopt;
    return buf.str();
}

/// Outcome of looking at one candidate folder.
enum class Verdict { keep, bad_license, invalid };

struct Candidate {
    Verdict verdict = Verdict::invalid;
    SkillRecord record;
};

Candidate load_candidate(const fs::path& dir, const std::string& skill_id,
                         const IngestOptions& options) {
    Candidate out;
    const auto skill_md = read_file(dir / "SKILL.md");
    if (!skill_md) {
        spdlog::warn("skipping {}: SKILL.md missing or unreadable", dir.string());
        return out;
    }
    const auto meta_text = read_file(dir / "meta.json");
    if (!meta_text) {
        spdlog::warn("skipping {}: meta.json missing or unreadable", dir.string());
        return out;
    }
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(*meta_text);
    } catch (const nlohmann::json::exception& e) {
        spdlog::warn("skipping {}: meta.json does not parse: {}", dir.string(), e.what());
        return out;
    }
    if (!meta.is_object() || !meta.contains("license") || !meta["license"].is_string()) {
        spdlog::warn("skipping {}: meta.json has no license tag", dir.string());
        return out;
    }

    SkillRecord& rec = out.record;
    rec.skill_id = skill_id;
    rec.license = License::parse(meta["license"].get<std::string>());
    if (!options.license_allowlist.contains(rec.license.kind)) {
        out.verdict = Verdict::bad_license;
        return out;
    }

    if (meta.contains("github_stars")) {
        const auto& stars = meta["github_stars"];
        if (!stars.is_number_integer() || stars.get<std::int64_t>() < 0) return out;
        rec.github_stars = stars.get<std::int64_t>();
    }
    if (!split_skill_id(skill_id)) return out;
    if (!valid_utf8(*skill_md)) return out;

    const FrontMatter fm = parse_front_matter(*skill_md);
    auto meta_string = [&](const char* key) -> std::string {
        if (meta.contains(key) && meta[key].is_string()) return meta[key].get<std::string>();
        return {};
    };
    rec.name = std::string(text::trim(fm.name ? *fm.name : meta_string("name")));
    rec.description =
        std::string(text::trim(fm.description ? *fm.description : meta_string("description")));
    if (rec.name.empty() || rec.description.empty()) return out;
    if (!valid_utf8(rec.name) || !valid_utf8(rec.description)) return out;

    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::end(it);
         it.increment(ec)) {
        if (!it->is_regular_file(ec)) continue;
        const auto rel = fs::relative(it->path(), dir, ec).generic_string();
        if (rel == "SKILL.md" || rel == "meta.json") continue;
        rec.helper_files.push_back({rel, static_cast<std::uint64_t>(it->file_size(ec))});
    }
    if (ec) {
        spdlog::warn("skipping {}: cannot list helper files: {}", dir.string(), ec.message());
        return out;
    }
    std::sort(rec.helper_files.begin(), rec.helper_files.end(),
              [](const HelperFile& a, const HelperFile& b) { return a.path < b.path; });

    rec.content = *skill_md;
    rec.content_hash = sha256_hex(rec.content);
    out.verdict = Verdict::keep;
    return out;
}

ordered_json record_to_json(const SkillRecord& r) {
    ordered_json helpers = ordered_json::array();
    for (const auto& h : r.helper_files) helpers.push_back({{"path", h.path}, {"size", h.size}});
    return ordered_json{{"skill_id", r.skill_id},
                        {"name", r.name},
                        {"description", r.description},
                        {"license", r.license.to_string()},
                        {"github_stars", r.github_stars},
                        {"content_hash", r.content_hash},
                        {"helper_files", std::move(helpers)},
                        {"content", r.content}};
}

SkillRecord record_from_json(const nlohmann::json& j) {
    SkillRecord r;
    r.skill_id = j.at("skill_id").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.description = j.at("description").get<std::string>();
    r.license = License::parse(j.at("license").get<std::string>());
    r.github_stars = j.at("github_stars").get<std::int64_t>();
    r.content_hash = j.at("content_hash").get<std::string>();
    for (const auto& h : j.at("helper_files")) {
        r.helper_files.push_back({h.at("path").get<std::string>(), h.at("size").get<std::uint64_t>()});
    }
    r.content = j.at("content").get<std::string>();
    return r;
}

}  // namespace

License License::parse(std::string_view tag) {
    const std::string t = to_lower_ascii(text::trim(tag));
    if (t == "mit" || t == "mit license") return mit();
    if (t == "apache-2.0" || t == "apache 2.0" || t == "apache2" || t == "apache-2" ||
        t == "apache license 2.0" || t == "apache 2" || t == "apache2.0") {
        return apache();
    }
    return {Kind::other, std::string(text::trim(tag))};
}

std::string License::to_string() const {
    switch (kind) {
        case Kind::mit: return "MIT";
        case Kind::apache_2_0: return "Apache-2.0";
        case Kind::other: break;
    }
    return other;
}

const SkillRecord* CorpusManifest::find(std::string_view skill_id) const {
    auto it = std::lower_bound(records.begin(), records.end(), skill_id,
                               [](const SkillRecord& r, std::string_view id) { return r.skill_id < id; });
    if (it == records.end() || it->skill_id != skill_id) return nullptr;
    return &*it;
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0F]);
    }
    return out;
}

std::optional<std::pair<std::string, std::string>> split_skill_id(std::string_view skill_id) {
    const auto pos = skill_id.find("--");
    if (pos == std::string_view::npos || pos == 0) return std::nullopt;
    if (skill_id.find("--", pos + 1) != std::string_view::npos) return std::nullopt;
    auto author = skill_id.substr(0, pos);
    auto name = skill_id.substr(pos + 2);
    // "a---b" would hide a dash against the separator.
    if (name.empty() || author.back() == '-' || name.front() == '-') return std::nullopt;
    return std::pair{std::string(author), std::string(name)};
}

FrontMatter parse_front_matter(std::string_view skill_md) {
    FrontMatter fm;
    if (skill_md.substr(0, 3) == "\xEF\xBB\xBF") skill_md.remove_prefix(3);
    if (skill_md.substr(0, 3) != "---") return fm;
    auto first_nl = skill_md.find('\n');
    if (first_nl == std::string_view::npos || text::trim(skill_md.substr(0, first_nl)) != "---") return fm;

    std::size_t pos = first_nl + 1;
    std::optional<std::size_t> end;
    while (pos < skill_md.size()) {
        auto nl = skill_md.find('\n', pos);
        auto line = text::trim(skill_md.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        if (line == "---" || line == "...") {
            end = pos;
            break;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (!end) return fm;

    try {
        const YAML::Node node = YAML::Load(std::string(skill_md.substr(first_nl + 1, *end - first_nl - 1)));
        if (!node.IsMap()) return fm;
        if (node["name"] && node["name"].IsScalar()) fm.name = node["name"].as<std::string>();
        if (node["description"] && node["description"].IsScalar()) {
            fm.description = node["description"].as<std::string>();
        }
    } catch (const YAML::Exception&) {
        return fm;
    }
    return fm;
}

std::string utc_now_iso8601() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

CorpusManifest ingest(const fs::path& source_root, const IngestOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(source_root, ec)) {
        throw Error("source root is not a directory: " + source_root.string());
    }

    std::vector<std::pair<std::string, fs::path>> folders;
    for (const auto& author : fs::directory_iterator(source_root)) {
        if (!author.is_directory()) continue;
        std::error_code list_ec;
        for (auto it = fs::directory_iterator(author.path(), list_ec); !list_ec && it != fs::end(it);
             it.increment(list_ec)) {
            if (!it->is_directory()) continue;
            folders.emplace_back(author.path().filename().string() + "--" + it->path().filename().string(),
                                 it->path());
        }
        if (list_ec) spdlog::warn("cannot list {}: {}", author.path().string(), list_ec.message());
    }
    std::sort(folders.begin(), folders.end());

    CorpusManifest manifest;
    manifest.source_root = source_root.string();
    manifest.created_at = options.created_at ? *options.created_at : utc_now_iso8601();
    manifest.counts.scanned = static_cast<std::int64_t>(folders.size());

    std::vector<SkillRecord> valid;
    for (const auto& [skill_id, dir] : folders) {
        Candidate c = load_candidate(dir, skill_id, options);
        switch (c.verdict) {
            case Verdict::bad_license: ++manifest.counts.rejected_license; break;
            case Verdict::invalid: ++manifest.counts.rejected_invalid; break;
            case Verdict::keep: valid.push_back(std::move(c.record)); break;
        }
    }

    // Survivor per content hash: most stars, then smallest skill_id. `valid` is
    // already ordered by skill_id, so strict comparison keeps the earliest.
    std::map<std::string, std::size_t> survivor;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        auto [it, inserted] = survivor.emplace(valid[i].content_hash, i);
        if (!inserted) {
            ++manifest.counts.rejected_duplicate;
            if (valid[i].github_stars > valid[it->second].github_stars) it->second = i;
        }
    }
    std::vector<bool> keep(valid.size(), false);
    for (const auto& [hash, idx] : survivor) keep[idx] = true;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (keep[i]) manifest.records.push_back(std::move(valid[i]));
    }
    manifest.counts.kept = static_cast<std::int64_t>(manifest.records.size());
    return manifest;
}

std::string serialize_manifest(const CorpusManifest& manifest) {
    const auto& c = manifest.counts;
    ordered_json header{{"format", "skillhub-manifest"},
                        {"version", 1},
                        {"created_at", manifest.created_at},
                        {"source_root", manifest.source_root},
                        {"counts",
                         {{"scanned", c.scanned},
                          {"rejected_license", c.rejected_license},
                          {"rejected_invalid", c.rejected_invalid},
                          {"rejected_duplicate", c.rejected_duplicate},
                          {"kept", c.kept}}}};
    std::string out = header.dump();
    out.push_back('\n');
    for (const auto& r : manifest.records) {
        out += record_to_json(r).dump();
        out.push_back('\n');
    }
    return out;
}

void save_manifest(const CorpusManifest& manifest, const fs::path& path) {
    const std::string data = serialize_manifest(manifest);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open manifest for writing: " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("failed writing manifest: " + path.string());
}

CorpusManifest parse_manifest(std::string_view text) {
    CorpusManifest m;
    std::size_t line_start = 0;
    std::size_t line_no = 0;
    std::int64_t declared_kept = -1;

    auto fail = [&](std::size_t offset, const std::string& what) -> FormatError {
        if (line_no == 0) return FormatError("manifest header (byte offset " + std::to_string(offset) + "): " + what);
        return FormatError("manifest record " + std::to_string(line_no - 1) + " (byte offset " +
                           std::to_string(offset) + "): " + what);
    };

    while (line_start < text.size()) {
        auto nl = text.find('\n', line_start);
        const bool terminated = nl != std::string_view::npos;
        if (!terminated) nl = text.size();
        const std::string_view line = text.substr(line_start, nl - line_start);

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw fail(line_start + (e.byte > 0 ? e.byte - 1 : 0), e.what());
        }
        if (!terminated) throw fail(nl, "record is not newline-terminated (truncated file?)");

        try {
            if (line_no == 0) {
                if (j.value("format", "") != "skillhub-manifest") throw fail(line_start, "not a skillhub manifest");
                if (j.at("version").get<int>() != 1) throw fail(line_start, "unsupported manifest version");
                m.created_at = j.at("created_at").get<std::string>();
                m.source_root = j.at("source_root").get<std::string>();
                const auto& c = j.at("counts");
                m.counts.scanned = c.at("scanned").get<std::int64_t>();
                m.counts.rejected_license = c.at("rejected_license").get<std::int64_t>();
                m.counts.rejected_invalid = c.at("rejected_invalid").get<std::int64_t>();
                m.counts.rejected_duplicate = c.at("rejected_duplicate").get<std::int64_t>();
                m.counts.kept = c.at("kept").get<std::int64_t>();
                declared_kept = m.counts.kept;
            } else {
                SkillRecord r = record_from_json(j);
                if (sha256_hex(r.content) != r.content_hash) throw fail(line_start, "content_hash does not match content");
                if (!m.records.empty() && !(m.records.back().skill_id < r.skill_id)) {
                    throw fail(line_start, "records out of order or duplicate skill_id " + r.skill_id);
                }
                m.records.push_back(std::move(r));
            }
        } catch (const nlohmann::json::exception& e) {
            throw fail(line_start, e.what());
        }
        ++line_no;
        line_start = nl + 1;
    }

    if (line_no == 0) throw FormatError("manifest is empty (byte offset 0)");
    if (static_cast<std::int64_t>(m.records.size()) != declared_kept) {
        throw FormatError("manifest record " + std::to_string(m.records.size()) + " (byte offset " +
                          std::to_string(text.size()) + "): header declares " + std::to_string(declared_kept) +
                          " records, file ends after " + std::to_string(m.records.size()));
    }
    const auto& c = m.counts;
    if (c.kept != c.scanned - c.rejected_license - c.rejected_invalid - c.rejected_duplicate) {
        throw FormatError("manifest header (byte offset 0): counts do not add up");
    }
    std::set<std::string_view> hashes;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        if (!hashes.insert(m.records[i].content_hash).second) {
            throw FormatError("manifest record " + std::to_string(i) + ": duplicate content_hash");
        }
    }
    return m;
}

CorpusManifest load_manifest(const fs::path& path) {
    const auto data = read_file(path);
    if (!data) throw Error("cannot read manifest: " + path.string());
    return parse_manifest(*data);
}

}  // namespace skillhub
