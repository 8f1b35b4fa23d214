#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "skillhub/dense_index.hpp"
#include "skillhub/lexical_index.hpp"

namespace skillhub::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = fs::temp_directory_path() / ("skillhub-test-" + std::to_string(rd()));
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("cannot create a temp directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, std::string_view bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_skill(const fs::path& root, const std::string& author, const std::string& name,
                 const std::string& skill_md_text, const std::string& meta_json) {
    const fs::path dir = root / author / name;
    write_file(dir / "SKILL.md", skill_md_text);
    write_file(dir / "meta.json", meta_json);
}

std::string skill_md(const std::string& name, const std::string& description, const std::string& body) {
    return "---\nname: " + name + "\ndescription: " + description + "\n---\n\n" + body + "\n";
}

namespace {

std::string meta(const std::string& license, int stars) {
    return R"({"license": ")" + license + R"(", "github_stars": )" + std::to_string(stars) + "}";
}

}  // namespace

void write_ingest_fixture(const fs::path& root) {
    // Twelve MIT skills; mit-07 and mit-08 are byte-identical.
    const std::string shared = skill_md("shared-helper", "Shared helper copied between two repos", "Same bytes.");
    for (int i = 0; i < 12; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "mit-%02d", i);
        std::string md = skill_md(name, std::string("MIT skill number ") + std::to_string(i), "Body of " + std::string(name));
        int stars = 5 * i;
        if (i == 7) {
            md = shared;
            stars = 10;
        } else if (i == 8) {
            md = shared;
            stars = 300;
        } else if (i == 11) {
            md = "---\nname: mit-11\ndescription: \"   \"\n---\n\nNo description.\n";
        }
        write_skill(root, i < 6 ? "alice" : "bob", name, md, meta("MIT", stars));
    }
    // Helper files on one kept skill.
    write_file(root / "alice" / "mit-00" / "scripts" / "run.sh", "#!/bin/sh\necho hi\n");
    write_file(root / "alice" / "mit-00" / "README.txt", "readme\n");

    for (int i = 0; i < 3; ++i) {
        const std::string name = "apache-" + std::to_string(i);
        write_skill(root, "carol", name, skill_md(name, "Apache licensed skill", "Apache body " + name),
                    meta("Apache-2.0", 100 + i));
    }

    // GPL: one is a copy of mit-00 with more stars, one has an empty
    // description. Both must still count as license rejections.
    const std::string mit00 = skill_md("mit-00", "MIT skill number 0", "Body of mit-00");
    for (int i = 0; i < 5; ++i) {
        const std::string name = "gpl-" + std::to_string(i);
        std::string md = skill_md(name, "Copyleft skill", "GPL body " + name);
        if (i == 0) md = mit00;
        if (i == 1) md = skill_md(name, "", "no description");
        write_skill(root, "dave", name, md, meta("GPL-3.0", 9000));
    }
}

fs::path test_data_dir() { return fs::path(SKILLHUB_TEST_DATA_DIR); }

fs::path fixture_skills_dir() { return test_data_dir() / "fixture_skills"; }

CorpusManifest fixture_manifest() {
    IngestOptions options;
    options.created_at = std::string(kFixtureTimestamp);
    CorpusManifest m = ingest(fixture_skills_dir(), options);
    m.source_root = "fixture_skills";
    return m;
}

CorpusManifest manifest_of(const std::vector<ToySkill>& skills) {
    CorpusManifest m;
    m.created_at = std::string(kFixtureTimestamp);
    m.source_root = "toy";
    for (const auto& s : skills) {
        SkillRecord r;
        r.skill_id = s.skill_id;
        r.name = s.name;
        r.description = s.description;
        r.content = skill_md(s.name, s.description, s.body);
        r.license = License::mit();
        r.github_stars = s.stars;
        r.content_hash = sha256_hex(r.content);
        m.records.push_back(std::move(r));
    }
    std::sort(m.records.begin(), m.records.end(),
              [](const SkillRecord& a, const SkillRecord& b) { return a.skill_id < b.skill_id; });
    m.counts.scanned = m.counts.kept = static_cast<std::int64_t>(m.records.size());
    return m;
}

CorpusManifest docker_toy_manifest() {
    return manifest_of({
        {"ops--docker-deploy", "docker-deploy", "Deploy Docker containers to production", "docker build, docker push, deploy"},
        {"ops--compose-stack", "compose-stack", "Run multi-container stacks with Docker Compose", "compose up for local docker"},
        {"ops--helm-release", "helm-release", "Deploy charts to Kubernetes clusters", "helm upgrade --install to deploy"},
        {"web--static-site", "static-site", "Publish a static site to a CDN", "build and upload assets"},
        {"web--react-app", "react-app", "Scaffold a React single page app", "vite, components, routing"},
        {"data--etl-jobs", "etl-jobs", "Schedule ETL jobs in containers", "cron, docker images for each job"},
        {"sec--image-scan", "image-scan", "Scan Docker images for vulnerabilities", "trivy on every docker build"},
        {"ml--model-serve", "model-serve", "Deploy ML models behind an HTTP API", "package the model, deploy the server"},
    });
}

std::shared_ptr<const IndexSnapshot> snapshot_of(const CorpusManifest& manifest, EmbeddingProvider& provider,
                                                 const SearchSettings& settings) {
    InvertedIndex lexical = InvertedIndex::build(manifest, settings.lexical);
    DenseIndex dense = DenseIndex::build(manifest, provider, settings.semantic);
    return make_snapshot(manifest, std::move(lexical), std::move(dense));
}

}  // namespace skillhub::testing
