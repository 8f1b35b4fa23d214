#include "skillhub/dense_index.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "binary_io.hpp"
#include "skillhub/errors.hpp"
#include "skillhub/text.hpp"

namespace skillhub {

namespace {

constexpr std::string_view kMagic = "SKVSTOR1";
constexpr std::uint32_t kVersion = 1;

double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

double l2(std::span<const float> v) { return std::sqrt(dot(v, v)); }

std::vector<double> row_norms(const std::vector<float>& m, std::size_t dim) {
    std::vector<double> out;
    if (dim == 0) return out;
    out.reserve(m.size() / dim);
    for (std::size_t off = 0; off < m.size(); off += dim) out.push_back(l2({m.data() + off, dim}));
    return out;
}

}  // namespace

void SemanticConfig::validate() const {
    if (!(content_weight >= 0.0 && content_weight <= 1.0)) {
        throw InvalidArgument("semantic content weight must lie in [0, 1]");
    }
}

double EmbeddingVector::norm() const { return l2(values); }

std::string metadata_text(const SkillRecord& record) { return record.name + ": " + record.description; }

std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts, bool is_query, EmbeddingProvider& provider,
                                   const SemanticConfig& config, std::optional<std::size_t> expected_dimension) {
    if (texts.empty()) throw InvalidArgument("nothing to embed");
    std::vector<std::string> submitted;
    submitted.reserve(texts.size());
    const std::size_t limit = provider.max_input_bytes();
    for (const auto& t : texts) {
        if (is_query) {
            submitted.push_back(config.instruction_prefix + " " + t);
        } else {
            submitted.emplace_back(limit > 0 ? text::truncate_utf8(t, limit) : std::string_view(t));
        }
    }

    auto raw = provider.embed_batch(submitted, is_query);
    if (raw.size() != texts.size()) throw Error("provider returned the wrong number of vectors");

    std::vector<EmbeddingVector> out;
    out.reserve(raw.size());
    for (auto& values : raw) {
        if (expected_dimension && values.size() != *expected_dimension) {
            throw DimensionMismatch("provider returned dimension " + std::to_string(values.size()) + ", index expects " +
                                    std::to_string(*expected_dimension));
        }
        if (!out.empty() && values.size() != out.front().dimension()) {
            throw DimensionMismatch("provider returned vectors of differing dimension");
        }
        for (float v : values) {
            if (!std::isfinite(v)) throw Error("provider returned a non-finite vector entry");
        }
        EmbeddingVector vec{std::move(values)};
        if (config.normalize) {
            const double n = vec.norm();
            if (n > 0) {
                for (auto& v : vec.values) v = static_cast<float>(v / n);
            }
        }
        out.push_back(std::move(vec));
    }
    return out;
}

DenseIndex DenseIndex::build(const CorpusManifest& manifest, EmbeddingProvider& provider, const SemanticConfig& config,
                             std::size_t batch_size) {
    if (manifest.records.empty()) throw InvalidArgument("cannot build a dense index over an empty corpus");
    if (batch_size == 0) batch_size = 1;
    const ProviderFingerprint fp = provider.fingerprint();

    std::vector<std::string> ids;
    std::vector<float> meta;
    std::vector<float> content;
    const std::size_t n = manifest.records.size();
    meta.reserve(n * fp.dimension);
    content.reserve(n * fp.dimension);

    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        std::vector<std::string> meta_texts;
        std::vector<std::string> content_texts;
        for (std::size_t i = start; i < end; ++i) {
            const SkillRecord& rec = manifest.records[i];
            ids.push_back(rec.skill_id);
            meta_texts.push_back(metadata_text(rec));
            content_texts.push_back(rec.content);
        }
        for (const auto& v : embed(meta_texts, false, provider, config, fp.dimension)) {
            meta.insert(meta.end(), v.values.begin(), v.values.end());
        }
        for (const auto& v : embed(content_texts, false, provider, config, fp.dimension)) {
            content.insert(content.end(), v.values.begin(), v.values.end());
        }
    }
    return from_matrices(std::move(ids), fp.dimension, std::move(meta), std::move(content), fp, config.normalize);
}

DenseIndex DenseIndex::from_matrices(std::vector<std::string> ids, std::size_t dimension, std::vector<float> meta,
                                     std::vector<float> content, ProviderFingerprint fingerprint, bool normalized) {
    if (dimension == 0) throw InvalidArgument("dimension must be positive");
    if (meta.size() != ids.size() * dimension || content.size() != ids.size() * dimension) {
        throw InvalidArgument("matrix shape does not match ids x dimension");
    }
    DenseIndex index;
    index.ids_ = std::move(ids);
    index.dimension_ = dimension;
    index.meta_ = std::move(meta);
    index.content_ = std::move(content);
    index.fingerprint_ = std::move(fingerprint);
    index.fingerprint_.dimension = dimension;
    index.normalized_ = normalized;
    index.finalize();
    return index;
}

void DenseIndex::finalize() {
    ordinals_.clear();
    for (std::uint32_t i = 0; i < ids_.size(); ++i) {
        if (!ordinals_.emplace(ids_[i], i).second) throw FormatError("duplicate skill_id in vector store: " + ids_[i]);
    }
    meta_norms_ = row_norms(meta_, dimension_);
    content_norms_ = row_norms(content_, dimension_);
}

std::optional<std::uint32_t> DenseIndex::ordinal_of(const std::string& skill_id) const {
    auto it = ordinals_.find(skill_id);
    if (it == ordinals_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> DenseIndex::meta_row(std::size_t ordinal) const {
    return {meta_.data() + ordinal * dimension_, dimension_};
}

std::span<const float> DenseIndex::content_row(std::size_t ordinal) const {
    return {content_.data() + ordinal * dimension_, dimension_};
}

double DenseIndex::meta_cosine(std::size_t ordinal, const EmbeddingVector& query) const {
    const double denom = query.norm() * meta_norms_[ordinal];
    return denom > 0 ? dot(query.values, meta_row(ordinal)) / denom : 0.0;
}

double DenseIndex::content_cosine(std::size_t ordinal, const EmbeddingVector& query) const {
    const double denom = query.norm() * content_norms_[ordinal];
    return denom > 0 ? dot(query.values, content_row(ordinal)) / denom : 0.0;
}

RankedList DenseIndex::search(const EmbeddingVector& query, std::size_t top_k, const SemanticConfig& config) const {
    config.validate();
    if (top_k == 0) throw InvalidArgument("top_k must be at least 1");
    if (query.dimension() != dimension_) {
        throw DimensionMismatch("query dimension " + std::to_string(query.dimension()) + " != index dimension " +
                                std::to_string(dimension_));
    }
    const double w = config.content_weight;
    const double qn = query.norm();
    std::vector<double> scores(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        const double dm = qn * meta_norms_[i];
        const double cm = dm > 0 ? dot(query.values, meta_row(i)) / dm : 0.0;
        double cc = 0.0;
        if (w > 0) {
            const double dc = qn * content_norms_[i];
            cc = dc > 0 ? dot(query.values, content_row(i)) / dc : 0.0;
        }
        scores[i] = (1.0 - w) * cm + w * cc;
    }

    std::vector<std::uint32_t> order(size());
    std::iota(order.begin(), order.end(), 0u);
    const std::size_t k = std::min(top_k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return ids_[a] < ids_[b];
                      });
    RankedList out;
    out.kind = ScoreKind::semantic;
    out.hits.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.hits.push_back({ids_[order[i]], scores[order[i]]});
    return out;
}

std::string DenseIndex::serialize() const {
    detail::BinaryWriter w;
    w.put_raw(kMagic);
    w.put(kVersion);
    w.put(static_cast<std::uint32_t>(dimension_));
    w.put(static_cast<std::uint64_t>(ids_.size()));
    w.put(static_cast<std::uint8_t>(normalized_ ? 1 : 0));
    w.put_string(fingerprint_.model);
    for (const auto& id : ids_) w.put_string(id);
    w.put_array(meta_);
    w.put_array(content_);
    return w.bytes();
}

DenseIndex DenseIndex::deserialize(std::string_view bytes) {
    detail::BinaryReader r(bytes, "vector store");
    if (r.get_raw(kMagic.size()) != kMagic) r.fail("not a vector store file");
    if (r.get<std::uint32_t>() != kVersion) r.fail("unsupported vector store version");
    const auto dim = r.get<std::uint32_t>();
    const auto count = r.get<std::uint64_t>();
    if (dim == 0) r.fail("zero dimension");
    if (count > bytes.size()) r.fail("implausible row count");
    const bool normalized = r.get<std::uint8_t>() != 0;
    std::string model = r.get_string();
    std::vector<std::string> ids;
    ids.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) ids.push_back(r.get_string());
    auto meta = r.get_array<float>(count * dim);
    auto content = r.get_array<float>(count * dim);
    if (!r.at_end()) r.fail("trailing bytes");
    return from_matrices(std::move(ids), dim, std::move(meta), std::move(content), {std::move(model), dim}, normalized);
}

void DenseIndex::save(const std::filesystem::path& path) const {
    const std::string data = serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("failed writing: " + path.string());
}

DenseIndex DenseIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read vector store: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

bool operator==(const DenseIndex& a, const DenseIndex& b) {
    return a.ids_ == b.ids_ && a.dimension_ == b.dimension_ && a.meta_ == b.meta_ && a.content_ == b.content_ &&
           a.fingerprint_ == b.fingerprint_ && a.normalized_ == b.normalized_;
}

RankedList search_semantic(const DenseIndex& index, const EmbeddingVector& query, std::size_t top_k,
                           const SemanticConfig& config) {
    return index.search(query, top_k, config);
}

}  // namespace skillhub
