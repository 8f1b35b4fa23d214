#include "skillhub/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include <nlohmann/json.hpp>

#include "skillhub/errors.hpp"
#include "skillhub/text.hpp"

namespace skillhub {

using ordered_json = nlohmann::ordered_json;

void IndexSnapshot::check_consistent() const {
    if (lexical.doc_count() != manifest.records.size() || dense.size() != manifest.records.size()) {
        throw InvalidArgument("corpus, lexical index and vector store differ in size");
    }
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& id = manifest.records[i].skill_id;
        if (lexical.skill_ids()[i] != id || dense.skill_ids()[i] != id) {
            throw InvalidArgument("indexes were not built from this corpus (mismatch at " + id + ")");
        }
    }
}

std::shared_ptr<const IndexSnapshot> make_snapshot(CorpusManifest manifest, InvertedIndex lexical, DenseIndex dense) {
    auto snap = std::make_shared<IndexSnapshot>(IndexSnapshot{std::move(manifest), std::move(lexical), std::move(dense)});
    snap->check_consistent();
    return snap;
}

std::string_view strip_front_matter(std::string_view skill_md) {
    std::string_view s = skill_md;
    if (s.substr(0, 3) == "\xEF\xBB\xBF") s.remove_prefix(3);
    if (s.substr(0, 3) != "---") return skill_md;
    auto nl = s.find('\n');
    if (nl == std::string_view::npos || text::trim(s.substr(0, nl)) != "---") return skill_md;
    std::size_t pos = nl + 1;
    while (pos < s.size()) {
        auto next = s.find('\n', pos);
        auto line = text::trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (line == "---" || line == "...") return next == std::string_view::npos ? std::string_view{} : s.substr(next + 1);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return skill_md;
}

std::string render_hits(const IndexSnapshot& snapshot, const RankedList& list) {
    const char* score_key = list.kind == ScoreKind::rrf ? "rrf_score" : "score";
    ordered_json arr = ordered_json::array();
    for (const Hit& hit : list.hits) {
        const SkillRecord* rec = snapshot.manifest.find(hit.skill_id);
        if (!rec) throw Error("hit refers to unknown skill " + hit.skill_id);
        arr.push_back(ordered_json{{"name", rec->name},
                                   {"description", rec->description},
                                   {"skill_md_snippet", text::make_snippet(strip_front_matter(rec->content))},
                                   {"skill_id", rec->skill_id},
                                   {"github_stars", rec->github_stars},
                                   {score_key, hit.score}});
    }
    return arr.dump();
}

std::string render_detail(const SkillRecord& rec) {
    ordered_json helpers = ordered_json::array();
    for (const auto& h : rec.helper_files) helpers.push_back({{"path", h.path}, {"size", h.size}});
    return ordered_json{{"skill_id", rec.skill_id},
                        {"name", rec.name},
                        {"description", rec.description},
                        {"license", rec.license.to_string()},
                        {"github_stars", rec.github_stars},
                        {"content", rec.content},
                        {"helper_files", std::move(helpers)}}
        .dump();
}

namespace {

/// Thrown inside handlers to produce an error response.
struct HttpError {
    int status;
    std::string message;
};

ServiceResponse error_response(int status, const std::string& message) {
    return {status, ordered_json{{"error", message}}.dump(), {}};
}

std::string require_query(const QueryParams& params) {
    auto it = params.find("q");
    if (it == params.end()) throw HttpError{400, "missing required parameter 'q'"};
    if (text::trim(it->second).empty()) throw HttpError{400, "parameter 'q' is empty"};
    return it->second;
}

std::size_t top_k_param(const QueryParams& params) {
    auto it = params.find("top_k");
    if (it == params.end()) return kDefaultTopK;
    const std::string_view s = text::trim(it->second);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc::result_out_of_range) {
        return (!s.empty() && s.front() == '-') ? 1 : kMaxTopK;
    }
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw HttpError{400, "top_k must be an integer"};
    return static_cast<std::size_t>(std::clamp<long long>(value, 1, static_cast<long long>(kMaxTopK)));
}

double weight_param(const QueryParams& params, const char* key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    const std::string_view s = text::trim(it->second);
    double value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        throw HttpError{400, std::string(key) + " must be a number"};
    }
    if (value < 0) throw HttpError{400, std::string(key) + " must be non-negative"};
    return value;
}

template <typename Handler>
ServiceResponse guarded(Handler&& handler) {
    try {
        return handler();
    } catch (const HttpError& e) {
        return error_response(e.status, e.message);
    } catch (const QueryParseError& e) {
        return error_response(400, std::string("invalid query: ") + e.what());
    } catch (const ProviderError& e) {
        return error_response(503, e.what());
    } catch (const std::exception& e) {
        spdlog::error("request failed: {}", e.what());
        return error_response(500, e.what());
    }
}

}  // namespace

SkillService::SkillService(std::shared_ptr<EmbeddingProvider> provider, SearchSettings settings)
    : provider_(std::move(provider)), settings_(std::move(settings)) {
    if (!provider_) throw InvalidArgument("an embedding provider is required");
    settings_.lexical.validate();
    settings_.semantic.validate();
    settings_.fusion.validate();
}

void SkillService::install(std::shared_ptr<const IndexSnapshot> snapshot) {
    if (snapshot) {
        snapshot->check_consistent();
        const auto fp = provider_->fingerprint();
        if (fp.dimension != snapshot->dense.dimension()) {
            throw DimensionMismatch("provider dimension " + std::to_string(fp.dimension) + " != vector store dimension " +
                                    std::to_string(snapshot->dense.dimension()));
        }
        if (fp.model != snapshot->dense.fingerprint().model) {
            spdlog::warn("provider model '{}' differs from vector store model '{}'", fp.model,
                         snapshot->dense.fingerprint().model);
        }
    }
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(snapshot);
}

std::shared_ptr<const IndexSnapshot> SkillService::snapshot() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
}

ServiceResponse SkillService::keyword(const QueryParams& params) const {
    return guarded([&] {
        const auto q = require_query(params);
        const auto top_k = top_k_param(params);
        const auto snap = snapshot();
        if (!snap) throw HttpError{503, "index not loaded yet"};
        const RankedList list = search_keyword(snap->lexical, q, top_k, settings_.lexical);
        return ServiceResponse{200, render_hits(*snap, list), {}};
    });
}

ServiceResponse SkillService::semantic(const QueryParams& params) const {
    return guarded([&] {
        const auto q = require_query(params);
        const auto top_k = top_k_param(params);
        const auto snap = snapshot();
        if (!snap) throw HttpError{503, "index not loaded yet"};
        const auto vec = embed({q}, true, *provider_, settings_.semantic, snap->dense.dimension());
        const RankedList list = snap->dense.search(vec.front(), top_k, settings_.semantic);
        return ServiceResponse{200, render_hits(*snap, list), {}};
    });
}

ServiceResponse SkillService::hybrid(const QueryParams& params) const {
    return guarded([&] {
        const auto q = require_query(params);
        const auto top_k = top_k_param(params);
        SearchSettings settings = settings_;
        settings.fusion.keyword_weight = weight_param(params, "keyword_weight", settings_.fusion.keyword_weight);
        settings.fusion.semantic_weight = weight_param(params, "semantic_weight", settings_.fusion.semantic_weight);
        if (settings.fusion.keyword_weight == 0 && settings.fusion.semantic_weight == 0) {
            throw HttpError{400, "keyword_weight and semantic_weight cannot both be zero"};
        }
        const auto snap = snapshot();
        if (!snap) throw HttpError{503, "index not loaded yet"};
        const HybridResult result = search_hybrid(snap->lexical, snap->dense, *provider_, q, top_k, settings);
        ServiceResponse resp{200, render_hits(*snap, result.list), {}};
        if (result.warning) resp.headers.emplace_back("X-Skillhub-Warning", *result.warning);
        return resp;
    });
}

ServiceResponse SkillService::detail(std::string_view skill_id) const {
    return guarded([&] {
        if (skill_id.empty()) throw HttpError{400, "missing skill_id"};
        const auto snap = snapshot();
        if (!snap) throw HttpError{503, "index not loaded yet"};
        const SkillRecord* rec = snap->manifest.find(skill_id);
        if (!rec) throw HttpError{404, "unknown skill_id: " + std::string(skill_id)};
        return ServiceResponse{200, render_detail(*rec), {}};
    });
}

struct SkillServer::Impl {
    const SkillService& service;
    httplib::Server server;

    explicit Impl(const SkillService& s) : service(s) {
        auto reply = [](httplib::Response& res, const ServiceResponse& r) {
            res.status = r.status;
            for (const auto& [k, v] : r.headers) res.set_header(k, v);
            res.set_content(r.body, "application/json");
        };
        auto params = [](const httplib::Request& req) {
            QueryParams p;
            // First occurrence wins for repeated keys.
            for (const auto& [k, v] : req.params) p.emplace(k, v);
            return p;
        };
        server.Get("/keyword", [=, this](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.keyword(params(req)));
        });
        server.Get("/semantic", [=, this](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.semantic(params(req)));
        });
        server.Get("/hybrid", [=, this](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.hybrid(params(req)));
        });
        // req.path is already percent-decoded by the transport.
        server.Get(R"(/detail/(.+))", [=, this](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.detail(req.matches[1].str()));
        });
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                res.set_content(ordered_json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
            }
        });
    }
};

SkillServer::SkillServer(const SkillService& service) : impl_(std::make_unique<Impl>(service)) {}
SkillServer::~SkillServer() = default;

bool SkillServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int SkillServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool SkillServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void SkillServer::wait_until_ready() const { impl_->server.wait_until_ready(); }
void SkillServer::stop() { impl_->server.stop(); }

}  // namespace skillhub
