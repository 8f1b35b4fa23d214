#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdio>
#include <thread>

#include "skillhub/corpus.hpp"
#include "skillhub/dense_index.hpp"
#include "skillhub/embedding.hpp"
#include "skillhub/errors.hpp"
#include "skillhub/evaluation.hpp"
#include "skillhub/fusion.hpp"
#include "skillhub/lexical_index.hpp"
#include "skillhub/query.hpp"
#include "skillhub/service.hpp"
#include "skillhub/skill_doc.hpp"
#include "skillhub/text.hpp"

namespace py = pybind11;
using namespace skillhub;

namespace {

py::dict record_dict(const SkillRecord& r) {
    py::list helpers;
    for (const auto& h : r.helper_files) helpers.append(py::dict(py::arg("path") = h.path, py::arg("size") = h.size));
    return py::dict(py::arg("skill_id") = r.skill_id, py::arg("name") = r.name,
                    py::arg("description") = r.description, py::arg("content") = r.content,
                    py::arg("license") = r.license.to_string(), py::arg("github_stars") = r.github_stars,
                    py::arg("content_hash") = r.content_hash, py::arg("helper_files") = helpers);
}

py::tuple response_tuple(const ServiceResponse& r) { return py::make_tuple(r.status, r.body, r.headers); }

QueryParams params(const std::string& q, std::optional<std::size_t> top_k) {
    QueryParams p{{"q", q}};
    if (top_k) p["top_k"] = std::to_string(*top_k);
    return p;
}

/// Keeps the provider reachable for index builds.
struct PyService {
    PyService(std::shared_ptr<EmbeddingProvider> p, SearchSettings settings)
        : provider(p), service(std::move(p), std::move(settings)) {}
    std::shared_ptr<EmbeddingProvider> provider;
    SkillService service;
};

std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Server thread owned from Python; stopped on stop() or destruction.
class PyServer {
public:
    explicit PyServer(std::shared_ptr<PyService> service) : service_(std::move(service)), server_(service_->service) {}
    ~PyServer() { stop(); }

    int start(const std::string& host) {
        if (thread_.joinable()) throw InvalidArgument("server already running");
        const int port = server_.bind_to_any_port(host);
        if (port <= 0) throw Error("cannot bind " + host);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port;
    }

    void stop() {
        if (!thread_.joinable()) return;
        server_.stop();
        thread_.join();
    }

private:
    std::shared_ptr<PyService> service_;
    SkillServer server_;
    std::thread thread_;
};

}  // namespace

PYBIND11_MODULE(_skillhub, m) {
    m.doc() = "Skill search engine: corpus ingestion, BM25 and dense retrieval, rank fusion, HTTP service.";

    // Held as plain handles so nothing is released after interpreter shutdown.
    static py::handle base_error = py::exception<Error>(m, "SkillhubError", PyExc_RuntimeError).release();
    static py::handle parse_error = py::exception<QueryParseError>(m, "QueryParseError", base_error).release();
    static py::handle provider_error = py::exception<ProviderError>(m, "ProviderError", base_error).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const QueryParseError& e) {
            // args = (message, offset)
            PyErr_SetObject(parse_error.ptr(), py::make_tuple(e.what(), e.offset()).ptr());
        } catch (const ProviderError& e) {
            PyErr_SetString(provider_error.ptr(), e.what());
        } catch (const InvalidArgument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const Error& e) {
            PyErr_SetString(base_error.ptr(), e.what());
        }
    });

    m.def("tokenize", [](const std::string& s) { return text::tokenize(s); });
    m.def("snippet", [](const std::string& s, std::size_t words) { return text::make_snippet(s, words); },
          py::arg("content"), py::arg("max_words") = 100);
    m.def("canonical_query", [](const std::string& raw) { return render_query(parse_query(raw)); },
          "Parses a keyword query and renders it back in canonical form.");
    m.def("sha256_hex", [](const py::bytes& b) { return sha256_hex(std::string(b)); });
    m.def("emit_finding_skills_doc", &emit_finding_skills_doc, py::arg("base_url") = std::string(kDefaultBaseUrl));

    m.def("recall_at_k",
          [](const std::vector<std::string>& retrieved, const std::set<std::string>& truth, std::size_t k) {
              return recall_at_k(retrieved, truth, k);
          });
    m.def(
        "rrf_fuse",
        [](const std::vector<std::pair<std::vector<std::string>, double>>& lists, double k) {
            std::vector<RankedList> owned;
            owned.reserve(lists.size());
            for (const auto& [ids, w] : lists) {
                RankedList l{ScoreKind::semantic, {}};
                for (std::size_t i = 0; i < ids.size(); ++i) l.hits.push_back({ids[i], -static_cast<double>(i)});
                owned.push_back(std::move(l));
            }
            std::vector<WeightedList> weighted;
            for (std::size_t i = 0; i < lists.size(); ++i) weighted.push_back({&owned[i], lists[i].second});
            std::vector<std::pair<std::string, double>> out;
            for (const auto& h : rrf_fuse(weighted, k).hits) out.emplace_back(h.skill_id, h.score);
            return out;
        },
        py::arg("lists"), py::arg("k") = 60.0, "Weighted reciprocal rank fusion of (ids, weight) pairs.");

    py::class_<CorpusManifest>(m, "Corpus")
        .def_static(
            "ingest",
            [](const std::filesystem::path& source, std::optional<std::string> created_at) {
                IngestOptions options;
                options.created_at = std::move(created_at);
                py::gil_scoped_release release;
                return ingest(source, options);
            },
            py::arg("source"), py::arg("created_at") = py::none())
        .def_static("load", &load_manifest)
        .def("save", [](const CorpusManifest& c, const std::filesystem::path& p) { save_manifest(c, p); })
        .def("serialize", [](const CorpusManifest& c) { return py::bytes(serialize_manifest(c)); })
        .def("__len__", [](const CorpusManifest& c) { return c.records.size(); })
        .def_property_readonly("skill_ids",
                               [](const CorpusManifest& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& r : c.records) ids.push_back(r.skill_id);
                                   return ids;
                               })
        .def_property_readonly("counts",
                               [](const CorpusManifest& c) {
                                   return py::dict(py::arg("scanned") = c.counts.scanned,
                                                   py::arg("rejected_license") = c.counts.rejected_license,
                                                   py::arg("rejected_invalid") = c.counts.rejected_invalid,
                                                   py::arg("rejected_duplicate") = c.counts.rejected_duplicate,
                                                   py::arg("kept") = c.counts.kept);
                               })
        .def_readonly("created_at", &CorpusManifest::created_at)
        .def("record", [](const CorpusManifest& c, const std::string& id) {
            const SkillRecord* r = c.find(id);
            if (!r) throw py::key_error(id);
            return record_dict(*r);
        });

    py::class_<EmbeddingProvider, std::shared_ptr<EmbeddingProvider>>(m, "EmbeddingProvider")
        .def(
            "embed",
            [](EmbeddingProvider& p, const std::vector<std::string>& texts, bool is_query) {
                py::gil_scoped_release release;
                return p.embed_batch(texts, is_query);
            },
            py::arg("texts"), py::arg("is_query") = false, "Raw provider call; no instruction prefix is added.")
        .def_property_readonly("model", [](EmbeddingProvider& p) { return p.fingerprint().model; })
        .def_property_readonly("dimension", [](EmbeddingProvider& p) { return p.fingerprint().dimension; });

    py::class_<HashEmbeddingProvider, EmbeddingProvider, std::shared_ptr<HashEmbeddingProvider>>(
        m, "HashEmbeddingProvider")
        .def(py::init<std::uint64_t, std::size_t>(), py::arg("seed") = 0, py::arg("dimension") = 64);

    py::class_<HttpEmbeddingProvider, EmbeddingProvider, std::shared_ptr<HttpEmbeddingProvider>>(
        m, "HttpEmbeddingProvider")
        .def(py::init([](std::string base_url, double timeout_s, int attempts) {
                 HttpProviderOptions o;
                 o.timeout = std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
                 o.attempts = attempts;
                 return std::make_shared<HttpEmbeddingProvider>(std::move(base_url), o);
             }),
             py::arg("base_url"), py::arg("timeout") = 30.0, py::arg("attempts") = 3);

    py::class_<SearchSettings>(m, "SearchSettings")
        .def(py::init<>())
        .def_property(
            "bm25_name_weight", [](const SearchSettings& s) { return s.lexical.weight_name; },
            [](SearchSettings& s, double v) { s.lexical.weight_name = v; })
        .def_property(
            "bm25_description_weight", [](const SearchSettings& s) { return s.lexical.weight_description; },
            [](SearchSettings& s, double v) { s.lexical.weight_description = v; })
        .def_property(
            "bm25_content_weight", [](const SearchSettings& s) { return s.lexical.weight_content; },
            [](SearchSettings& s, double v) { s.lexical.weight_content = v; })
        .def_property(
            "include_content_field", [](const SearchSettings& s) { return s.lexical.include_content_field; },
            [](SearchSettings& s, bool v) { s.lexical.include_content_field = v; })
        .def_property(
            "semantic_content_weight", [](const SearchSettings& s) { return s.semantic.content_weight; },
            [](SearchSettings& s, double v) { s.semantic.content_weight = v; })
        .def_property(
            "instruction", [](const SearchSettings& s) { return s.semantic.instruction_prefix; },
            [](SearchSettings& s, std::string v) { s.semantic.instruction_prefix = std::move(v); })
        .def_property(
            "rrf_k", [](const SearchSettings& s) { return s.fusion.rrf_k; },
            [](SearchSettings& s, double v) { s.fusion.rrf_k = v; })
        .def_property(
            "keyword_weight", [](const SearchSettings& s) { return s.fusion.keyword_weight; },
            [](SearchSettings& s, double v) { s.fusion.keyword_weight = v; })
        .def_property(
            "semantic_weight", [](const SearchSettings& s) { return s.fusion.semantic_weight; },
            [](SearchSettings& s, double v) { s.fusion.semantic_weight = v; })
        .def_property(
            "candidate_depth", [](const SearchSettings& s) { return s.fusion.candidate_depth; },
            [](SearchSettings& s, std::size_t v) { s.fusion.candidate_depth = v; });

    // Handlers return (status, json_body, headers); the Python package decodes them.
    py::class_<PyService, std::shared_ptr<PyService>>(m, "Service")
        .def(py::init([](std::shared_ptr<EmbeddingProvider> provider, std::optional<SearchSettings> settings) {
                 return std::make_shared<PyService>(std::move(provider), settings.value_or(SearchSettings{}));
             }),
             py::arg("provider"), py::arg("settings") = py::none())
        .def(
            "index",
            [](PyService& s, const CorpusManifest& corpus, std::size_t batch_size) {
                py::gil_scoped_release release;
                const auto& settings = s.service.settings();
                auto lexical = InvertedIndex::build(corpus, settings.lexical);
                auto dense = DenseIndex::build(corpus, *s.provider, settings.semantic, batch_size);
                s.service.install(make_snapshot(corpus, std::move(lexical), std::move(dense)));
            },
            py::arg("corpus"), py::arg("batch_size") = 64, "Builds both indexes in memory and serves them.")
        .def(
            "load",
            [](PyService& s, const std::filesystem::path& corpus, const std::filesystem::path& lexical,
               const std::filesystem::path& vectors) {
                py::gil_scoped_release release;
                s.service.install(make_snapshot(load_manifest(corpus), InvertedIndex::load(lexical),
                                                DenseIndex::load(vectors)));
            },
            py::arg("corpus"), py::arg("lexical_index"), py::arg("vector_store"))
        .def(
            "keyword",
            [](const PyService& s, const std::string& q, std::optional<std::size_t> top_k) {
                ServiceResponse r;
                {
                    py::gil_scoped_release release;
                    r = s.service.keyword(params(q, top_k));
                }
                return response_tuple(r);
            },
            py::arg("q"), py::arg("top_k") = py::none())
        .def(
            "semantic",
            [](const PyService& s, const std::string& q, std::optional<std::size_t> top_k) {
                ServiceResponse r;
                {
                    py::gil_scoped_release release;
                    r = s.service.semantic(params(q, top_k));
                }
                return response_tuple(r);
            },
            py::arg("q"), py::arg("top_k") = py::none())
        .def(
            "hybrid",
            [](const PyService& s, const std::string& q, std::optional<std::size_t> top_k,
               std::optional<double> keyword_weight, std::optional<double> semantic_weight) {
                QueryParams p = params(q, top_k);
                if (keyword_weight) p["keyword_weight"] = exact(*keyword_weight);
                if (semantic_weight) p["semantic_weight"] = exact(*semantic_weight);
                ServiceResponse r;
                {
                    py::gil_scoped_release release;
                    r = s.service.hybrid(p);
                }
                return response_tuple(r);
            },
            py::arg("q"), py::arg("top_k") = py::none(), py::arg("keyword_weight") = py::none(),
            py::arg("semantic_weight") = py::none())
        .def("detail", [](const PyService& s, const std::string& id) { return response_tuple(s.service.detail(id)); });

    py::class_<PyServer>(m, "Server")
        .def(py::init([](std::shared_ptr<PyService> service) { return std::make_unique<PyServer>(std::move(service)); }))
        .def("start", &PyServer::start, py::arg("host") = "127.0.0.1",
             "Serves on an ephemeral port in a background thread and returns the port.")
        .def("stop", &PyServer::stop, py::call_guard<py::gil_scoped_release>());
}
