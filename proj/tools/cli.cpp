#include "cli.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "skillhub/benchmark.hpp"
#include "skillhub/corpus.hpp"
#include "skillhub/dense_index.hpp"
#include "skillhub/embedding.hpp"
#include "skillhub/errors.hpp"
#include "skillhub/evaluation.hpp"
#include "skillhub/fusion.hpp"
#include "skillhub/lexical_index.hpp"
#include "skillhub/service.hpp"
#include "skillhub/skill_doc.hpp"

namespace skillhub::cli {

namespace {

/// Reads JSON when the file starts with '{', TOML/INI otherwise. Nested JSON
/// objects map to subcommand sections, the same way TOML tables do.
class JsonOrTomlConfig : public CLI::ConfigBase {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
        const auto first = text.find_first_not_of(" \t\r\n");
        std::vector<CLI::ConfigItem> items;
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream toml(text);
            items = CLI::ConfigBase::from_config(toml);
        } else {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(text);
            } catch (const nlohmann::json::exception& e) {
                throw CLI::ConfigError(std::string("config file is not valid JSON: ") + e.what());
            }
            flatten(doc, {}, items);
        }
        // CLI11 reads the file before the environment; drop keys a SKILLHUB_*
        // variable overrides so the environment wins.
        std::erase_if(items, [](const CLI::ConfigItem& item) {
            return item.parents.empty() && std::getenv(env_name(item.name).c_str()) != nullptr;
        });
        return items;
    }

    static std::string env_name(std::string_view option) {
        std::string name = "SKILLHUB_";
        for (char c : option) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return name;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto next = parents;
                next.push_back(key);
                flatten(value, next, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else if (!value.is_null()) {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct Globals {
    int port = kDefaultPort;
    std::string bind = "127.0.0.1";
    std::string corpus = "skillhub-corpus.jsonl";
    std::string lexical_index = "skillhub-lexical.idx";
    std::string vector_store = "skillhub-vectors.bin";
    std::string provider_url;
    std::uint64_t hash_seed = 0;
    std::size_t hash_dim = 64;
    std::string log_level = "warn";
    SearchSettings settings;
};

struct IngestArgs {
    std::string source;
    std::string out;
    std::string created_at;
    std::vector<std::string> licenses{"MIT", "Apache-2.0"};
};

struct IndexArgs {
    std::size_t batch_size = 64;
};

struct SearchArgs {
    std::string mode = "hybrid";
    std::string q;
    std::size_t top_k = kDefaultTopK;
    std::string detail;
};

struct EvalArgs {
    std::string mode = "direct";
    std::string ground_truth;
    std::string queries;
    std::string lists;
    std::string label = "Agentic (imported)";
    std::vector<std::size_t> cutoffs = kDefaultCutoffs;
    bool lenient = false;
    bool breakdown = false;
    std::string json_out;
    bool benchmark = false;
    BenchmarkOptions bench;
};

struct SweepArgs {
    std::string ground_truth;
    std::string queries;
    std::vector<double> content_field_weights{0.0, 1.0, 2.0, 5.0, 10.0};
    std::vector<double> semantic_weights{0.0, 0.05, 0.1, 0.2, 0.5};
    std::string aggregate = "max";
    std::size_t objective = 5;
    std::vector<std::size_t> cutoffs = kDefaultCutoffs;
    std::string json_out;
};

struct DocArgs {
    std::string base_url{kDefaultBaseUrl};
    std::string out;
};

std::atomic<bool> g_stop_requested{false};

extern "C" void on_signal(int) { g_stop_requested.store(true); }

void configure_logging(const std::string& level) {
    auto logger = spdlog::get("skillhub");
    if (!logger) logger = spdlog::stderr_color_mt("skillhub");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(level));
}

std::shared_ptr<EmbeddingProvider> make_provider(const Globals& g) {
    if (!g.provider_url.empty()) return std::make_shared<HttpEmbeddingProvider>(g.provider_url);
    spdlog::info("no --provider-url given, using the hash test provider (seed {}, dim {})", g.hash_seed, g.hash_dim);
    return std::make_shared<HashEmbeddingProvider>(g.hash_seed, g.hash_dim);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path);
    f << text;
    if (!f.flush()) throw Error("write failed: " + path);
}

void add_settings_flags(CLI::App& app, SearchSettings& s) {
    auto& lex = s.lexical;
    app.add_option("--bm25-name-weight", lex.weight_name, "BM25 weight of the name field")
        ->envname("SKILLHUB_BM25_NAME_WEIGHT")->capture_default_str();
    app.add_option("--bm25-description-weight", lex.weight_description, "BM25 weight of the description field")
        ->envname("SKILLHUB_BM25_DESCRIPTION_WEIGHT")->capture_default_str();
    app.add_option("--bm25-content-weight", lex.weight_content, "BM25 weight of the content field")
        ->envname("SKILLHUB_BM25_CONTENT_WEIGHT")->capture_default_str();
    app.add_option("--bm25-k1", lex.k1, "BM25 term frequency saturation")
        ->envname("SKILLHUB_BM25_K1")->capture_default_str();
    app.add_option("--bm25-b", lex.b, "BM25 length normalization")
        ->envname("SKILLHUB_BM25_B")->capture_default_str();
    app.add_option("--include-content-field", lex.include_content_field, "Index SKILL.md content for keyword search")
        ->envname("SKILLHUB_INCLUDE_CONTENT_FIELD")->capture_default_str();

    auto& sem = s.semantic;
    app.add_option("--semantic-content-weight", sem.content_weight, "Share of content similarity in the blend (w)")
        ->envname("SKILLHUB_SEMANTIC_CONTENT_WEIGHT")->capture_default_str();
    app.add_option("--instruction", sem.instruction_prefix, "Instruction prepended to queries before embedding")
        ->envname("SKILLHUB_INSTRUCTION")->capture_default_str();
    app.add_option("--normalize", sem.normalize, "L2-normalize vectors before storing them")
        ->envname("SKILLHUB_NORMALIZE")->capture_default_str();

    auto& fus = s.fusion;
    app.add_option("--rrf-k", fus.rrf_k, "Reciprocal rank fusion constant")
        ->envname("SKILLHUB_RRF_K")->capture_default_str();
    app.add_option("--keyword-weight", fus.keyword_weight, "Default fusion weight of the keyword list")
        ->envname("SKILLHUB_KEYWORD_WEIGHT")->capture_default_str();
    app.add_option("--semantic-weight", fus.semantic_weight, "Default fusion weight of the semantic list")
        ->envname("SKILLHUB_SEMANTIC_WEIGHT")->capture_default_str();
    app.add_option("--candidate-depth", fus.candidate_depth, "Hits taken from each list before fusing")
        ->envname("SKILLHUB_CANDIDATE_DEPTH")->capture_default_str();
}

std::shared_ptr<const IndexSnapshot> load_snapshot(const Globals& g) {
    CorpusManifest manifest = load_manifest(g.corpus);
    InvertedIndex lexical = InvertedIndex::load(g.lexical_index);
    DenseIndex dense = DenseIndex::load(g.vector_store);
    return make_snapshot(std::move(manifest), std::move(lexical), std::move(dense));
}

int cmd_ingest(const Globals& g, const IngestArgs& a, std::ostream& out) {
    IngestOptions options;
    options.license_allowlist.clear();
    for (const auto& tag : a.licenses) {
        const License l = License::parse(tag);
        if (l.kind == License::Kind::other) throw InvalidArgument("only MIT and Apache-2.0 can be allow-listed, got " + tag);
        options.license_allowlist.insert(l.kind);
    }
    if (!a.created_at.empty()) options.created_at = a.created_at;
    const CorpusManifest m = ingest(a.source, options);
    const std::string path = a.out.empty() ? g.corpus : a.out;
    save_manifest(m, path);
    out << nlohmann::ordered_json{{"manifest", path},
                                  {"scanned", m.counts.scanned},
                                  {"rejected_license", m.counts.rejected_license},
                                  {"rejected_invalid", m.counts.rejected_invalid},
                                  {"rejected_duplicate", m.counts.rejected_duplicate},
                                  {"kept", m.counts.kept}}
               .dump(2)
        << '\n';
    return kExitOk;
}

int cmd_index(const Globals& g, const IndexArgs& a, std::ostream& out) {
    const CorpusManifest m = load_manifest(g.corpus);
    auto provider = make_provider(g);
    const auto t0 = std::chrono::steady_clock::now();
    InvertedIndex::build(m, g.settings.lexical).save(g.lexical_index);
    DenseIndex::build(m, *provider, g.settings.semantic, a.batch_size).save(g.vector_store);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << "indexed " << m.records.size() << " skills in " << secs << " s\n"
        << "  lexical index  " << g.lexical_index << '\n'
        << "  vector store   " << g.vector_store << '\n';
    return kExitOk;
}

int cmd_serve(const Globals& g, std::ostream& out) {
    SkillService service(make_provider(g), g.settings);
    service.install(load_snapshot(g));
    SkillServer server(service);

    g_stop_requested.store(false);
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    std::atomic<bool> done{false};
    std::thread watcher([&] {
        while (!done.load()) {
            if (g_stop_requested.load()) {
                server.stop();
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
    });
    out << "serving " << service.snapshot()->manifest.records.size() << " skills on http://" << g.bind << ':'
        << g.port << '\n'
        << std::flush;
    const bool ok = server.listen(g.bind, g.port);
    done.store(true);
    watcher.join();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    if (!ok && !g_stop_requested.load()) throw Error("cannot listen on " + g.bind + ":" + std::to_string(g.port));
    return kExitOk;
}

int cmd_search(const Globals& g, const SearchArgs& a, std::ostream& out, std::ostream& err) {
    SkillService service(make_provider(g), g.settings);
    service.install(load_snapshot(g));
    ServiceResponse resp;
    if (!a.detail.empty()) {
        resp = service.detail(a.detail);
    } else {
        QueryParams params{{"q", a.q}, {"top_k", std::to_string(a.top_k)}};
        if (a.mode == "keyword") resp = service.keyword(params);
        else if (a.mode == "semantic") resp = service.semantic(params);
        else resp = service.hybrid(params);
    }
    for (const auto& [name, value] : resp.headers) err << name << ": " << value << '\n';
    if (resp.status != 200) {
        err << resp.body << '\n';
        return resp.status == 400 ? kExitUsage : kExitFailure;
    }
    out << resp.body << '\n';
    return kExitOk;
}

std::map<std::string, std::string> task_descriptions(const QuerySet& queries) {
    std::map<std::string, std::string> out;
    for (const auto& [task, tq] : queries) {
        if (!tq.description.empty()) out.emplace(task, tq.description);
        else if (!tq.queries.empty()) out.emplace(task, tq.queries.front());
        else throw FormatError("task " + task + " has neither a description nor queries");
    }
    return out;
}

void emit_report(const EvalReport& report, const EvalArgs& a, std::ostream& out) {
    out << report.render_table();
    if (a.breakdown) {
        for (std::size_t i = 0; i < report.methods.size(); ++i) out << '\n' << report.render_breakdown(i);
    }
    if (!a.json_out.empty()) write_text(a.json_out, report.to_json() + "\n");
}

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out) {
    if (a.benchmark) {
        const BenchmarkReport r = run_benchmark(a.bench);
        out << r.render();
        if (!a.json_out.empty()) write_text(a.json_out, r.to_json() + "\n");
        return kExitOk;
    }
    if (a.ground_truth.empty()) throw CLI::RequiredError("--ground-truth");
    const GroundTruth truth = load_ground_truth(a.ground_truth);
    EvalOptions options;
    options.cutoffs = a.cutoffs;
    options.strict = !a.lenient;

    if (a.mode == "lists") {
        if (a.lists.empty()) throw CLI::RequiredError("--lists");
        emit_report(evaluate_ranked_lists(load_ranked_lists(a.lists), truth, options, a.label), a, out);
        return kExitOk;
    }
    if (a.queries.empty()) throw CLI::RequiredError("--queries");
    const auto descriptions = task_descriptions(load_queries(a.queries));
    auto provider = make_provider(g);
    const DenseIndex dense = DenseIndex::load(g.vector_store);
    emit_report(evaluate_direct(dense, *provider, descriptions, truth, options, g.settings.semantic), a, out);
    return kExitOk;
}

int cmd_sweep(const Globals& g, const SweepArgs& a, std::ostream& out) {
    const GroundTruth truth = load_ground_truth(a.ground_truth);
    const QuerySet queries = load_queries(a.queries);
    SweepOptions options;
    options.cutoffs = a.cutoffs;
    options.objective_cutoff = a.objective;
    options.aggregate = a.aggregate == "mean" ? QueryAggregate::mean : QueryAggregate::max;

    // Content field weights only change scoring, but the field must exist.
    LexicalConfig lex = g.settings.lexical;
    lex.include_content_field = true;
    const InvertedIndex lexical = InvertedIndex::build(load_manifest(g.corpus), lex);
    const DenseIndex dense = DenseIndex::load(g.vector_store);
    auto provider = make_provider(g);
    SearchSettings base = g.settings;
    base.lexical = lex;

    const auto cells = sweep_weights({a.content_field_weights, a.semantic_weights}, queries, truth, lexical, dense,
                                     *provider, base, options);
    out << render_sweep_table(cells, a.cutoffs);
    if (!a.json_out.empty()) write_text(a.json_out, sweep_to_json(cells) + "\n");
    return kExitOk;
}

int cmd_emit_doc(const DocArgs& a, std::ostream& out) {
    const std::string doc = emit_finding_skills_doc(a.base_url);
    if (a.out.empty()) out << doc;
    else write_text(a.out, doc);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"skillhub: hybrid keyword + semantic search over agent skills", "skillhub"};
    app.config_formatter(std::make_shared<JsonOrTomlConfig>());
    app.set_config("--config", "", "TOML or JSON file mirroring the command-line flags");
    app.require_subcommand(1);

    Globals g;
    app.add_option("--port", g.port, "HTTP port")->envname("SKILLHUB_PORT")->capture_default_str()->check(
        CLI::Range(1, 65535));
    app.add_option("--bind", g.bind, "Address to listen on")->envname("SKILLHUB_BIND")->capture_default_str();
    app.add_option("--corpus", g.corpus, "Corpus manifest path")->envname("SKILLHUB_CORPUS")->capture_default_str();
    app.add_option("--lexical-index", g.lexical_index, "Lexical index path")
        ->envname("SKILLHUB_LEXICAL_INDEX")->capture_default_str();
    app.add_option("--vector-store", g.vector_store, "Vector store path")
        ->envname("SKILLHUB_VECTOR_STORE")->capture_default_str();
    app.add_option("--provider-url", g.provider_url, "Embedding sidecar base URL; the hash test provider when empty")
        ->envname("SKILLHUB_PROVIDER_URL");
    app.add_option("--hash-seed", g.hash_seed, "Seed of the hash test provider")
        ->envname("SKILLHUB_HASH_SEED")->capture_default_str();
    app.add_option("--hash-dim", g.hash_dim, "Dimension of the hash test provider")
        ->envname("SKILLHUB_HASH_DIM")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
        ->envname("SKILLHUB_LOG_LEVEL")->capture_default_str()
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
    add_settings_flags(app, g.settings);

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "Scan a skill tree and write the corpus manifest");
    ingest_cmd->add_option("--source", ingest_args.source, "Root directory laid out as <author>/<name>/")
        ->required()->check(CLI::ExistingDirectory);
    ingest_cmd->add_option("--out", ingest_args.out, "Manifest path (defaults to --corpus)");
    ingest_cmd->add_option("--created-at", ingest_args.created_at, "Fixed timestamp, for reproducible manifests");
    ingest_cmd->add_option("--allow-license", ingest_args.licenses, "Accepted license tags")->capture_default_str();

    IndexArgs index_args;
    auto* index_cmd = app.add_subcommand("index", "Build the lexical index and the vector store from the manifest");
    index_cmd->add_option("--batch-size", index_args.batch_size, "Texts per embedding request")
        ->capture_default_str()->check(CLI::PositiveNumber);

    auto* serve_cmd = app.add_subcommand("serve", "Serve the search API over HTTP");

    SearchArgs search_args;
    auto* search_cmd = app.add_subcommand("search", "Run one query and print the service response");
    search_cmd->add_option("--mode", search_args.mode, "keyword, semantic or hybrid")
        ->capture_default_str()->check(CLI::IsMember({"keyword", "semantic", "hybrid"}));
    search_cmd->add_option("--q", search_args.q, "Query string");
    search_cmd->add_option("--top-k", search_args.top_k, "Number of hits")->capture_default_str();
    search_cmd->add_option("--detail", search_args.detail, "Print the full record of one skill instead");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Recall@k reports and the latency benchmark");
    eval_cmd->add_option("--mode", eval_args.mode, "direct (task description as query) or lists (imported rankings)")
        ->capture_default_str()->check(CLI::IsMember({"direct", "lists"}));
    eval_cmd->add_option("--ground-truth", eval_args.ground_truth, "Ground truth JSON")->check(CLI::ExistingFile);
    eval_cmd->add_option("--queries", eval_args.queries, "Query/description JSON")->check(CLI::ExistingFile);
    eval_cmd->add_option("--lists", eval_args.lists, "Directory of <task_id>.txt rankings")
        ->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--label", eval_args.label, "Method label for imported lists")->capture_default_str();
    eval_cmd->add_option("--cutoffs", eval_args.cutoffs, "Recall cutoffs")->capture_default_str()->delimiter(',');
    eval_cmd->add_flag("--lenient", eval_args.lenient, "Skip unknown tasks and skills instead of failing");
    eval_cmd->add_flag("--breakdown", eval_args.breakdown, "Print per-task recall");
    eval_cmd->add_option("--json-out", eval_args.json_out, "Also write the report as JSON");
    eval_cmd->add_flag("--benchmark", eval_args.benchmark, "Run the synthetic-corpus latency benchmark");
    eval_cmd->add_option("--bench-skills", eval_args.bench.skills, "Benchmark corpus size")->capture_default_str();
    eval_cmd->add_option("--bench-queries", eval_args.bench.queries, "Benchmark query count")->capture_default_str();
    eval_cmd->add_option("--bench-dim", eval_args.bench.dimension, "Benchmark vector dimension")
        ->capture_default_str();
    eval_cmd->add_option("--bench-seed", eval_args.bench.seed, "Benchmark seed")->capture_default_str();

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid search over content field weight and w");
    sweep_cmd->add_option("--ground-truth", sweep_args.ground_truth, "Ground truth JSON")
        ->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--queries", sweep_args.queries, "Query JSON")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--content-field-weights", sweep_args.content_field_weights, "BM25 content weights")
        ->capture_default_str()->delimiter(',');
    sweep_cmd->add_option("--semantic-weights", sweep_args.semantic_weights, "Semantic content weights w")
        ->capture_default_str()->delimiter(',');
    sweep_cmd->add_option("--aggregate", sweep_args.aggregate, "Per-task aggregate over queries: max or mean")
        ->capture_default_str()->check(CLI::IsMember({"max", "mean"}));
    sweep_cmd->add_option("--objective", sweep_args.objective, "Cutoff used to rank cells")->capture_default_str();
    sweep_cmd->add_option("--cutoffs", sweep_args.cutoffs, "Recall cutoffs")->capture_default_str()->delimiter(',');
    sweep_cmd->add_option("--json-out", sweep_args.json_out, "Also write the table as JSON");

    DocArgs doc_args;
    auto* doc_cmd = app.add_subcommand("emit-skill-doc", "Write the finding-skills document for agents");
    doc_cmd->add_option("--base-url", doc_args.base_url, "Server base URL")->capture_default_str();
    doc_cmd->add_option("--out", doc_args.out, "Output file (stdout when omitted)");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        configure_logging(g.log_level);
        g.settings.lexical.validate();
        g.settings.semantic.validate();
        g.settings.fusion.validate();
        if (*ingest_cmd) return cmd_ingest(g, ingest_args, out);
        if (*index_cmd) return cmd_index(g, index_args, out);
        if (*serve_cmd) return cmd_serve(g, out);
        if (*search_cmd) {
            if (search_args.detail.empty() && search_args.q.empty()) throw CLI::RequiredError("--q");
            return cmd_search(g, search_args, out, err);
        }
        if (*eval_cmd) return cmd_eval(g, eval_args, out);
        if (*sweep_cmd) return cmd_sweep(g, sweep_args, out);
        if (*doc_cmd) return cmd_emit_doc(doc_args, out);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace skillhub::cli
