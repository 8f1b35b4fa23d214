#include "skillhub/evaluation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "skillhub/errors.hpp"
#include "skillhub/text.hpp"

namespace skillhub {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
    return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string cutoff_header(std::size_t k) { return "Recall@" + std::to_string(k); }

ordered_json recall_json(const std::map<std::size_t, double>& m) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : m) j["recall@" + std::to_string(k)] = v;
    return j;
}

}  // namespace

GroundTruth parse_ground_truth(std::string_view json_text) {
    GroundTruth truth;
    try {
        const auto j = nlohmann::json::parse(json_text);
        for (const auto& [task, entry] : j.at("tasks").items()) {
            std::set<std::string> skills;
            for (const auto& s : entry.at("skills")) skills.insert(s.get<std::string>());
            if (skills.empty()) throw InvalidArgument("ground truth for task " + task + " is empty");
            truth.emplace(task, std::move(skills));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("ground truth file: ") + e.what());
    }
    return truth;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) { return parse_ground_truth(read_text(path)); }

QuerySet parse_queries(std::string_view json_text) {
    QuerySet set;
    try {
        const auto j = nlohmann::json::parse(json_text);
        for (const auto& [task, entry] : j.at("tasks").items()) {
            TaskQueries tq;
            if (entry.contains("queries")) tq.queries = entry["queries"].get<std::vector<std::string>>();
            tq.description = entry.value("description", "");
            set.emplace(task, std::move(tq));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("query file: ") + e.what());
    }
    return set;
}

QuerySet load_queries(const std::filesystem::path& path) { return parse_queries(read_text(path)); }

RankedLists load_ranked_lists(const std::filesystem::path& directory) {
    if (!std::filesystem::is_directory(directory)) throw Error("not a directory: " + directory.string());
    RankedLists lists;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        const std::string task = entry.path().stem().string();
        std::vector<std::string> ids;
        std::unordered_set<std::string> seen;
        std::istringstream in(read_text(entry.path()));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto id = std::string(text::trim(line));
            if (id.empty()) continue;
            if (!seen.insert(id).second) {
                throw FormatError("ranked list for task " + task + ": duplicate skill_id '" + id + "' on line " +
                                  std::to_string(line_no));
            }
            ids.push_back(id);
        }
        lists.emplace(task, std::move(ids));
    }
    return lists;
}

double recall_at_k(std::span<const std::string> retrieved, const std::set<std::string>& truth, std::size_t k) {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    if (truth.empty()) throw InvalidArgument("ground truth set is empty");
    const std::size_t n = std::min(k, retrieved.size());
    std::unordered_set<std::string_view> counted;
    std::size_t found = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (truth.contains(retrieved[i]) && counted.insert(retrieved[i]).second) ++found;
    }
    return static_cast<double>(found) / static_cast<double>(truth.size());
}

MethodResult evaluate_lists(const std::string& label, const RankedLists& lists, const GroundTruth& truth,
                            const EvalOptions& options) {
    if (options.cutoffs.empty()) throw InvalidArgument("no cutoffs requested");
    MethodResult result;
    result.label = label;
    for (const auto& [task, ids] : lists) {
        auto it = truth.find(task);
        if (it == truth.end()) {
            if (options.strict) throw InvalidArgument("task " + task + " has no ground truth");
            spdlog::warn("skipping task {}: no ground truth", task);
            result.skipped_tasks.push_back(task);
            continue;
        }
        std::unordered_set<std::string_view> seen;
        for (const auto& id : ids) {
            if (!seen.insert(id).second) throw InvalidArgument("ranked list for task " + task + " repeats " + id);
        }
        auto& row = result.per_task[task];
        for (std::size_t k : options.cutoffs) row[k] = recall_at_k(ids, it->second, k);
    }
    for (std::size_t k : options.cutoffs) {
        double sum = 0.0;
        for (const auto& [task, row] : result.per_task) sum += row.at(k);
        result.mean[k] = result.per_task.empty() ? 0.0 : sum / static_cast<double>(result.per_task.size());
    }
    return result;
}

EvalReport evaluate_ranked_lists(const RankedLists& lists, const GroundTruth& truth, const EvalOptions& options,
                                 const std::string& label) {
    EvalReport report;
    report.cutoffs = options.cutoffs;
    report.methods.push_back(evaluate_lists(label, lists, truth, options));
    return report;
}

RankedLists direct_rankings(const DenseIndex& dense, EmbeddingProvider& provider,
                            const std::map<std::string, std::string>& task_descriptions, std::size_t depth,
                            SemanticConfig config) {
    config.content_weight = 0.0;
    RankedLists lists;
    for (const auto& [task, description] : task_descriptions) {
        const auto vec = embed({description}, true, provider, config, dense.dimension());
        lists.emplace(task, dense.search(vec.front(), depth, config).ids());
    }
    return lists;
}

EvalReport evaluate_direct(const DenseIndex& dense, EmbeddingProvider& provider,
                           const std::map<std::string, std::string>& task_descriptions, const GroundTruth& truth,
                           const EvalOptions& options, SemanticConfig config) {
    if (options.cutoffs.empty()) throw InvalidArgument("no cutoffs requested");
    if (options.strict) {
        for (const auto& [task, skills] : truth) {
            for (const auto& id : skills) {
                if (!dense.ordinal_of(id)) throw InvalidArgument("ground truth skill " + id + " (task " + task + ") is not in the corpus");
            }
        }
    }
    const std::size_t depth = *std::max_element(options.cutoffs.begin(), options.cutoffs.end());
    std::map<std::string, std::string> evaluable;
    for (const auto& [task, description] : task_descriptions) {
        if (!truth.contains(task)) {
            if (options.strict) throw InvalidArgument("task " + task + " has no ground truth");
            spdlog::warn("skipping task {}: no ground truth", task);
            continue;
        }
        evaluable.emplace(task, description);
    }
    const RankedLists lists = direct_rankings(dense, provider, evaluable, depth, config);

    EvalReport report;
    report.cutoffs = options.cutoffs;
    report.methods.push_back(evaluate_lists("Direct (semantic)", lists, truth, options));
    for (const auto& [task, _] : task_descriptions) {
        if (!truth.contains(task)) report.methods.back().skipped_tasks.push_back(task);
    }
    report.config["semantic_content_weight"] = 0.0;
    return report;
}

std::string EvalReport::render_table() const {
    std::size_t label_width = std::string("Method").size();
    for (const auto& m : methods) label_width = std::max(label_width, m.label.size());
    std::ostringstream out;
    out << pad_right("Method", label_width);
    for (std::size_t k : cutoffs) out << "  " << cutoff_header(k);
    out << '\n';
    for (const auto& m : methods) {
        out << pad_right(m.label, label_width);
        for (std::size_t k : cutoffs) {
            auto it = m.mean.find(k);
            out << "  " << pad_left(it == m.mean.end() ? "-" : percent(it->second), cutoff_header(k).size());
        }
        out << '\n';
    }
    return out.str();
}

std::string EvalReport::render_breakdown(std::size_t method_index) const {
    const MethodResult& m = methods.at(method_index);
    std::size_t width = std::string("Task").size();
    for (const auto& [task, _] : m.per_task) width = std::max(width, task.size());
    std::ostringstream out;
    out << pad_right("Task", width);
    for (std::size_t k : cutoffs) out << "  " << cutoff_header(k);
    out << '\n';
    for (const auto& [task, row] : m.per_task) {
        out << pad_right(task, width);
        for (std::size_t k : cutoffs) out << "  " << pad_left(percent(row.at(k)), cutoff_header(k).size());
        out << '\n';
    }
    return out.str();
}

std::string EvalReport::to_json() const {
    ordered_json j;
    j["cutoffs"] = cutoffs;
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    j["methods"] = ordered_json::array();
    for (const auto& m : methods) {
        ordered_json per_task = ordered_json::object();
        for (const auto& [task, row] : m.per_task) per_task[task] = recall_json(row);
        j["methods"].push_back(ordered_json{{"label", m.label},
                                            {"recall", recall_json(m.mean)},
                                            {"tasks_evaluated", m.per_task.size()},
                                            {"skipped_tasks", m.skipped_tasks},
                                            {"per_task", std::move(per_task)}});
    }
    return j.dump(2);
}

std::vector<SweepCell> sweep_weights(const SweepGrid& grid, const QuerySet& queries, const GroundTruth& truth,
                                     const InvertedIndex& lexical, const DenseIndex& dense,
                                     EmbeddingProvider& provider, const SearchSettings& base,
                                     const SweepOptions& options) {
    if (grid.content_field_weights.empty() || grid.semantic_content_weights.empty()) {
        throw InvalidArgument("sweep grid is empty");
    }
    if (options.cutoffs.empty()) throw InvalidArgument("no cutoffs requested");
    if (std::find(options.cutoffs.begin(), options.cutoffs.end(), options.objective_cutoff) == options.cutoffs.end()) {
        throw InvalidArgument("objective cutoff must be one of the reported cutoffs");
    }
    const std::size_t depth = *std::max_element(options.cutoffs.begin(), options.cutoffs.end());

    // Task -> the query strings used for it.
    std::map<std::string, std::vector<std::string>> plan;
    for (const auto& [task, tq] : queries) {
        if (!truth.contains(task)) {
            spdlog::warn("sweep: skipping task {} without ground truth", task);
            continue;
        }
        std::vector<std::string> qs = tq.queries;
        if (qs.empty() && !text::trim(tq.description).empty()) qs.push_back(tq.description);
        if (!qs.empty()) plan.emplace(task, std::move(qs));
    }
    if (plan.empty()) throw InvalidArgument("no sweep queries match the ground truth");

    std::unordered_map<std::string, EmbeddingVector> cache;
    std::vector<SweepCell> cells;
    for (double content_w : grid.content_field_weights) {
        for (double sem_w : grid.semantic_content_weights) {
            SweepCell cell;
            cell.content_field_weight = content_w;
            cell.semantic_content_weight = sem_w;
            try {
                SearchSettings settings = base;
                settings.lexical.weight_content = content_w;
                settings.semantic.content_weight = sem_w;
                settings.lexical.validate();
                settings.semantic.validate();

                std::map<std::size_t, double> sums;
                for (const auto& [task, qs] : plan) {
                    std::map<std::size_t, double> agg;
                    for (const auto& q : qs) {
                        auto it = cache.find(q);
                        if (it == cache.end()) {
                            auto vec = embed({q}, true, provider, settings.semantic, dense.dimension());
                            it = cache.emplace(q, std::move(vec.front())).first;
                        }
                        const auto ids = search_hybrid(lexical, dense, q, it->second, depth, settings).list.ids();
                        for (std::size_t k : options.cutoffs) {
                            const double r = recall_at_k(ids, truth.at(task), k);
                            if (options.aggregate == QueryAggregate::max) agg[k] = std::max(agg[k], r);
                            else agg[k] += r / static_cast<double>(qs.size());
                        }
                    }
                    for (std::size_t k : options.cutoffs) sums[k] += agg[k];
                }
                for (std::size_t k : options.cutoffs) cell.recall[k] = sums[k] / static_cast<double>(plan.size());
            } catch (const std::exception& e) {
                spdlog::warn("sweep cell (content={}, w={}) failed: {}", content_w, sem_w, e.what());
                cell.failed = true;
                cell.error = e.what();
                cell.recall.clear();
            }
            cells.push_back(std::move(cell));
        }
    }

    const std::size_t objective = options.objective_cutoff;
    std::stable_sort(cells.begin(), cells.end(), [objective](const SweepCell& a, const SweepCell& b) {
        if (a.failed != b.failed) return !a.failed;
        if (a.failed) return false;
        const double ra = a.recall.at(objective);
        const double rb = b.recall.at(objective);
        if (ra != rb) return ra > rb;
        if (a.semantic_content_weight != b.semantic_content_weight) {
            return a.semantic_content_weight < b.semantic_content_weight;
        }
        return a.content_field_weight < b.content_field_weight;
    });
    std::size_t rank = 0;
    for (auto& c : cells) c.rank = c.failed ? 0 : ++rank;
    return cells;
}

std::string render_sweep_table(const std::vector<SweepCell>& cells, const std::vector<std::size_t>& cutoffs) {
    std::ostringstream out;
    out << "Rank  BM25 content  Semantic w";
    for (std::size_t k : cutoffs) out << "  " << cutoff_header(k);
    out << '\n';
    for (const auto& c : cells) {
        char head[64];
        std::snprintf(head, sizeof head, "%4s  %12g  %10g", c.failed ? "-" : std::to_string(c.rank).c_str(),
                      c.content_field_weight, c.semantic_content_weight);
        out << head;
        for (std::size_t k : cutoffs) {
            auto it = c.recall.find(k);
            out << "  " << pad_left(it == c.recall.end() ? "failed" : percent(it->second), cutoff_header(k).size());
        }
        out << '\n';
    }
    return out.str();
}

std::string sweep_to_json(const std::vector<SweepCell>& cells) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : cells) {
        ordered_json j{{"rank", c.rank},
                       {"bm25_content_weight", c.content_field_weight},
                       {"semantic_content_weight", c.semantic_content_weight},
                       {"failed", c.failed}};
        if (c.failed) j["error"] = c.error;
        else j["recall"] = recall_json(c.recall);
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

}  // namespace skillhub
