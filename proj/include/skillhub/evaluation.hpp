#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "skillhub/dense_index.hpp"
#include "skillhub/fusion.hpp"
#include "skillhub/lexical_index.hpp"

namespace skillhub {

/// task_id -> curated skill_ids.
using GroundTruth = std::map<std::string, std::set<std::string>>;

struct TaskQueries {
    std::vector<std::string> queries;
    std::string description;
};
using QuerySet = std::map<std::string, TaskQueries>;

/// task_id -> retrieved skill_ids, best first.
using RankedLists = std::map<std::string, std::vector<std::string>>;

/// {"tasks": {task_id: {"skills": [skill_id, ...]}}}
GroundTruth parse_ground_truth(std::string_view json_text);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// {"tasks": {task_id: {"queries": [...], "description": "..."}}}
QuerySet parse_queries(std::string_view json_text);
QuerySet load_queries(const std::filesystem::path& path);

/// One `<task_id>.txt` per task, one skill_id per line, best first. Blank
/// lines are ignored; a repeated skill_id is an error naming the task.
RankedLists load_ranked_lists(const std::filesystem::path& directory);

/// |truth ∩ top-k(retrieved)| / |truth|. Lists shorter than k count what they
/// have. Throws InvalidArgument for k == 0 or empty truth.
double recall_at_k(std::span<const std::string> retrieved, const std::set<std::string>& truth, std::size_t k);

inline const std::vector<std::size_t> kDefaultCutoffs{3, 5, 10};

struct MethodResult {
    std::string label;
    /// Mean recall over evaluated tasks, keyed by cutoff.
    std::map<std::size_t, double> mean;
    std::map<std::string, std::map<std::size_t, double>> per_task;
    std::vector<std::string> skipped_tasks;
};

struct EvalReport {
    std::vector<std::size_t> cutoffs;
    std::vector<MethodResult> methods;
    std::map<std::string, double> config;

    /// Aligned text table, recalls in percent with one decimal.
    std::string render_table() const;
    /// Per-task breakdown for one method.
    std::string render_breakdown(std::size_t method_index) const;
    std::string to_json() const;
};

struct EvalOptions {
    std::vector<std::size_t> cutoffs = kDefaultCutoffs;
    /// Unknown tasks and unknown ground-truth skills are errors when set,
    /// skipped with a warning otherwise.
    bool strict = true;
};

MethodResult evaluate_lists(const std::string& label, const RankedLists& lists, const GroundTruth& truth,
                            const EvalOptions& options);

EvalReport evaluate_ranked_lists(const RankedLists& lists, const GroundTruth& truth, const EvalOptions& options,
                                 const std::string& label = "Agentic (imported)");

/// Top-k rankings for each task description over the metadata vectors only.
RankedLists direct_rankings(const DenseIndex& dense, EmbeddingProvider& provider,
                            const std::map<std::string, std::string>& task_descriptions, std::size_t depth,
                            SemanticConfig config = {});

/// Direct search: each task description is the query, scored by metadata
/// similarity alone (content weight forced to 0).
EvalReport evaluate_direct(const DenseIndex& dense, EmbeddingProvider& provider,
                           const std::map<std::string, std::string>& task_descriptions, const GroundTruth& truth,
                           const EvalOptions& options, SemanticConfig config = {});

struct SweepGrid {
    std::vector<double> content_field_weights;  // BM25 content field weight
    std::vector<double> semantic_content_weights;  // w
};

enum class QueryAggregate { max, mean };

struct SweepCell {
    double content_field_weight = 0;
    double semantic_content_weight = 0;
    bool failed = false;
    std::string error;
    std::map<std::size_t, double> recall;
    /// 1-based position in the ranking; 0 for failed cells.
    std::size_t rank = 0;
};

struct SweepOptions {
    std::vector<std::size_t> cutoffs = kDefaultCutoffs;
    std::size_t objective_cutoff = 5;
    QueryAggregate aggregate = QueryAggregate::max;
};

/// Scores every grid cell with direct hybrid search over the supplied
/// queries: per-task aggregate over that task's queries, mean over tasks.
/// Cells are returned best first by Recall@objective_cutoff, ties by smaller
/// w, then smaller content field weight; failed cells come last.
std::vector<SweepCell> sweep_weights(const SweepGrid& grid, const QuerySet& queries, const GroundTruth& truth,
                                     const InvertedIndex& lexical, const DenseIndex& dense,
                                     EmbeddingProvider& provider, const SearchSettings& base,
                                     const SweepOptions& options = {});

std::string render_sweep_table(const std::vector<SweepCell>& cells, const std::vector<std::size_t>& cutoffs);
std::string sweep_to_json(const std::vector<SweepCell>& cells);

}  // namespace skillhub
