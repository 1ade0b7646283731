// Answer quality metrics and the lambda-subset/k ablation runner.
#pragma once

#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"
#include "hyperrag/retrieval.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hyperrag {

struct EvalCase {
    std::string question;
    std::optional<std::string> query_image;  // path, resolved against the cases file
    std::string golden_answer;
    std::vector<std::string> tags;

    bool operator==(const EvalCase&) const = default;
};

// JSONL, one case per line. question and golden_answer must be non-empty;
// unknown keys are rejected. query_image paths are resolved against the
// directory containing the file.
std::vector<EvalCase> load_eval_cases(const std::string& path);

// Word-level F1 over deduplicated normalized token sets. Symmetric. 0 when
// either set is empty or the sets are disjoint.
double f1_score(const std::string& prediction, const std::string& gold);

// Cosine similarity of the two answer embeddings, clamped to [0,1].
double retrieval_similarity(const std::string& prediction, const std::string& gold,
                            TextEmbedProvider& embed);

struct JudgeOutcome {
    std::optional<double> score;  // empty when the judge output stayed unusable
    int repair_calls = 0;         // 0 or 1
    std::vector<std::string> warnings;
};

// Sends the rendered judge prompt, averages the numeric aspect scores in
// the returned JSON object (each clamped to [0,1] with a warning). Output
// without any numeric aspect gets one repair retry, then the case is
// marked invalid.
JudgeOutcome generation_eval(const std::string& question, const std::string& prediction,
                             const std::string& gold, ChatProvider& chat,
                             const std::string& judge_template);

struct CaseResult {
    size_t index = 0;
    std::string question;
    std::string prediction;
    double f1 = 0.0;
    double rs = 0.0;
    std::optional<double> ge;
};

struct EvalReport {
    GenerationMode mode = GenerationMode::Nico;
    LambdaSet lambdas;        // subset the criteria were derived from; empty if
                              // criteria were given directly
    std::set<int> criteria;
    int k = 8;
    std::vector<CaseResult> cases;
    double mean_f1 = 0.0;
    double mean_rs = 0.0;
    std::optional<double> mean_ge;  // empty when no case produced a valid score
    size_t invalid_ge = 0;
    size_t judge_repair_calls = 0;
    std::vector<std::string> warnings;
};

struct EvalOptions {
    GenerationMode mode = GenerationMode::Nico;
    std::string generate_template;  // empty selects the built-in default
    std::string judge_template;     // empty selects the built-in default
    size_t context_budget_words = 6000;
};

// Runs every case through retrieval + generation with the given criteria
// and k, then scores the answers. Cases keep file order in the report.
EvalReport evaluate_cases(const KnowledgeBase& kb, const std::vector<EvalCase>& cases,
                          const std::set<int>& criteria, int k,
                          const ProviderSet& providers, ProviderCache* cache,
                          const EvalOptions& options);

// {l1}, {l1,l2}, {l1,l2,l3}, {l1..l4}
std::vector<LambdaSet> default_ablation_subsets();

// One report per (subset, k) cell, subsets outermost. Criteria are derived
// per subset (criterion i always on) and disabled at retrieval time; the KB
// is not rebuilt.
std::vector<EvalReport> run_ablation(const KnowledgeBase& kb,
                                     const std::vector<EvalCase>& cases,
                                     const std::vector<LambdaSet>& lambda_subsets,
                                     const std::vector<int>& k_values,
                                     const ProviderSet& providers, ProviderCache* cache,
                                     const EvalOptions& options);

nlohmann::json report_to_json(const EvalReport& report);
nlohmann::json ablation_to_json(const std::vector<EvalReport>& reports);

}  // namespace hyperrag
