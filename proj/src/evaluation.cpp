#include "hyperrag/evaluation.hpp"

#include "hyperrag/errors.hpp"
#include "hyperrag/image.hpp"
#include "hyperrag/prompts.hpp"
#include "hyperrag/text.hpp"
#include "hyperrag/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace hyperrag {

using json = nlohmann::json;

namespace {

void reject_unknown_case_keys(const json& row, size_t line) {
    static const std::set<std::string> known = {"question", "query_image", "golden_answer",
                                               "tags"};
    for (const auto& [key, value] : row.items()) {
        (void)value;
        if (!known.count(key)) {
            throw Error(Errc::ConfigError,
                        "cases line " + std::to_string(line) + ": unknown key \"" + key + "\"");
        }
    }
}

}  // namespace

std::vector<EvalCase> load_eval_cases(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open cases file: " + path);
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::vector<EvalCase> cases;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw Error(Errc::ParseFailure,
                        "cases line " + std::to_string(line_no) + ": not a JSON object");
        }
        reject_unknown_case_keys(row, line_no);
        EvalCase c;
        c.question = row.value("question", std::string());
        c.golden_answer = row.value("golden_answer", std::string());
        if (trim(c.question).empty() || trim(c.golden_answer).empty()) {
            throw Error(Errc::ConfigError, "cases line " + std::to_string(line_no) +
                                               ": question and golden_answer must be non-empty");
        }
        if (row.contains("query_image")) {
            if (!row["query_image"].is_string()) {
                throw Error(Errc::ConfigError, "cases line " + std::to_string(line_no) +
                                                   ": query_image must be a string path");
            }
            std::filesystem::path p = row["query_image"].get<std::string>();
            if (p.is_relative()) p = base / p;
            c.query_image = p.string();
        }
        if (row.contains("tags")) {
            if (!row["tags"].is_array()) {
                throw Error(Errc::ConfigError, "cases line " + std::to_string(line_no) +
                                                   ": tags must be an array of strings");
            }
            for (const auto& tag : row["tags"]) {
                if (!tag.is_string()) {
                    throw Error(Errc::ConfigError, "cases line " + std::to_string(line_no) +
                                                       ": tags must be an array of strings");
                }
                c.tags.push_back(tag.get<std::string>());
            }
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

double f1_score(const std::string& prediction, const std::string& gold) {
    return token_set_f1(token_set(prediction), token_set(gold));
}

double retrieval_similarity(const std::string& prediction, const std::string& gold,
                            TextEmbedProvider& embed) {
    if (trim(prediction).empty() || trim(gold).empty()) {
        return 0.0;
    }
    std::vector<float> a = embed.embed_text(prediction);
    std::vector<float> b = embed.embed_text(gold);
    double na = l2_norm(a);
    double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    double dot = 0.0;
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return std::clamp(dot / (na * nb), 0.0, 1.0);
}

JudgeOutcome generation_eval(const std::string& question, const std::string& prediction,
                             const std::string& gold, ChatProvider& chat,
                             const std::string& judge_template) {
    const std::string tpl =
        judge_template.empty() ? default_judge_template() : judge_template;
    const std::string prompt = render_template(
        tpl, {{"question", question}, {"prediction", prediction}, {"gold", gold}});

    JudgeOutcome out;
    auto parse_score = [&out](const std::string& response) -> std::optional<double> {
        json j = json::parse(response, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            size_t first = response.find('{');
            size_t last = response.rfind('}');
            if (first == std::string::npos || last == std::string::npos || last <= first) {
                return std::nullopt;
            }
            j = json::parse(response.substr(first, last - first + 1), nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                return std::nullopt;
            }
        }
        double sum = 0.0;
        size_t n = 0;
        for (const auto& [key, value] : j.items()) {
            if (!value.is_number()) continue;
            double v = value.get<double>();
            if (v < 0.0 || v > 1.0) {
                out.warnings.push_back("judge aspect \"" + key + "\" out of [0,1], clamped");
                v = std::clamp(v, 0.0, 1.0);
            }
            sum += v;
            ++n;
        }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    };

    std::string response = chat.chat(prompt, {}, std::nullopt);
    std::optional<double> score = parse_score(response);
    if (!score) {
        out.repair_calls = 1;
        response = chat.chat(prompt + "\n\nReturn only valid JSON.", {}, std::nullopt);
        score = parse_score(response);
    }
    out.score = score;
    return out;
}

EvalReport evaluate_cases(const KnowledgeBase& kb, const std::vector<EvalCase>& cases,
                          const std::set<int>& criteria, int k,
                          const ProviderSet& providers, ProviderCache* cache,
                          const EvalOptions& options) {
    if (cases.empty()) {
        throw Error(Errc::EmptyInput, "no eval cases given");
    }
    if (k < 1) {
        throw Error(Errc::EmptyInput, "k must be >= 1");
    }
    if (!providers.chat || !providers.embed_text) {
        throw Error(Errc::ConfigError, "eval requires chat and text embedding providers");
    }

    EvalReport report;
    report.mode = options.mode;
    report.criteria = criteria;
    report.k = k;

    GenerationOptions gen_options;
    gen_options.generate_template = options.generate_template;
    gen_options.context_budget_words = options.context_budget_words;

    double sum_f1 = 0.0;
    double sum_rs = 0.0;
    double sum_ge = 0.0;
    size_t valid_ge = 0;

    for (size_t i = 0; i < cases.size(); ++i) {
        const EvalCase& c = cases[i];
        Query query;
        query.text = c.question;
        query.k = k;
        query.mode = options.mode;
        query.criteria = criteria;
        if (c.query_image) {
            query.image = read_file_bytes(*c.query_image);
        }

        RetrievalResult retrieval;
        if (query.mode != GenerationMode::Naive) {
            retrieval = retrieve(kb, query, providers, cache);
        }
        GenerationResult generated =
            generate_answer(kb, query, retrieval, providers, gen_options);

        CaseResult result;
        result.index = i;
        result.question = c.question;
        result.prediction = generated.answer;
        result.f1 = f1_score(generated.answer, c.golden_answer);
        result.rs =
            retrieval_similarity(generated.answer, c.golden_answer, *providers.embed_text);

        JudgeOutcome judge = generation_eval(c.question, generated.answer, c.golden_answer,
                                             *providers.chat, options.judge_template);
        report.judge_repair_calls += static_cast<size_t>(judge.repair_calls);
        for (const auto& warning : judge.warnings) {
            report.warnings.push_back("case " + std::to_string(i) + ": " + warning);
        }
        if (judge.score) {
            result.ge = judge.score;
            sum_ge += *judge.score;
            ++valid_ge;
        } else {
            report.invalid_ge += 1;
            report.warnings.push_back("case " + std::to_string(i) +
                                      ": judge output invalid, excluded from mean");
        }

        sum_f1 += result.f1;
        sum_rs += result.rs;
        report.cases.push_back(std::move(result));
    }

    report.mean_f1 = sum_f1 / static_cast<double>(cases.size());
    report.mean_rs = sum_rs / static_cast<double>(cases.size());
    if (valid_ge > 0) {
        report.mean_ge = sum_ge / static_cast<double>(valid_ge);
    }
    return report;
}

std::vector<LambdaSet> default_ablation_subsets() {
    return {{1}, {1, 2}, {1, 2, 3}, {1, 2, 3, 4}};
}

std::vector<EvalReport> run_ablation(const KnowledgeBase& kb,
                                     const std::vector<EvalCase>& cases,
                                     const std::vector<LambdaSet>& lambda_subsets,
                                     const std::vector<int>& k_values,
                                     const ProviderSet& providers, ProviderCache* cache,
                                     const EvalOptions& options) {
    if (lambda_subsets.empty() || k_values.empty()) {
        throw Error(Errc::EmptyInput, "ablation needs at least one lambda subset and one k");
    }
    for (const auto& subset : lambda_subsets) {
        for (int lambda : subset) {
            if (lambda < 1 || lambda > 4) {
                throw Error(Errc::ConfigError,
                            "lambda out of range: " + std::to_string(lambda));
            }
        }
    }
    std::vector<EvalReport> reports;
    reports.reserve(lambda_subsets.size() * k_values.size());
    for (const auto& subset : lambda_subsets) {
        const std::set<int> criteria = criteria_for_lambdas(subset);
        for (int k : k_values) {
            EvalReport report =
                evaluate_cases(kb, cases, criteria, k, providers, cache, options);
            report.lambdas = subset;
            reports.push_back(std::move(report));
        }
    }
    return reports;
}

nlohmann::json report_to_json(const EvalReport& report) {
    json cases = json::array();
    for (const auto& c : report.cases) {
        json row = {{"index", c.index}, {"question", c.question},
                    {"prediction", c.prediction}, {"f1", c.f1},
                    {"rs", c.rs},                 {"ge", nullptr}};
        if (c.ge) row["ge"] = *c.ge;
        cases.push_back(std::move(row));
    }
    json criteria = json::array();
    for (int criterion : report.criteria) criteria.push_back(criterion_name(criterion));
    json j = {{"mode", generation_mode_name(report.mode)},
              {"lambdas", report.lambdas},
              {"criteria", criteria},
              {"k", report.k},
              {"mean_f1", report.mean_f1},
              {"mean_rs", report.mean_rs},
              {"mean_ge", nullptr},
              {"invalid_ge", report.invalid_ge},
              {"judge_repair_calls", report.judge_repair_calls},
              {"cases", cases},
              {"warnings", report.warnings}};
    if (report.mean_ge) j["mean_ge"] = *report.mean_ge;
    return j;
}

nlohmann::json ablation_to_json(const std::vector<EvalReport>& reports) {
    json cells = json::array();
    for (const auto& report : reports) cells.push_back(report_to_json(report));
    return json{{"cells", cells}};
}

}  // namespace hyperrag
