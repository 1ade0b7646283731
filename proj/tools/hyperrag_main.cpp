#include "hyperrag/config.hpp"
#include "hyperrag/construction.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/evaluation.hpp"
#include "hyperrag/image.hpp"
#include "hyperrag/kb_store.hpp"
#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"
#include "hyperrag/retrieval.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hyperrag;

namespace {

struct BuildArgs {
    std::string corpus;
    std::string out;
    std::vector<int> lambdas;
};

struct QueryArgs {
    std::string kb;
    std::string text;
    std::string image;
    int k = 0;  // 0: take the config default
    std::string mode;
    std::vector<std::string> criteria;
};

struct EvalArgs {
    std::string kb;
    std::string cases;
    std::string mode;
    bool ablate = false;
    std::vector<int> k_values;
    std::string out;
};

std::string cache_dir_for(const AppConfig& config, const std::string& kb_dir) {
    return config.cache_dir.empty() ? kb_dir : config.cache_dir;
}

json scored_items_json(const std::vector<ScoredItem>& items) {
    json out = json::array();
    for (const auto& item : items) {
        out.push_back(
            {{"id", item.id}, {"score", item.score}, {"provenance", item.provenance}});
    }
    return out;
}

json image_matches_json(const std::vector<ImageMatch>& matches) {
    json out = json::array();
    for (const auto& match : matches) {
        out.push_back({{"id", match.id},
                       {"fused_score", match.fused_score},
                       {"criterion_scores", match.criterion_scores},
                       {"skipped_criteria", match.skipped_criteria}});
    }
    return out;
}

int cmd_build(const AppConfig& config, const BuildArgs& args) {
    if (!fs::exists(args.corpus)) {
        throw Error(Errc::IoError, "corpus file not found: " + args.corpus);
    }
    CorpusSpec corpus = load_corpus_spec(args.corpus);
    {
        // Config fills construction defaults the corpus file left unset.
        std::ifstream in(args.corpus);
        json raw = json::parse(in, nullptr, false);
        if (raw.is_object() && !raw.contains("chunk_size")) {
            corpus.chunk_size = config.chunk_size;
        }
        if (raw.is_object() && !raw.contains("chunk_overlap")) {
            corpus.chunk_overlap = config.chunk_overlap;
        }
    }
    corpus.enabled_lambdas = config.lambdas;
    if (!args.lambdas.empty()) {
        corpus.enabled_lambdas = LambdaSet(args.lambdas.begin(), args.lambdas.end());
    }

    ProviderSet providers = make_providers(config.providers, nullptr);
    fs::create_directories(args.out);
    ProviderCache cache =
        ProviderCache::open(cache_dir_for(config, args.out), /*writable=*/true);

    BuildOptions options;
    options.extract_template = config.extract_template;
    BuildResult result = build_knowledge(corpus, providers, options, &cache);

    save_kb(result.kb, args.out);
    write_report(result.report, args.out);
    cache.flush();

    for (const auto& warning : result.report.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    std::cout << report_to_json(result.report);
    return 0;
}

int cmd_query(const AppConfig& config, const QueryArgs& args) {
    KnowledgeBase kb = load_kb(args.kb);
    ProviderSet providers = make_providers(config.providers, nullptr);
    ProviderCache cache =
        ProviderCache::open(cache_dir_for(config, args.kb), /*writable=*/false);

    Query query;
    query.text = args.text;
    query.k = args.k > 0 ? args.k : config.k;
    query.mode = args.mode.empty() ? config.mode : generation_mode_from_name(args.mode);
    query.criteria = config.criteria;
    if (!args.criteria.empty()) {
        query.criteria.clear();
        for (const auto& name : args.criteria) {
            query.criteria.insert(criterion_from_name(name));
        }
    }
    if (!args.image.empty()) {
        if (!fs::exists(args.image)) {
            throw Error(Errc::IoError, "image file not found: " + args.image);
        }
        query.image = read_file_bytes(args.image);
    }

    RetrievalResult retrieval;
    if (query.mode != GenerationMode::Naive) {
        retrieval = retrieve(kb, query, providers, &cache);
    }
    GenerationOptions gen_options;
    gen_options.generate_template = config.generate_template;
    GenerationResult generated =
        generate_answer(kb, query, retrieval, providers, gen_options);

    json out = {{"answer", generated.answer},
                {"mode", generation_mode_name(query.mode)},
                {"k", query.k},
                {"retrieval",
                 {{"entities", scored_items_json(retrieval.entities)},
                  {"hyperedges", scored_items_json(retrieval.hyperedges)},
                  {"chunks", scored_items_json(retrieval.chunks)},
                  {"images", image_matches_json(retrieval.images)}}},
                {"context_blocks", generated.context_blocks}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_eval(const AppConfig& config, const EvalArgs& args) {
    KnowledgeBase kb = load_kb(args.kb);
    ProviderSet providers = make_providers(config.providers, nullptr);
    ProviderCache cache =
        ProviderCache::open(cache_dir_for(config, args.kb), /*writable=*/false);
    std::vector<EvalCase> cases = load_eval_cases(args.cases);

    EvalOptions options;
    options.mode = args.mode.empty() ? config.mode : generation_mode_from_name(args.mode);
    options.generate_template = config.generate_template;
    options.judge_template = config.judge_template;

    json out;
    if (args.ablate) {
        std::vector<int> ks = args.k_values.empty() ? std::vector<int>{4, 8} : args.k_values;
        std::vector<EvalReport> reports = run_ablation(
            kb, cases, default_ablation_subsets(), ks, providers, &cache, options);
        out = ablation_to_json(reports);
    } else {
        if (args.k_values.size() > 1) {
            throw Error(Errc::ConfigError, "multiple k values need --ablate");
        }
        int k = args.k_values.empty() ? config.k : args.k_values.front();
        EvalReport report =
            evaluate_cases(kb, cases, config.criteria, k, providers, &cache, options);
        out = report_to_json(report);
    }

    std::string text = out.dump(2) + "\n";
    if (!args.out.empty()) {
        std::ofstream file(args.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw Error(Errc::IoError, "cannot write report: " + args.out);
        }
        file << text;
    }
    std::cout << text;
    return 0;
}

int cmd_inspect(const std::string& kb_dir) {
    KnowledgeBase kb = load_kb(kb_dir);
    size_t text_entities = 0;
    size_t image_entities = 0;
    size_t descriptor_entities = 0;
    for (const auto& [id, entity] : kb.entities()) {
        (void)id;
        switch (entity.kind) {
            case EntityKind::Text: ++text_entities; break;
            case EntityKind::Image: ++image_entities; break;
            case EntityKind::Descriptor: ++descriptor_entities; break;
        }
    }
    json coverage;
    size_t with_color = 0;
    size_t with_shape = 0;
    size_t with_ocr = 0;
    size_t with_caption = 0;
    for (const auto& [id, image] : kb.images()) {
        (void)id;
        if (image.descriptors.color) ++with_color;
        if (image.descriptors.shape) ++with_shape;
        if (image.descriptors.ocr) ++with_ocr;
        if (image.descriptors.caption) ++with_caption;
    }
    coverage["1"] = with_color;
    coverage["2"] = with_shape;
    coverage["3"] = with_ocr;
    coverage["4"] = with_caption;

    json out = {{"entities",
                 {{"total", kb.entities().size()},
                  {"text", text_entities},
                  {"image", image_entities},
                  {"descriptor", descriptor_entities}}},
                {"hyperedges", kb.hyperedges().size()},
                {"chunks", kb.chunks().size()},
                {"images", kb.images().size()},
                {"embedding_rows", kb.index().size()},
                {"embedding_dim", kb.embedding_dim()},
                {"enabled_lambdas", kb.enabled_lambdas()},
                {"lambda_coverage", coverage}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimodal hypergraph retrieval over text and product images"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Config file (default ./hyperrag.json)");

    BuildArgs build_args;
    CLI::App* build = app.add_subcommand("build", "Build a knowledge base from a corpus");
    build->add_option("--corpus", build_args.corpus, "corpus.json path")->required();
    build->add_option("--out", build_args.out, "Output KB directory")->required();
    build->add_option("--lambdas", build_args.lambdas,
                      "Descriptor extractors to enable (1..4)")
        ->delimiter(',');

    QueryArgs query_args;
    CLI::App* query = app.add_subcommand("query", "Ask a question against a KB");
    query->add_option("--kb", query_args.kb, "KB directory")->required();
    query->add_option("--text", query_args.text, "Question text")->required();
    query->add_option("--image", query_args.image, "Optional query image path");
    query->add_option("--k", query_args.k, "Top-k per collection");
    query->add_option("--mode", query_args.mode, "naive | standard | nico");
    query->add_option("--criteria", query_args.criteria, "Image criteria (i..v)")
        ->delimiter(',');

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score answers against golden cases");
    eval->add_option("--kb", eval_args.kb, "KB directory")->required();
    eval->add_option("--cases", eval_args.cases, "cases.jsonl path")->required();
    eval->add_option("--mode", eval_args.mode, "naive | standard | nico");
    eval->add_flag("--ablate", eval_args.ablate,
                   "Run the lambda-subset grid instead of one configuration");
    eval->add_option("--k", eval_args.k_values, "k values (list with --ablate)")
        ->delimiter(',');
    eval->add_option("--out", eval_args.out, "Also write the report to this file");

    std::string inspect_kb;
    CLI::App* inspect = app.add_subcommand("inspect", "Print KB statistics");
    inspect->add_option("--kb", inspect_kb, "KB directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (inspect->parsed()) {
            return cmd_inspect(inspect_kb);
        }
        AppConfig config = load_app_config(discover_config_path(config_path));
        if (build->parsed()) return cmd_build(config, build_args);
        if (query->parsed()) return cmd_query(config, query_args);
        if (eval->parsed()) return cmd_eval(config, eval_args);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == Errc::ProviderError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
