// Query-time side: per-criterion image matching, reciprocal-rank fusion,
// subgraph assembly, and answer generation over the serialized context.
#pragma once

#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"
#include "hyperrag/vector_index.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hyperrag {

enum class GenerationMode { Naive, Standard, Nico };

std::string generation_mode_name(GenerationMode mode);
GenerationMode generation_mode_from_name(const std::string& name);

// Matching criteria, named by roman numerals in CLI flags and provenance:
// 1=i visual embedding, 2=ii caption embedding, 3=iii color, 4=iv shape,
// 5=v ocr token overlap.
std::string criterion_name(int criterion);
int criterion_from_name(const std::string& name);

// Criteria a lambda subset supports; criterion i is always active.
std::set<int> criteria_for_lambdas(const LambdaSet& lambdas);

struct Query {
    std::string text;
    std::optional<std::vector<uint8_t>> image;  // encoded bytes
    int k = 8;
    GenerationMode mode = GenerationMode::Nico;
    std::set<int> criteria = {1, 2, 3, 4, 5};
};

struct ScoredItem {
    std::string id;
    double score = 0.0;
    std::string provenance;
};

struct ImageMatch {
    std::string id;
    std::map<std::string, double> criterion_scores;  // keyed by criterion name
    std::vector<std::string> skipped_criteria;       // absent descriptors
    double fused_score = 0.0;
};

struct RetrievalResult {
    std::vector<ScoredItem> entities;
    std::vector<ScoredItem> hyperedges;
    std::vector<ScoredItem> chunks;
    std::vector<ImageMatch> images;  // fused score descending, ties by id
};

// Query-image state computed once per query; never persisted into the KB.
struct QueryImageContext {
    DescriptorSet descriptors;
    std::vector<float> visual;
    std::optional<std::vector<float>> caption_embedding;
    std::optional<std::vector<float>> shape_text_embedding;
};

QueryImageContext prepare_query_image(const std::vector<uint8_t>& image_bytes,
                                      const KnowledgeBase& kb, const std::set<int>& criteria,
                                      const ProviderSet& providers, ProviderCache* cache);

// Scores one candidate against the prepared query image. Criteria whose
// descriptors are missing on either side are skipped and recorded.
std::map<std::string, double> criterion_scores(const KnowledgeBase& kb,
                                               const QueryImageContext& query,
                                               const ImageRecord& candidate,
                                               const std::set<int>& criteria,
                                               std::vector<std::string>* skipped);

// Reciprocal-rank fusion with constant 60 over per-criterion top-k lists.
// Ranks are competition ranks at 1e-9 score granularity, so ties share a
// rank. Output: top-k by fused score, ties broken by ascending id.
std::vector<ScoredHit> fuse(const std::vector<std::vector<ScoredHit>>& rankings, int k);

// Text side: top-k entities, hyperedges, and chunks by embedding, one-hop
// neighbor expansion capped at 32 entities total. Image side (when the
// query carries one): per-criterion rankings over all stored images, fused.
RetrievalResult retrieve(const KnowledgeBase& kb, const Query& query,
                         const ProviderSet& providers, ProviderCache* cache);

struct GenerationOptions {
    std::string generate_template;  // must contain {question}; default used when empty
    size_t context_budget_words = 6000;
};

struct GenerationResult {
    std::string answer;
    std::vector<std::string> context_blocks;  // what the chat provider saw
};

// naive: one chat call, no context. standard: top-k image captions only.
// nico: serialized subgraph in the order chunks, relation texts, entity
// descriptions, image descriptor summaries; score descending within each
// group; truncated to the word budget by cutting the serialized list at the
// first block that no longer fits. The chat provider never receives image
// payloads in any mode.
GenerationResult generate_answer(const KnowledgeBase& kb, const Query& query,
                                 const RetrievalResult& retrieval,
                                 const ProviderSet& providers,
                                 const GenerationOptions& options);

}  // namespace hyperrag
