// Knowledge-base construction: document chunking, chat-model graph
// extraction with JSON repair, image descriptor attachment, embedding pass.
#pragma once

#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hyperrag {

struct ExtractedEntity {
    std::string name;
    std::string kind_hint;
    std::string description;
};

struct ExtractedRelation {
    std::vector<std::string> members;  // >= 2 distinct names
    std::string relation_text;
    double weight = 1.0;
};

struct ExtractionPayload {
    std::vector<ExtractedEntity> entities;
    std::vector<ExtractedRelation> relations;
};

// Strict parse of a chat-model extraction response. Returns nullopt and
// fills `error` on any schema violation: not an object, missing "entities",
// empty names, fewer than 2 distinct relation members, weight outside [0,1].
std::optional<ExtractionPayload> parse_extraction(const std::string& response,
                                                  std::string& error);

struct ChunkWindow {
    size_t word_offset = 0;
    std::string text;  // words re-joined by single spaces
};

// Sliding windows of `size` words with stride `size - overlap`; the last
// window may be shorter and every word lands in at least one window.
std::vector<ChunkWindow> chunk_text(const std::string& doc, size_t size, size_t overlap);

struct ExtractionOutcome {
    std::optional<ExtractionPayload> payload;  // nullopt after a failed repair
    int repair_calls = 0;                      // 0 or 1
    std::string error;                         // last parse error when payload is empty
};

// One chat call, plus one repair call appending "Return only valid JSON."
// when the first response fails to parse.
ExtractionOutcome extract_text_graph(const std::string& chunk_text, ChatProvider& chat,
                                     const std::string& extract_template);

struct CorpusImage {
    std::string uri;
    ImageLabels labels;
};

struct CorpusSpec {
    std::vector<std::string> docs;    // as written in corpus.json; doubles as doc_id
    std::vector<CorpusImage> images;
    std::string base_dir;             // paths above resolve against this
    size_t chunk_size = 200;
    size_t chunk_overlap = 40;
    LambdaSet enabled_lambdas = {1, 2, 3, 4};
};

// corpus.json: {"docs": [...], "images": "manifest.jsonl", "chunk_size"?,
// "chunk_overlap"?}. The image manifest is JSONL, one
// {uri, tobacco_type?, product_type?, brand?} per line. Unknown keys are
// rejected. Relative paths resolve against the corpus file's directory.
CorpusSpec load_corpus_spec(const std::string& path);

struct BuildReport {
    size_t documents = 0;
    size_t chunks = 0;
    size_t entities = 0;
    size_t hyperedges = 0;
    size_t images = 0;
    size_t text_entities = 0;
    size_t image_entities = 0;
    size_t descriptor_entities = 0;
    std::map<int, size_t> lambda_edges;  // per lambda, only succeeded ones
    size_t label_edges = 0;
    size_t descriptor_hyperedges = 0;    // sum of lambda_edges + label_edges
    size_t parse_failures = 0;           // chunks still invalid after repair
    size_t repair_calls = 0;
    std::vector<std::string> flagged_chunks;
    std::vector<std::string> warnings;
    struct ProviderCalls {
        uint64_t chat = 0;
        uint64_t embed_text = 0;
        uint64_t embed_image = 0;
        uint64_t ocr = 0;
        uint64_t caption = 0;
        uint64_t retries = 0;
        uint64_t cache_hits = 0;
        uint64_t chat_image_payloads = 0;
        uint64_t chat_token_estimate = 0;
    } provider_calls;
};

std::string report_to_json(const BuildReport& report);
void write_report(const BuildReport& report, const std::string& kb_dir);
BuildReport read_report(const std::string& kb_dir);

struct BuildOptions {
    std::string extract_template;  // must contain {chunk}; default used when empty
    bool shape_text_from_caption = false;
    bool feed_captions_to_text_extraction = false;
};

struct BuildResult {
    KnowledgeBase kb;
    BuildReport report;
};

// Full pipeline: chunk docs, extract the text graph through the chat
// provider, attach image descriptor entities and relations, then embed
// every entity, hyperedge, chunk, and image in sorted-id order.
BuildResult build_knowledge(const CorpusSpec& corpus, const ProviderSet& providers,
                            const BuildOptions& options, ProviderCache* cache);

// Embedding id conventions; rows in the shared index are prefixed by kind.
std::string entity_embedding_id(const std::string& entity_id);
std::string hyperedge_embedding_id(const std::string& edge_id);
std::string chunk_embedding_id(const std::string& chunk_id);
std::string image_visual_embedding_id(const std::string& image_id);
std::string image_caption_embedding_id(const std::string& image_id);
std::string image_shape_embedding_id(const std::string& image_id);

}  // namespace hyperrag
