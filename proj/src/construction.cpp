#include "hyperrag/construction.hpp"

#include "hyperrag/descriptors.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/hash.hpp"
#include "hyperrag/image.hpp"
#include "hyperrag/prompts.hpp"
#include "hyperrag/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hyperrag {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string entity_embedding_id(const std::string& entity_id) { return "e:" + entity_id; }
std::string hyperedge_embedding_id(const std::string& edge_id) { return "h:" + edge_id; }
std::string chunk_embedding_id(const std::string& chunk_id) { return "c:" + chunk_id; }
std::string image_visual_embedding_id(const std::string& image_id) { return "iv:" + image_id; }
std::string image_caption_embedding_id(const std::string& image_id) { return "ic:" + image_id; }
std::string image_shape_embedding_id(const std::string& image_id) { return "is:" + image_id; }

std::optional<ExtractionPayload> parse_extraction(const std::string& response,
                                                  std::string& error) {
    json j = json::parse(response, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        error = "response is not a JSON object";
        return std::nullopt;
    }
    if (!j.contains("entities") || !j["entities"].is_array()) {
        error = "missing \"entities\" array";
        return std::nullopt;
    }
    ExtractionPayload payload;
    for (const auto& e : j["entities"]) {
        if (!e.is_object() || !e.contains("name") || !e["name"].is_string()) {
            error = "entity without a string name";
            return std::nullopt;
        }
        ExtractedEntity entity;
        entity.name = trim(e["name"].get<std::string>());
        if (entity.name.empty()) {
            error = "entity with empty name";
            return std::nullopt;
        }
        if (e.contains("kind_hint")) {
            if (!e["kind_hint"].is_string()) {
                error = "kind_hint must be a string";
                return std::nullopt;
            }
            entity.kind_hint = trim(e["kind_hint"].get<std::string>());
        }
        if (e.contains("description")) {
            if (!e["description"].is_string()) {
                error = "description must be a string";
                return std::nullopt;
            }
            entity.description = trim(e["description"].get<std::string>());
        }
        payload.entities.push_back(std::move(entity));
    }
    if (j.contains("relations")) {
        if (!j["relations"].is_array()) {
            error = "\"relations\" must be an array";
            return std::nullopt;
        }
        for (const auto& r : j["relations"]) {
            if (!r.is_object() || !r.contains("members") || !r["members"].is_array()) {
                error = "relation without a members array";
                return std::nullopt;
            }
            ExtractedRelation relation;
            std::set<std::string> seen;
            for (const auto& m : r["members"]) {
                if (!m.is_string()) {
                    error = "relation member is not a string";
                    return std::nullopt;
                }
                std::string name = trim(m.get<std::string>());
                if (name.empty()) {
                    error = "relation member with empty name";
                    return std::nullopt;
                }
                if (seen.insert(normalize_name(name)).second) {
                    relation.members.push_back(std::move(name));
                }
            }
            if (relation.members.size() < 2) {
                error = "relation needs at least 2 distinct members";
                return std::nullopt;
            }
            if (!r.contains("relation_text") || !r["relation_text"].is_string()) {
                error = "relation without relation_text";
                return std::nullopt;
            }
            relation.relation_text = trim(r["relation_text"].get<std::string>());
            if (relation.relation_text.empty()) {
                error = "relation with empty relation_text";
                return std::nullopt;
            }
            if (r.contains("weight")) {
                if (!r["weight"].is_number()) {
                    error = "weight must be a number";
                    return std::nullopt;
                }
                relation.weight = r["weight"].get<double>();
                if (relation.weight < 0.0 || relation.weight > 1.0) {
                    error = "weight outside [0,1]";
                    return std::nullopt;
                }
            }
            payload.relations.push_back(std::move(relation));
        }
    }
    error.clear();
    return payload;
}

std::vector<ChunkWindow> chunk_text(const std::string& doc, size_t size, size_t overlap) {
    if (size < 16) {
        throw Error(Errc::ConfigError, "chunk size must be at least 16 words");
    }
    if (overlap >= size) {
        throw Error(Errc::ConfigError, "chunk overlap must be smaller than chunk size");
    }
    std::vector<std::string> words = split_words(doc);
    if (words.empty()) {
        throw Error(Errc::EmptyDocument, "document has no words");
    }
    const size_t stride = size - overlap;
    std::vector<ChunkWindow> out;
    for (size_t start = 0;; start += stride) {
        size_t end = std::min(start + size, words.size());
        ChunkWindow window;
        window.word_offset = start;
        for (size_t i = start; i < end; ++i) {
            if (i > start) window.text += ' ';
            window.text += words[i];
        }
        out.push_back(std::move(window));
        if (start + size >= words.size()) break;
    }
    return out;
}

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / p).string();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read " + path);
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw Error(Errc::ConfigError, "unknown key \"" + it.key() + "\" in " + where);
        }
    }
}

}  // namespace

CorpusSpec load_corpus_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read corpus spec " + path);
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::ConfigError, path + " is not a JSON object");
    }
    reject_unknown_keys(j, {"docs", "images", "chunk_size", "chunk_overlap"}, path);

    CorpusSpec spec;
    spec.base_dir = fs::path(path).parent_path().string();
    if (j.contains("docs")) {
        if (!j["docs"].is_array()) {
            throw Error(Errc::ConfigError, "\"docs\" must be an array of paths");
        }
        spec.docs = j["docs"].get<std::vector<std::string>>();
    }
    if (j.contains("chunk_size")) spec.chunk_size = j["chunk_size"].get<size_t>();
    if (j.contains("chunk_overlap")) spec.chunk_overlap = j["chunk_overlap"].get<size_t>();
    if (spec.chunk_size < 16) {
        throw Error(Errc::ConfigError, "chunk_size must be at least 16");
    }
    if (spec.chunk_overlap >= spec.chunk_size) {
        throw Error(Errc::ConfigError, "chunk_overlap must be smaller than chunk_size");
    }

    if (j.contains("images")) {
        if (!j["images"].is_string()) {
            throw Error(Errc::ConfigError, "\"images\" must be a manifest path");
        }
        std::string manifest_path = resolve_path(spec.base_dir, j["images"].get<std::string>());
        std::ifstream manifest(manifest_path, std::ios::binary);
        if (!manifest) {
            throw Error(Errc::IoError, "cannot read image manifest " + manifest_path);
        }
        std::string manifest_dir = fs::path(manifest_path).parent_path().string();
        std::string line;
        size_t line_no = 0;
        while (std::getline(manifest, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            json row = json::parse(line, nullptr, false);
            if (row.is_discarded() || !row.is_object()) {
                throw Error(Errc::ConfigError, manifest_path + ": line " +
                                                   std::to_string(line_no) + " is not JSON");
            }
            reject_unknown_keys(row, {"uri", "tobacco_type", "product_type", "brand"},
                                manifest_path + " line " + std::to_string(line_no));
            if (!row.contains("uri") || !row["uri"].is_string()) {
                throw Error(Errc::ConfigError, manifest_path + ": line " +
                                                   std::to_string(line_no) + " has no uri");
            }
            CorpusImage img;
            img.uri = resolve_path(manifest_dir, row["uri"].get<std::string>());
            if (row.contains("tobacco_type")) {
                img.labels.tobacco_type = row["tobacco_type"].get<std::string>();
            }
            if (row.contains("product_type")) {
                img.labels.product_type = row["product_type"].get<std::string>();
            }
            if (row.contains("brand")) {
                img.labels.brand = row["brand"].get<std::string>();
            }
            spec.images.push_back(std::move(img));
        }
    }
    return spec;
}

ExtractionOutcome extract_text_graph(const std::string& chunk_text, ChatProvider& chat,
                                     const std::string& extract_template) {
    const std::string& tpl =
        extract_template.empty() ? default_extract_template() : extract_template;
    std::string prompt = render_template(tpl, {{"chunk", chunk_text}});

    ExtractionOutcome outcome;
    std::string response = chat.chat(prompt, {}, std::nullopt);
    outcome.payload = parse_extraction(response, outcome.error);
    if (!outcome.payload) {
        outcome.repair_calls = 1;
        response = chat.chat(prompt + "\n\nReturn only valid JSON.", {}, std::nullopt);
        outcome.payload = parse_extraction(response, outcome.error);
    }
    return outcome;
}

namespace {

std::string fold_kind_hint(const ExtractedEntity& entity) {
    if (entity.kind_hint.empty()) return entity.description;
    if (entity.description.empty()) return entity.kind_hint;
    return entity.kind_hint + ": " + entity.description;
}

void apply_payload(KnowledgeBase& kb, const ExtractionPayload& payload,
                   const std::string& chunk_id) {
    for (const auto& entity : payload.entities) {
        kb.add_entity(entity.name, EntityKind::Text, fold_kind_hint(entity), chunk_id);
    }
    for (const auto& relation : payload.relations) {
        std::vector<std::string> member_ids;
        for (const auto& name : relation.members) {
            if (kb.find_entity_by_key(name, EntityKind::Text)) {
                member_ids.push_back(kb.add_entity(name, EntityKind::Text, "", chunk_id));
            } else {
                // closure rule: unseen members become stub entities
                member_ids.push_back(
                    kb.add_entity(name, EntityKind::Text, "(mentioned)", chunk_id));
            }
        }
        kb.add_hyperedge(member_ids, relation.relation_text, relation.weight, chunk_id);
    }
}

void ingest_chunk(KnowledgeBase& kb, const std::string& doc_id, size_t word_offset,
                  std::string text, ChatProvider& chat, const std::string& tpl,
                  BuildReport& report) {
    Chunk chunk;
    chunk.doc_id = doc_id;
    chunk.id = chunk_id_for(doc_id, word_offset);
    chunk.embedding_id = chunk_embedding_id(chunk.id);
    chunk.text = std::move(text);
    std::string chunk_id = chunk.id;
    std::string chunk_body = chunk.text;
    kb.add_chunk(std::move(chunk));

    ExtractionOutcome outcome = extract_text_graph(chunk_body, chat, tpl);
    report.repair_calls += static_cast<size_t>(outcome.repair_calls);
    if (!outcome.payload) {
        report.parse_failures += 1;
        report.flagged_chunks.push_back(chunk_id);
        report.warnings.push_back("chunk " + chunk_id + " extraction failed: " + outcome.error);
        return;
    }
    apply_payload(kb, *outcome.payload, chunk_id);
}

struct StatsSnapshot {
    uint64_t chat = 0, embed_text = 0, embed_image = 0, ocr = 0, caption = 0;
    uint64_t retries = 0, cache_hits = 0, image_payloads = 0, token_estimate = 0;
};

StatsSnapshot snapshot(const ProviderStats* stats) {
    StatsSnapshot s;
    if (!stats) return s;
    s.chat = stats->chat_calls.load();
    s.embed_text = stats->embed_text_calls.load();
    s.embed_image = stats->embed_image_calls.load();
    s.ocr = stats->ocr_calls.load();
    s.caption = stats->caption_calls.load();
    s.retries = stats->retries.load();
    s.cache_hits = stats->cache_hits.load();
    s.image_payloads = stats->chat_image_payloads.load();
    s.token_estimate = stats->chat_token_estimate.load();
    return s;
}

struct ImageWork {
    std::string id;
    std::string uri;
    ImageLabels labels;
    std::vector<uint8_t> bytes;
};

}  // namespace

BuildResult build_knowledge(const CorpusSpec& corpus, const ProviderSet& providers,
                            const BuildOptions& options, ProviderCache* cache) {
    if (!providers.chat || !providers.embed_text || !providers.embed_image) {
        throw Error(Errc::ConfigError, "chat and embedding providers are required");
    }
    if (corpus.enabled_lambdas.count(3) && !providers.ocr) {
        throw Error(Errc::ConfigError, "lambda 3 enabled but no ocr provider configured");
    }
    if (corpus.enabled_lambdas.count(4) && !providers.caption) {
        throw Error(Errc::ConfigError, "lambda 4 enabled but no caption provider configured");
    }
    if (cache) cache->bind_stats(providers.stats);
    const uint32_t dim = providers.embed_text->dimension();
    if (providers.embed_image->dimension() != dim) {
        throw Error(Errc::DimensionMismatch, "text and image embedding dimensions differ");
    }

    StatsSnapshot before = snapshot(providers.stats.get());

    BuildResult result{KnowledgeBase(dim, corpus.enabled_lambdas), {}};
    KnowledgeBase& kb = result.kb;
    BuildReport& report = result.report;
    const std::string tpl =
        options.extract_template.empty() ? default_extract_template() : options.extract_template;

    report.documents = corpus.docs.size();
    for (const auto& doc_path : corpus.docs) {
        std::string text = read_text_file(resolve_path(corpus.base_dir, doc_path));
        for (auto& window : chunk_text(text, corpus.chunk_size, corpus.chunk_overlap)) {
            ingest_chunk(kb, doc_path, window.word_offset, std::move(window.text),
                         *providers.chat, tpl, report);
        }
    }

    std::vector<ImageWork> images;
    for (const auto& corpus_image : corpus.images) {
        ImageWork work;
        work.bytes = read_file_bytes(resolve_path(corpus.base_dir, corpus_image.uri));
        work.id = content_hash(std::span<const uint8_t>(work.bytes));
        work.uri = corpus_image.uri;
        work.labels = corpus_image.labels;
        images.push_back(std::move(work));
    }
    std::sort(images.begin(), images.end(),
              [](const ImageWork& a, const ImageWork& b) { return a.id < b.id; });

    ExtractOptions extract_options;
    extract_options.enabled = corpus.enabled_lambdas;
    extract_options.shape_text_from_caption = options.shape_text_from_caption;

    std::map<std::string, std::vector<uint8_t>> image_bytes;
    for (auto& work : images) {
        if (image_bytes.count(work.id)) {
            report.warnings.push_back("duplicate image skipped: " + work.uri);
            continue;
        }
        Image decoded = Image::decode_bytes(work.bytes);
        ExtractedDescriptors extracted =
            extract_all(decoded, work.bytes, extract_options, providers.ocr.get(),
                        providers.caption.get(), cache);
        for (const auto& warning : extracted.warnings) {
            report.warnings.push_back("image " + work.id + ": " + warning);
        }

        ImageRecord record;
        record.id = work.id;
        record.uri = work.uri;
        record.labels = work.labels;
        record.descriptors = extracted.set;
        record.descriptors.image_embedding_id = image_visual_embedding_id(work.id);
        kb.add_image(record);

        std::string caption_text =
            extracted.set.caption ? *extracted.set.caption : std::string();
        std::string image_entity =
            kb.add_entity(work.id, EntityKind::Image, caption_text, work.id);
        for (const auto& relation : extracted.relations) {
            std::string descriptor = kb.add_entity(relation.descriptor_name,
                                                   EntityKind::Descriptor,
                                                   relation.relation_text, work.id);
            kb.add_hyperedge({image_entity, descriptor}, relation.relation_text, 1.0, work.id);
            report.lambda_edges[relation.lambda] += 1;
        }
        std::vector<std::pair<std::string, const std::optional<std::string>*>> labels = {
            {"brand", &work.labels.brand},
            {"product_type", &work.labels.product_type},
            {"tobacco_type", &work.labels.tobacco_type},
        };
        for (const auto& [field, value] : labels) {
            if (!*value) continue;
            std::string text = "label " + field + ": " + **value;
            std::string descriptor =
                kb.add_entity(**value, EntityKind::Descriptor, text, work.id);
            kb.add_hyperedge({image_entity, descriptor}, text, 1.0, work.id);
            report.label_edges += 1;
        }
        image_bytes[work.id] = std::move(work.bytes);
    }

    if (options.feed_captions_to_text_extraction) {
        for (const auto& [id, record] : kb.images()) {
            if (!record.descriptors.caption) continue;
            ingest_chunk(kb, "caption:" + id, 0, *record.descriptors.caption,
                         *providers.chat, tpl, report);
        }
    }

    // Embedding pass, sorted-id order throughout.
    std::vector<std::string> ids;
    for (const auto& [id, entity] : kb.entities()) ids.push_back(id);
    for (const auto& id : ids) {
        Entity* entity = kb.mutable_entity(id);
        entity->embedding_id = entity_embedding_id(id);
        const std::string& text =
            entity->description.empty() ? entity->name : entity->description;
        kb.index().upsert(entity->embedding_id, providers.embed_text->embed_text(text));
    }
    ids.clear();
    for (const auto& [id, edge] : kb.hyperedges()) ids.push_back(id);
    for (const auto& id : ids) {
        Hyperedge* edge = kb.mutable_hyperedge(id);
        edge->embedding_id = hyperedge_embedding_id(id);
        kb.index().upsert(edge->embedding_id,
                          providers.embed_text->embed_text(edge->relation_text));
    }
    for (const auto& [id, chunk] : kb.chunks()) {
        kb.index().upsert(chunk.embedding_id, providers.embed_text->embed_text(chunk.text));
    }
    for (const auto& [id, record] : kb.images()) {
        kb.index().upsert(image_visual_embedding_id(id),
                          providers.embed_image->embed_image(image_bytes.at(id)));
        if (record.descriptors.caption) {
            kb.index().upsert(image_caption_embedding_id(id),
                              providers.embed_text->embed_text(*record.descriptors.caption));
        }
        if (record.descriptors.shape && record.descriptors.shape->text) {
            kb.index().upsert(image_shape_embedding_id(id),
                              providers.embed_text->embed_text(*record.descriptors.shape->text));
        }
    }

    report.chunks = kb.chunks().size();
    report.entities = kb.entities().size();
    report.hyperedges = kb.hyperedges().size();
    report.images = kb.images().size();
    for (const auto& [id, entity] : kb.entities()) {
        switch (entity.kind) {
            case EntityKind::Text: report.text_entities += 1; break;
            case EntityKind::Image: report.image_entities += 1; break;
            case EntityKind::Descriptor: report.descriptor_entities += 1; break;
        }
    }
    for (int lambda : corpus.enabled_lambdas) {
        report.lambda_edges.emplace(lambda, 0);  // keep zero rows visible
    }
    report.descriptor_hyperedges = report.label_edges;
    for (const auto& [lambda, count] : report.lambda_edges) {
        report.descriptor_hyperedges += count;
    }

    StatsSnapshot after = snapshot(providers.stats.get());
    report.provider_calls.chat = after.chat - before.chat;
    report.provider_calls.embed_text = after.embed_text - before.embed_text;
    report.provider_calls.embed_image = after.embed_image - before.embed_image;
    report.provider_calls.ocr = after.ocr - before.ocr;
    report.provider_calls.caption = after.caption - before.caption;
    report.provider_calls.retries = after.retries - before.retries;
    report.provider_calls.cache_hits = after.cache_hits - before.cache_hits;
    report.provider_calls.chat_image_payloads = after.image_payloads - before.image_payloads;
    report.provider_calls.chat_token_estimate = after.token_estimate - before.token_estimate;

    return result;
}

std::string report_to_json(const BuildReport& report) {
    json lambda_edges = json::object();
    for (const auto& [lambda, count] : report.lambda_edges) {
        lambda_edges[std::to_string(lambda)] = count;
    }
    json j{
        {"counts",
         {{"chunks", report.chunks},
          {"documents", report.documents},
          {"entities", report.entities},
          {"hyperedges", report.hyperedges},
          {"images", report.images}}},
        {"descriptor_hyperedges", report.descriptor_hyperedges},
        {"entity_kinds",
         {{"descriptor", report.descriptor_entities},
          {"image", report.image_entities},
          {"text", report.text_entities}}},
        {"extraction",
         {{"flagged_chunks", report.flagged_chunks},
          {"parse_failures", report.parse_failures},
          {"repair_calls", report.repair_calls}}},
        {"label_edges", report.label_edges},
        {"lambda_edges", lambda_edges},
        {"provider_calls",
         {{"caption", report.provider_calls.caption},
          {"cache_hits", report.provider_calls.cache_hits},
          {"chat", report.provider_calls.chat},
          {"chat_image_payloads", report.provider_calls.chat_image_payloads},
          {"chat_token_estimate", report.provider_calls.chat_token_estimate},
          {"embed_image", report.provider_calls.embed_image},
          {"embed_text", report.provider_calls.embed_text},
          {"ocr", report.provider_calls.ocr},
          {"retries", report.provider_calls.retries}}},
        {"warnings", report.warnings}};
    return j.dump(2) + "\n";
}

void write_report(const BuildReport& report, const std::string& kb_dir) {
    fs::path path = fs::path(kb_dir) / "report.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot write " + path.string());
    }
    out << report_to_json(report);
}

BuildReport read_report(const std::string& kb_dir) {
    fs::path path = fs::path(kb_dir) / "report.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::IoError, path.string() + " is not valid JSON");
    }
    BuildReport report;
    const json& counts = j.at("counts");
    report.chunks = counts.at("chunks").get<size_t>();
    report.documents = counts.at("documents").get<size_t>();
    report.entities = counts.at("entities").get<size_t>();
    report.hyperedges = counts.at("hyperedges").get<size_t>();
    report.images = counts.at("images").get<size_t>();
    report.descriptor_hyperedges = j.at("descriptor_hyperedges").get<size_t>();
    const json& kinds = j.at("entity_kinds");
    report.descriptor_entities = kinds.at("descriptor").get<size_t>();
    report.image_entities = kinds.at("image").get<size_t>();
    report.text_entities = kinds.at("text").get<size_t>();
    const json& extraction = j.at("extraction");
    report.flagged_chunks = extraction.at("flagged_chunks").get<std::vector<std::string>>();
    report.parse_failures = extraction.at("parse_failures").get<size_t>();
    report.repair_calls = extraction.at("repair_calls").get<size_t>();
    report.label_edges = j.at("label_edges").get<size_t>();
    for (auto it = j.at("lambda_edges").begin(); it != j.at("lambda_edges").end(); ++it) {
        report.lambda_edges[std::stoi(it.key())] = it.value().get<size_t>();
    }
    const json& calls = j.at("provider_calls");
    report.provider_calls.caption = calls.at("caption").get<uint64_t>();
    report.provider_calls.cache_hits = calls.at("cache_hits").get<uint64_t>();
    report.provider_calls.chat = calls.at("chat").get<uint64_t>();
    report.provider_calls.chat_image_payloads = calls.at("chat_image_payloads").get<uint64_t>();
    report.provider_calls.chat_token_estimate = calls.at("chat_token_estimate").get<uint64_t>();
    report.provider_calls.embed_image = calls.at("embed_image").get<uint64_t>();
    report.provider_calls.embed_text = calls.at("embed_text").get<uint64_t>();
    report.provider_calls.ocr = calls.at("ocr").get<uint64_t>();
    report.provider_calls.retries = calls.at("retries").get<uint64_t>();
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    return report;
}

}  // namespace hyperrag
