#include "hyperrag/retrieval.hpp"

#include "hyperrag/construction.hpp"
#include "hyperrag/descriptors.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/image.hpp"
#include "hyperrag/prompts.hpp"
#include "hyperrag/text.hpp"

#include <algorithm>
#include <cmath>

namespace hyperrag {

std::string generation_mode_name(GenerationMode mode) {
    switch (mode) {
        case GenerationMode::Naive: return "naive";
        case GenerationMode::Standard: return "standard";
        case GenerationMode::Nico: return "nico";
    }
    return "nico";
}

GenerationMode generation_mode_from_name(const std::string& name) {
    if (name == "naive") return GenerationMode::Naive;
    if (name == "standard") return GenerationMode::Standard;
    if (name == "nico") return GenerationMode::Nico;
    throw Error(Errc::ConfigError, "unknown generation mode: " + name);
}

std::string criterion_name(int criterion) {
    switch (criterion) {
        case 1: return "i";
        case 2: return "ii";
        case 3: return "iii";
        case 4: return "iv";
        case 5: return "v";
    }
    throw Error(Errc::ConfigError, "criterion out of range: " + std::to_string(criterion));
}

int criterion_from_name(const std::string& name) {
    if (name == "i") return 1;
    if (name == "ii") return 2;
    if (name == "iii") return 3;
    if (name == "iv") return 4;
    if (name == "v") return 5;
    throw Error(Errc::ConfigError, "unknown criterion: " + name);
}

std::set<int> criteria_for_lambdas(const LambdaSet& lambdas) {
    std::set<int> criteria = {1};
    if (lambdas.count(1)) criteria.insert(3);
    if (lambdas.count(2)) criteria.insert(4);
    if (lambdas.count(3)) criteria.insert(5);
    if (lambdas.count(4)) criteria.insert(2);
    return criteria;
}

QueryImageContext prepare_query_image(const std::vector<uint8_t>& image_bytes,
                                      const KnowledgeBase& kb, const std::set<int>& criteria,
                                      const ProviderSet& providers, ProviderCache* cache) {
    if (!providers.embed_image || !providers.embed_text) {
        throw Error(Errc::ConfigError, "embedding providers are required for image queries");
    }
    if (providers.embed_image->dimension() != kb.embedding_dim()) {
        throw Error(Errc::DimensionMismatch, "image embedding dimension does not match KB");
    }
    if (cache) cache->bind_stats(providers.stats);
    QueryImageContext ctx;
    ctx.visual = providers.embed_image->embed_image(image_bytes);

    LambdaSet needed;
    if (criteria.count(3)) needed.insert(1);
    if (criteria.count(4)) needed.insert(2);
    if (criteria.count(5)) needed.insert(3);
    if (criteria.count(2)) needed.insert(4);
    LambdaSet enabled;
    for (int lambda : needed) {
        if (kb.enabled_lambdas().count(lambda)) enabled.insert(lambda);
    }
    if (!enabled.empty()) {
        Image decoded = Image::decode_bytes(image_bytes);
        ExtractOptions options;
        options.enabled = enabled;
        ExtractedDescriptors extracted = extract_all(decoded, image_bytes, options,
                                                     providers.ocr.get(),
                                                     providers.caption.get(), cache);
        ctx.descriptors = std::move(extracted.set);
    }
    if (ctx.descriptors.caption) {
        ctx.caption_embedding = providers.embed_text->embed_text(*ctx.descriptors.caption);
    }
    if (ctx.descriptors.shape && ctx.descriptors.shape->text) {
        ctx.shape_text_embedding =
            providers.embed_text->embed_text(*ctx.descriptors.shape->text);
    }
    return ctx;
}

std::map<std::string, double> criterion_scores(const KnowledgeBase& kb,
                                               const QueryImageContext& query,
                                               const ImageRecord& candidate,
                                               const std::set<int>& criteria,
                                               std::vector<std::string>* skipped) {
    std::map<std::string, double> out;
    auto skip = [&](int criterion) {
        if (skipped) skipped->push_back(criterion_name(criterion));
    };
    for (int criterion : criteria) {
        switch (criterion) {
            case 1: {
                const std::string& row = candidate.descriptors.image_embedding_id;
                if (row.empty() || !kb.index().contains(row)) {
                    skip(1);
                    break;
                }
                out["i"] = kb.index().score_against(query.visual, row);
                break;
            }
            case 2: {
                std::string row = image_caption_embedding_id(candidate.id);
                if (!query.caption_embedding || !kb.index().contains(row)) {
                    skip(2);
                    break;
                }
                out["ii"] = kb.index().score_against(*query.caption_embedding, row);
                break;
            }
            case 3: {
                if (!query.descriptors.color || !candidate.descriptors.color) {
                    skip(3);
                    break;
                }
                const auto& a = query.descriptors.color->avg_rgb;
                const auto& b = candidate.descriptors.color->avg_rgb;
                double dist = std::sqrt(static_cast<double>(
                    (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                    (a[2] - b[2]) * (a[2] - b[2])));
                out["iii"] = 1.0 - dist / (255.0 * std::sqrt(3.0));
                break;
            }
            case 4: {
                if (!query.descriptors.shape || !candidate.descriptors.shape) {
                    skip(4);
                    break;
                }
                std::string row = image_shape_embedding_id(candidate.id);
                if (query.shape_text_embedding && candidate.descriptors.shape->text &&
                    kb.index().contains(row)) {
                    out["iv"] = kb.index().score_against(*query.shape_text_embedding, row);
                } else {
                    out["iv"] = query.descriptors.shape->cls == candidate.descriptors.shape->cls
                                    ? 1.0
                                    : 0.0;
                }
                break;
            }
            case 5: {
                if (!query.descriptors.ocr || !candidate.descriptors.ocr) {
                    skip(5);
                    break;
                }
                std::set<std::string> a(query.descriptors.ocr->tokens.begin(),
                                        query.descriptors.ocr->tokens.end());
                std::set<std::string> b(candidate.descriptors.ocr->tokens.begin(),
                                        candidate.descriptors.ocr->tokens.end());
                out["v"] = token_set_f1(a, b);
                break;
            }
            default:
                throw Error(Errc::ConfigError,
                            "criterion out of range: " + std::to_string(criterion));
        }
    }
    return out;
}

std::vector<ScoredHit> fuse(const std::vector<std::vector<ScoredHit>>& rankings, int k) {
    if (k < 1) {
        throw Error(Errc::EmptyInput, "k must be >= 1");
    }
    bool any = false;
    for (const auto& ranking : rankings) {
        if (!ranking.empty()) any = true;
    }
    if (!any) {
        throw Error(Errc::EmptyRankings, "no non-empty rankings to fuse");
    }
    std::map<std::string, double> fused;
    for (const auto& ranking : rankings) {
        size_t rank = 0;
        int64_t prev = 0;
        for (size_t i = 0; i < ranking.size(); ++i) {
            int64_t q = VectorIndex::quantize_score(ranking[i].score);
            if (i == 0 || q != prev) rank = i + 1;
            prev = q;
            fused[ranking[i].id] += 1.0 / (60.0 + static_cast<double>(rank));
        }
    }
    std::vector<ScoredHit> out;
    out.reserve(fused.size());
    for (const auto& [id, score] : fused) {
        out.push_back({id, score});
    }
    VectorIndex::sort_hits(out);
    if (out.size() > static_cast<size_t>(k)) {
        out.resize(static_cast<size_t>(k));
    }
    return out;
}

namespace {

std::function<bool(const std::string&)> prefix_filter(std::string prefix) {
    return [prefix = std::move(prefix)](const std::string& id) {
        return id.rfind(prefix, 0) == 0;
    };
}

}  // namespace

RetrievalResult retrieve(const KnowledgeBase& kb, const Query& query,
                         const ProviderSet& providers, ProviderCache* cache) {
    if (kb.embedding_dim() == 0 || kb.index().empty()) {
        throw Error(Errc::KbNotLoaded, "knowledge base has no embeddings loaded");
    }
    if (trim(query.text).empty()) {
        throw Error(Errc::EmptyInput, "query text must be non-empty");
    }
    if (query.k < 1) {
        throw Error(Errc::EmptyInput, "k must be >= 1");
    }
    if (!providers.embed_text) {
        throw Error(Errc::ConfigError, "text embedding provider is required");
    }
    if (providers.embed_text->dimension() != kb.embedding_dim()) {
        throw Error(Errc::DimensionMismatch, "text embedding dimension does not match KB");
    }

    RetrievalResult result;
    const size_t k = static_cast<size_t>(query.k);
    std::vector<float> q = providers.embed_text->embed_text(query.text);

    for (const auto& hit : kb.index().top_k_where(q, k, prefix_filter("e:"))) {
        result.entities.push_back({hit.id.substr(2), hit.score, "entity_embedding"});
    }
    for (const auto& hit : kb.index().top_k_where(q, k, prefix_filter("h:"))) {
        result.hyperedges.push_back({hit.id.substr(2), hit.score, "hyperedge_embedding"});
    }
    for (const auto& hit : kb.index().top_k_where(q, k, prefix_filter("c:"))) {
        result.chunks.push_back({hit.id.substr(2), hit.score, "chunk_embedding"});
    }

    constexpr size_t kEntityCap = 32;
    std::set<std::string> present;
    std::vector<std::string> matched;
    for (const auto& item : result.entities) {
        present.insert(item.id);
        matched.push_back(item.id);
    }
    for (const auto& id : matched) {
        if (result.entities.size() >= kEntityCap) break;
        for (const auto& neighbor : kb.neighbors(id)) {
            if (result.entities.size() >= kEntityCap) break;
            if (present.insert(neighbor).second) {
                result.entities.push_back({neighbor, 0.0, "neighbor_expansion"});
            }
        }
    }

    if (query.image && !kb.images().empty()) {
        QueryImageContext ctx =
            prepare_query_image(*query.image, kb, query.criteria, providers, cache);
        std::map<std::string, std::map<std::string, double>> scores_by_image;
        std::map<std::string, std::vector<std::string>> skipped_by_image;
        for (const auto& [id, record] : kb.images()) {
            std::vector<std::string> skipped;
            scores_by_image[id] = criterion_scores(kb, ctx, record, query.criteria, &skipped);
            skipped_by_image[id] = std::move(skipped);
        }
        std::vector<std::vector<ScoredHit>> rankings;
        for (int criterion : query.criteria) {
            const std::string name = criterion_name(criterion);
            std::vector<ScoredHit> hits;
            for (const auto& [id, scores] : scores_by_image) {
                auto it = scores.find(name);
                if (it != scores.end()) hits.push_back({id, it->second});
            }
            VectorIndex::sort_hits(hits);
            if (hits.size() > k) hits.resize(k);
            if (!hits.empty()) rankings.push_back(std::move(hits));
        }
        if (!rankings.empty()) {
            for (const auto& hit : fuse(rankings, query.k)) {
                ImageMatch match;
                match.id = hit.id;
                match.fused_score = hit.score;
                match.criterion_scores = scores_by_image[hit.id];
                match.skipped_criteria = skipped_by_image[hit.id];
                result.images.push_back(std::move(match));
            }
        }
    }
    return result;
}

namespace {

std::string image_context_summary(const ImageRecord& record) {
    std::string out = "image " + record.id + ":";
    const DescriptorSet& d = record.descriptors;
    if (d.color) {
        out += " color " + d.color->named_color + ";";
    }
    if (d.shape) {
        out += " shape " + std::string(shape_class_name(d.shape->cls)) + ";";
    }
    if (d.ocr && !d.ocr->tokens.empty()) {
        out += " text";
        for (const auto& token : d.ocr->tokens) out += " " + token;
        out += ";";
    }
    if (d.caption) {
        out += " caption " + *d.caption + ";";
    }
    if (record.labels.brand) out += " brand " + *record.labels.brand + ";";
    if (record.labels.product_type) out += " product " + *record.labels.product_type + ";";
    if (record.labels.tobacco_type) out += " tobacco " + *record.labels.tobacco_type + ";";
    if (out.back() == ';') out.pop_back();
    return out;
}

// Cuts the serialized list at the first block that no longer fits, which
// drops lowest-priority items first. Throws only when nothing fits at all.
std::vector<std::string> clip_to_budget(const std::vector<std::string>& blocks,
                                        size_t budget_words) {
    std::vector<std::string> out;
    size_t used = 0;
    for (const auto& block : blocks) {
        size_t words = word_count(block);
        if (used + words > budget_words) {
            if (out.empty()) {
                throw Error(Errc::ContextOverflow,
                            "top context item alone exceeds the word budget");
            }
            break;
        }
        out.push_back(block);
        used += words;
    }
    return out;
}

}  // namespace

GenerationResult generate_answer(const KnowledgeBase& kb, const Query& query,
                                 const RetrievalResult& retrieval,
                                 const ProviderSet& providers,
                                 const GenerationOptions& options) {
    if (!providers.chat) {
        throw Error(Errc::ConfigError, "chat provider is required");
    }
    const std::string tpl = options.generate_template.empty() ? default_generate_template()
                                                              : options.generate_template;
    const std::string prompt = render_template(tpl, {{"question", query.text}});

    GenerationResult out;
    if (query.mode == GenerationMode::Naive) {
        out.answer = providers.chat->chat(prompt, {}, std::nullopt);
        return out;
    }

    std::vector<std::string> blocks;
    if (query.mode == GenerationMode::Standard) {
        const size_t k = query.k < 1 ? 0 : static_cast<size_t>(query.k);
        if (!retrieval.images.empty()) {
            for (const auto& match : retrieval.images) {
                if (blocks.size() >= k) break;
                const ImageRecord* record = kb.find_image(match.id);
                if (record && record->descriptors.caption) {
                    blocks.push_back(*record->descriptors.caption);
                }
            }
        } else if (providers.embed_text && !kb.index().empty()) {
            std::vector<float> q = providers.embed_text->embed_text(query.text);
            for (const auto& hit : kb.index().top_k_where(q, k, prefix_filter("ic:"))) {
                const ImageRecord* record = kb.find_image(hit.id.substr(3));
                if (record && record->descriptors.caption) {
                    blocks.push_back(*record->descriptors.caption);
                }
            }
        }
    } else {
        for (const auto& item : retrieval.chunks) {
            const Chunk* chunk = kb.find_chunk(item.id);
            if (chunk) blocks.push_back(chunk->text);
        }
        for (const auto& item : retrieval.hyperedges) {
            const Hyperedge* edge = kb.find_hyperedge(item.id);
            if (edge) blocks.push_back(edge->relation_text);
        }
        for (const auto& item : retrieval.entities) {
            const Entity* entity = kb.find_entity(item.id);
            if (!entity) continue;
            blocks.push_back(entity->description.empty()
                                 ? entity->name
                                 : entity->name + ": " + entity->description);
        }
        for (const auto& match : retrieval.images) {
            const ImageRecord* record = kb.find_image(match.id);
            if (record) blocks.push_back(image_context_summary(*record));
        }
    }

    out.context_blocks = clip_to_budget(blocks, options.context_budget_words);
    out.answer = providers.chat->chat(prompt, out.context_blocks, std::nullopt);
    return out;
}

}  // namespace hyperrag
