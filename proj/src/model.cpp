#include "hyperrag/model.hpp"

#include "hyperrag/errors.hpp"
#include "hyperrag/hash.hpp"
#include "hyperrag/text.hpp"

#include <algorithm>

namespace hyperrag {

namespace {

constexpr const char* kDescriptionSep = "<SEP>";
constexpr size_t kDescriptionCap = 4096;
constexpr char kKeySep = '\x1f';

std::string entity_key(const std::string& normalized_name, EntityKind kind) {
    return normalized_name + kKeySep + entity_kind_name(kind);
}

} // namespace

const char* entity_kind_name(EntityKind kind) {
    switch (kind) {
        case EntityKind::Text: return "text";
        case EntityKind::Image: return "image";
        case EntityKind::Descriptor: return "descriptor";
    }
    return "text";
}

EntityKind entity_kind_from_name(const std::string& name) {
    if (name == "text") return EntityKind::Text;
    if (name == "image") return EntityKind::Image;
    if (name == "descriptor") return EntityKind::Descriptor;
    throw Error(Errc::CorruptManifest, "unknown entity kind: " + name);
}

std::string entity_id_for(const std::string& normalized_name, EntityKind kind) {
    return content_hash(entity_key(normalized_name, kind));
}

std::string chunk_id_for(const std::string& doc_id, size_t word_offset) {
    return content_hash(doc_id + kKeySep + std::to_string(word_offset));
}

std::string hyperedge_id_for(const std::vector<std::string>& members,
                             const std::string& relation_text,
                             const std::string& source) {
    std::string key = "edge";
    for (const auto& m : members) {
        key += kKeySep + m;
    }
    key += kKeySep + relation_text + kKeySep + source;
    return content_hash(key);
}

const char* shape_class_name(ShapeClass c) {
    switch (c) {
        case ShapeClass::Square: return "square";
        case ShapeClass::Tall: return "tall";
        case ShapeClass::Wide: return "wide";
    }
    return "square";
}

ShapeClass shape_class_from_name(const std::string& name) {
    if (name == "square") return ShapeClass::Square;
    if (name == "tall") return ShapeClass::Tall;
    if (name == "wide") return ShapeClass::Wide;
    throw Error(Errc::CorruptManifest, "unknown shape class: " + name);
}

ShapeClass classify_aspect_ratio(double ratio) {
    if (ratio > 1.1) return ShapeClass::Wide;
    if (ratio < 0.9) return ShapeClass::Tall;
    return ShapeClass::Square;
}

KnowledgeBase::KnowledgeBase(uint32_t embedding_dim, LambdaSet enabled_lambdas)
    : index_(embedding_dim), embedding_dim_(embedding_dim),
      enabled_lambdas_(std::move(enabled_lambdas)) {}

void KnowledgeBase::set_embedding_dim(uint32_t dim) {
    index_.set_dim(dim);
    embedding_dim_ = dim;
}

std::string KnowledgeBase::add_entity(const std::string& name, EntityKind kind,
                                      const std::string& description,
                                      const std::string& source) {
    std::string normalized = normalize_name(name);
    if (normalized.empty()) {
        throw Error(Errc::EmptyName, "entity name empty after normalization");
    }

    std::string key = entity_key(normalized, kind);
    auto it = key_to_entity_.find(key);
    if (it != key_to_entity_.end()) {
        Entity& existing = entities_.at(it->second);
        std::string desc = trim(description);
        // Merge: skip descriptions already present verbatim, cap total size.
        if (!desc.empty() &&
            existing.description.find(desc) == std::string::npos &&
            existing.description.size() < kDescriptionCap) {
            std::string merged = existing.description.empty()
                                     ? desc
                                     : existing.description + kDescriptionSep + desc;
            if (merged.size() > kDescriptionCap) {
                merged.resize(kDescriptionCap);
            }
            existing.description = merged;
        }
        if (!source.empty()) {
            existing.sources.insert(source);
        }
        return existing.id;
    }

    Entity entity;
    entity.id = entity_id_for(normalized, kind);
    entity.name = normalized;
    entity.kind = kind;
    entity.description = trim(description);
    if (entity.description.size() > kDescriptionCap) {
        entity.description.resize(kDescriptionCap);
    }
    if (!source.empty()) {
        entity.sources.insert(source);
    }
    key_to_entity_[key] = entity.id;
    std::string id = entity.id;
    entities_[id] = std::move(entity);
    return id;
}

std::string KnowledgeBase::add_hyperedge(const std::vector<std::string>& members,
                                         const std::string& relation_text, double weight,
                                         const std::string& source) {
    if (members.size() < 2) {
        throw Error(Errc::ArityTooSmall,
                    "hyperedge needs >= 2 members, got " + std::to_string(members.size()));
    }
    if (weight < 0.0 || weight > 1.0) {
        throw Error(Errc::WeightOutOfRange, "weight " + std::to_string(weight));
    }
    for (const auto& member : members) {
        if (!entities_.count(member)) {
            throw Error(Errc::UnknownEntity, "hyperedge member not in KB: " + member);
        }
    }

    Hyperedge edge;
    edge.id = hyperedge_id_for(members, relation_text, source);
    edge.members = members;
    edge.relation_text = relation_text;
    edge.weight = weight;
    edge.source = source;

    if (!hyperedges_.count(edge.id)) {
        for (const auto& member : members) {
            entity_to_edges_[member].push_back(edge.id);
        }
    }
    std::string id = edge.id;
    hyperedges_[id] = std::move(edge);
    return id;
}

void KnowledgeBase::add_chunk(Chunk chunk) {
    chunks_[chunk.id] = std::move(chunk);
}

void KnowledgeBase::add_image(ImageRecord image) {
    images_[image.id] = std::move(image);
}

std::set<std::string> KnowledgeBase::neighbors(const std::string& entity_id) const {
    if (!entities_.count(entity_id)) {
        throw Error(Errc::UnknownEntity, "no entity " + entity_id);
    }
    std::set<std::string> result;
    auto it = entity_to_edges_.find(entity_id);
    if (it == entity_to_edges_.end()) {
        return result;
    }
    for (const auto& edge_id : it->second) {
        for (const auto& member : hyperedges_.at(edge_id).members) {
            if (member != entity_id) {
                result.insert(member);
            }
        }
    }
    return result;
}

std::vector<std::string> KnowledgeBase::incident_edges(const std::string& entity_id) const {
    if (!entities_.count(entity_id)) {
        throw Error(Errc::UnknownEntity, "no entity " + entity_id);
    }
    auto it = entity_to_edges_.find(entity_id);
    return it == entity_to_edges_.end() ? std::vector<std::string>{} : it->second;
}

const Entity* KnowledgeBase::find_entity(const std::string& id) const {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

const Entity* KnowledgeBase::find_entity_by_key(const std::string& name,
                                                EntityKind kind) const {
    auto it = key_to_entity_.find(entity_key(normalize_name(name), kind));
    return it == key_to_entity_.end() ? nullptr : &entities_.at(it->second);
}

const Hyperedge* KnowledgeBase::find_hyperedge(const std::string& id) const {
    auto it = hyperedges_.find(id);
    return it == hyperedges_.end() ? nullptr : &it->second;
}

const Chunk* KnowledgeBase::find_chunk(const std::string& id) const {
    auto it = chunks_.find(id);
    return it == chunks_.end() ? nullptr : &it->second;
}

const ImageRecord* KnowledgeBase::find_image(const std::string& id) const {
    auto it = images_.find(id);
    return it == images_.end() ? nullptr : &it->second;
}

Entity* KnowledgeBase::mutable_entity(const std::string& id) {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

Hyperedge* KnowledgeBase::mutable_hyperedge(const std::string& id) {
    auto it = hyperedges_.find(id);
    return it == hyperedges_.end() ? nullptr : &it->second;
}

ImageRecord* KnowledgeBase::mutable_image(const std::string& id) {
    auto it = images_.find(id);
    return it == images_.end() ? nullptr : &it->second;
}

std::vector<std::string> KnowledgeBase::integrity_violations() const {
    std::vector<std::string> violations;
    for (const auto& [id, edge] : hyperedges_) {
        if (edge.members.size() < 2) {
            violations.push_back("edge " + id + " arity < 2");
        }
        for (const auto& member : edge.members) {
            if (!entities_.count(member)) {
                violations.push_back("edge " + id + " references missing entity " + member);
            }
        }
        if (edge.weight < 0.0 || edge.weight > 1.0) {
            violations.push_back("edge " + id + " weight out of range");
        }
        if (!edge.embedding_id.empty() && !index_.contains(edge.embedding_id)) {
            violations.push_back("edge " + id + " missing embedding row");
        }
    }
    for (const auto& [id, entity] : entities_) {
        if (entity.name.empty()) {
            violations.push_back("entity " + id + " has empty name");
        }
        for (const auto& src : entity.sources) {
            if (!chunks_.count(src) && !images_.count(src)) {
                violations.push_back("entity " + id + " references missing source " + src);
            }
        }
        if (!entity.embedding_id.empty() && !index_.contains(entity.embedding_id)) {
            violations.push_back("entity " + id + " missing embedding row");
        }
    }
    for (const auto& [id, chunk] : chunks_) {
        if (chunk.text.empty()) {
            violations.push_back("chunk " + id + " has empty text");
        }
        for (const auto& img : chunk.image_ids) {
            if (!images_.count(img)) {
                violations.push_back("chunk " + id + " references missing image " + img);
            }
        }
        if (!chunk.embedding_id.empty() && !index_.contains(chunk.embedding_id)) {
            violations.push_back("chunk " + id + " missing embedding row");
        }
    }
    for (const auto& [id, values] : index_.vectors()) {
        if (values.size() != embedding_dim_) {
            violations.push_back("vector " + id + " dimension mismatch");
        }
    }
    return violations;
}

bool KnowledgeBase::operator==(const KnowledgeBase& other) const {
    return entities_ == other.entities_ && hyperedges_ == other.hyperedges_ &&
           chunks_ == other.chunks_ && images_ == other.images_ &&
           index_ == other.index_ && embedding_dim_ == other.embedding_dim_ &&
           enabled_lambdas_ == other.enabled_lambdas_;
}

} // namespace hyperrag
