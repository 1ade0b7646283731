#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperrag/vector_index.hpp"

namespace hyperrag {

enum class EntityKind { Text, Image, Descriptor };

const char* entity_kind_name(EntityKind kind);
EntityKind entity_kind_from_name(const std::string& name);

// Identity derivation. Entity ids hash the normalized name plus kind, chunk
// ids hash the owning document plus word offset, image ids hash file bytes.
std::string entity_id_for(const std::string& normalized_name, EntityKind kind);
std::string chunk_id_for(const std::string& doc_id, size_t word_offset);
std::string hyperedge_id_for(const std::vector<std::string>& members,
                             const std::string& relation_text,
                             const std::string& source);

struct Entity {
    std::string id;
    std::string name; // normalized: lowercased, trimmed
    EntityKind kind = EntityKind::Text;
    std::string description;
    std::set<std::string> sources; // chunk or image ids
    std::string embedding_id;      // empty until embedded

    bool operator==(const Entity&) const = default;
};

struct Hyperedge {
    std::string id;
    std::vector<std::string> members; // ordered entity ids, arity >= 2
    std::string relation_text;
    double weight = 1.0;
    std::string source; // chunk or image id
    std::string embedding_id;

    bool operator==(const Hyperedge&) const = default;
};

struct Chunk {
    std::string id;
    std::string text;
    std::string doc_id;
    std::string embedding_id;
    std::vector<std::string> image_ids;

    bool operator==(const Chunk&) const = default;
};

struct ColorDescriptor {
    std::array<int, 3> avg_rgb{0, 0, 0};
    std::string named_color;

    bool operator==(const ColorDescriptor&) const = default;
};

enum class ShapeClass { Square, Tall, Wide };

const char* shape_class_name(ShapeClass c);
ShapeClass shape_class_from_name(const std::string& name);

// Classification thresholds: ratios inside [0.9, 1.1] are square, above is
// wide, below is tall.
ShapeClass classify_aspect_ratio(double ratio);

struct ShapeDescriptor {
    ShapeClass cls = ShapeClass::Square;
    double aspect_ratio = 1.0;
    std::optional<std::string> text;

    bool operator==(const ShapeDescriptor&) const = default;
};

struct OcrDescriptor {
    std::vector<std::string> tokens;
    std::vector<double> confidences;

    bool operator==(const OcrDescriptor&) const = default;
};

// Per-image extractor outputs. A missing optional means the extractor was
// disabled or failed; an OcrDescriptor with empty tokens means it ran and
// found nothing.
struct DescriptorSet {
    std::optional<ColorDescriptor> color;
    std::optional<ShapeDescriptor> shape;
    std::optional<OcrDescriptor> ocr;
    std::optional<std::string> caption;
    std::string image_embedding_id;

    bool operator==(const DescriptorSet&) const = default;
};

struct ImageLabels {
    std::optional<std::string> tobacco_type;
    std::optional<std::string> product_type;
    std::optional<std::string> brand;

    bool operator==(const ImageLabels&) const = default;
};

struct ImageRecord {
    std::string id; // content hash of the file bytes
    std::string uri;
    ImageLabels labels;
    DescriptorSet descriptors;

    bool operator==(const ImageRecord&) const = default;
};

// Lambda extractor identifiers 1..4: color, shape, ocr, caption.
using LambdaSet = std::set<int>;

// The hypergraph knowledge base: entities, n-ary relations, text chunks,
// image records, and the single vector store behind all similarity queries.
class KnowledgeBase {
public:
    KnowledgeBase() : KnowledgeBase(0, {1, 2, 3, 4}) {}
    KnowledgeBase(uint32_t embedding_dim, LambdaSet enabled_lambdas);

    // Creates the entity or merges into an existing one keyed by
    // (normalized name, kind): descriptions are concatenated (duplicates
    // skipped, capped at 4096 chars), sources unioned. Returns the id.
    std::string add_entity(const std::string& name, EntityKind kind,
                           const std::string& description, const std::string& source);

    std::string add_hyperedge(const std::vector<std::string>& members,
                              const std::string& relation_text, double weight,
                              const std::string& source);

    void add_chunk(Chunk chunk);
    void add_image(ImageRecord image);

    // Union of co-members over all hyperedges incident to the entity,
    // excluding the entity itself.
    std::set<std::string> neighbors(const std::string& entity_id) const;

    // Ids of hyperedges containing the entity.
    std::vector<std::string> incident_edges(const std::string& entity_id) const;

    const Entity* find_entity(const std::string& id) const;
    const Entity* find_entity_by_key(const std::string& name, EntityKind kind) const;
    const Hyperedge* find_hyperedge(const std::string& id) const;
    const Chunk* find_chunk(const std::string& id) const;
    const ImageRecord* find_image(const std::string& id) const;

    Entity* mutable_entity(const std::string& id);
    Hyperedge* mutable_hyperedge(const std::string& id);
    ImageRecord* mutable_image(const std::string& id);

    const std::map<std::string, Entity>& entities() const { return entities_; }
    const std::map<std::string, Hyperedge>& hyperedges() const { return hyperedges_; }
    const std::map<std::string, Chunk>& chunks() const { return chunks_; }
    const std::map<std::string, ImageRecord>& images() const { return images_; }

    VectorIndex& index() { return index_; }
    const VectorIndex& index() const { return index_; }

    uint32_t embedding_dim() const { return embedding_dim_; }
    void set_embedding_dim(uint32_t dim);
    const LambdaSet& enabled_lambdas() const { return enabled_lambdas_; }
    void set_enabled_lambdas(LambdaSet lambdas) { enabled_lambdas_ = std::move(lambdas); }

    // All cross-references resolve: edge members, entity sources, chunk
    // image links, embedding ids. Returns a list of violations, empty when
    // the KB is consistent.
    std::vector<std::string> integrity_violations() const;

    bool operator==(const KnowledgeBase& other) const;

private:
    std::map<std::string, Entity> entities_;
    std::map<std::string, Hyperedge> hyperedges_;
    std::map<std::string, Chunk> chunks_;
    std::map<std::string, ImageRecord> images_;
    std::unordered_map<std::string, std::string> key_to_entity_; // "name\x1fkind" -> id
    std::unordered_map<std::string, std::vector<std::string>> entity_to_edges_;
    VectorIndex index_;
    uint32_t embedding_dim_ = 0;
    LambdaSet enabled_lambdas_;
};

} // namespace hyperrag
