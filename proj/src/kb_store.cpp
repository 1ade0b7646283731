#include "hyperrag/kb_store.hpp"

#include "hyperrag/errors.hpp"
#include "hyperrag/image.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

namespace hyperrag {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json color_to_json(const ColorDescriptor& c) {
    return json{{"avg_rgb", c.avg_rgb}, {"named_color", c.named_color}};
}

ColorDescriptor color_from_json(const json& j) {
    ColorDescriptor c;
    c.avg_rgb = j.at("avg_rgb").get<std::array<int, 3>>();
    c.named_color = j.at("named_color").get<std::string>();
    return c;
}

json shape_to_json(const ShapeDescriptor& s) {
    json j{{"aspect_ratio", s.aspect_ratio}, {"class", shape_class_name(s.cls)}};
    j["text"] = s.text ? json(*s.text) : json(nullptr);
    return j;
}

ShapeDescriptor shape_from_json(const json& j) {
    ShapeDescriptor s;
    s.aspect_ratio = j.at("aspect_ratio").get<double>();
    s.cls = shape_class_from_name(j.at("class").get<std::string>());
    if (!j.at("text").is_null()) {
        s.text = j.at("text").get<std::string>();
    }
    return s;
}

json descriptors_to_json(const DescriptorSet& d) {
    json j;
    j["caption"] = d.caption ? json(*d.caption) : json(nullptr);
    j["color"] = d.color ? color_to_json(*d.color) : json(nullptr);
    j["image_embedding_id"] = d.image_embedding_id;
    if (d.ocr) {
        j["ocr"] = json{{"confidences", d.ocr->confidences}, {"tokens", d.ocr->tokens}};
    } else {
        j["ocr"] = nullptr;
    }
    j["shape"] = d.shape ? shape_to_json(*d.shape) : json(nullptr);
    return j;
}

DescriptorSet descriptors_from_json(const json& j) {
    DescriptorSet d;
    if (!j.at("caption").is_null()) d.caption = j.at("caption").get<std::string>();
    if (!j.at("color").is_null()) d.color = color_from_json(j.at("color"));
    d.image_embedding_id = j.at("image_embedding_id").get<std::string>();
    if (!j.at("ocr").is_null()) {
        OcrDescriptor ocr;
        ocr.confidences = j.at("ocr").at("confidences").get<std::vector<double>>();
        ocr.tokens = j.at("ocr").at("tokens").get<std::vector<std::string>>();
        d.ocr = std::move(ocr);
    }
    if (!j.at("shape").is_null()) d.shape = shape_from_json(j.at("shape"));
    return d;
}

json labels_to_json(const ImageLabels& l) {
    json j;
    j["brand"] = l.brand ? json(*l.brand) : json(nullptr);
    j["product_type"] = l.product_type ? json(*l.product_type) : json(nullptr);
    j["tobacco_type"] = l.tobacco_type ? json(*l.tobacco_type) : json(nullptr);
    return j;
}

ImageLabels labels_from_json(const json& j) {
    ImageLabels l;
    if (!j.at("brand").is_null()) l.brand = j.at("brand").get<std::string>();
    if (!j.at("product_type").is_null()) l.product_type = j.at("product_type").get<std::string>();
    if (!j.at("tobacco_type").is_null()) l.tobacco_type = j.at("tobacco_type").get<std::string>();
    return l;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot write " + path.string());
    }
    for (const auto& line : lines) {
        out << line << '\n';
    }
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read " + path.string());
    }
    std::vector<json> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(Errc::IoError, "bad JSONL row in " + path.string());
        }
        rows.push_back(std::move(j));
    }
    return rows;
}

void put_le32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_le32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

} // namespace

void save_kb(const KnowledgeBase& kb, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(Errc::IoError, "cannot create " + dir + ": " + ec.message());
    }
    fs::path root(dir);

    // Row table: sorted embedding ids (map order) -> row indices.
    json rows = json::object();
    size_t row = 0;
    for (const auto& [id, values] : kb.index().vectors()) {
        rows[id] = row++;
    }

    json manifest;
    manifest["counts"] = json{{"chunks", kb.chunks().size()},
                              {"entities", kb.entities().size()},
                              {"hyperedges", kb.hyperedges().size()},
                              {"images", kb.images().size()}};
    manifest["embedding_dim"] = kb.embedding_dim();
    manifest["enabled_lambdas"] = kb.enabled_lambdas();
    manifest["format_version"] = kKbFormatVersion;
    manifest["rows"] = std::move(rows);
    {
        std::ofstream out(root / "manifest.json", std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::IoError, "cannot write manifest.json");
        }
        out << manifest.dump(2) << '\n';
    }

    std::vector<std::string> lines;
    for (const auto& [id, e] : kb.entities()) {
        json j{{"description", e.description},
               {"embedding_id", e.embedding_id},
               {"id", e.id},
               {"kind", entity_kind_name(e.kind)},
               {"name", e.name},
               {"sources", e.sources}};
        lines.push_back(j.dump());
    }
    write_lines(root / "entities.jsonl", lines);

    lines.clear();
    for (const auto& [id, e] : kb.hyperedges()) {
        json j{{"embedding_id", e.embedding_id},
               {"id", e.id},
               {"members", e.members},
               {"relation_text", e.relation_text},
               {"source", e.source},
               {"weight", e.weight}};
        lines.push_back(j.dump());
    }
    write_lines(root / "hyperedges.jsonl", lines);

    lines.clear();
    for (const auto& [id, c] : kb.chunks()) {
        json j{{"doc_id", c.doc_id},
               {"embedding_id", c.embedding_id},
               {"id", c.id},
               {"image_ids", c.image_ids},
               {"text", c.text}};
        lines.push_back(j.dump());
    }
    write_lines(root / "chunks.jsonl", lines);

    lines.clear();
    for (const auto& [id, img] : kb.images()) {
        json j{{"descriptors", descriptors_to_json(img.descriptors)},
               {"id", img.id},
               {"labels", labels_to_json(img.labels)},
               {"uri", img.uri}};
        lines.push_back(j.dump());
    }
    write_lines(root / "images.jsonl", lines);

    std::string blob;
    blob.reserve(kb.index().size() * kb.embedding_dim() * 4);
    for (const auto& [id, values] : kb.index().vectors()) {
        for (float v : values) {
            uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_le32(blob, bits);
        }
    }
    std::ofstream out(root / "vectors.bin", std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot write vectors.bin");
    }
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

KnowledgeBase load_kb(const std::string& dir) {
    fs::path root(dir);
    std::ifstream in(root / "manifest.json", std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read manifest.json in " + dir);
    }
    json manifest = json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) {
        throw Error(Errc::CorruptManifest, "manifest.json is not valid JSON");
    }
    if (!manifest.contains("format_version") || !manifest.contains("embedding_dim") ||
        !manifest.contains("rows") || !manifest.contains("enabled_lambdas")) {
        throw Error(Errc::CorruptManifest, "manifest.json missing required fields");
    }
    if (manifest["format_version"].get<int>() != kKbFormatVersion) {
        throw Error(Errc::VersionMismatch,
                    "KB format version " + manifest["format_version"].dump() +
                        ", expected " + std::to_string(kKbFormatVersion));
    }

    uint32_t dim = manifest["embedding_dim"].get<uint32_t>();
    LambdaSet lambdas = manifest["enabled_lambdas"].get<LambdaSet>();
    KnowledgeBase kb(dim, std::move(lambdas));

    // Entities first so edges can resolve members.
    for (const auto& j : read_jsonl(root / "entities.jsonl")) {
        std::string id = kb.add_entity(j.at("name").get<std::string>(),
                                       entity_kind_from_name(j.at("kind").get<std::string>()),
                                       "", "");
        Entity* e = kb.mutable_entity(id);
        e->description = j.at("description").get<std::string>();
        e->sources = j.at("sources").get<std::set<std::string>>();
        e->embedding_id = j.at("embedding_id").get<std::string>();
        if (e->id != j.at("id").get<std::string>()) {
            throw Error(Errc::CorruptManifest, "entity id mismatch for " + e->name);
        }
    }
    for (const auto& j : read_jsonl(root / "hyperedges.jsonl")) {
        std::string id = kb.add_hyperedge(j.at("members").get<std::vector<std::string>>(),
                                          j.at("relation_text").get<std::string>(),
                                          j.at("weight").get<double>(),
                                          j.at("source").get<std::string>());
        if (id != j.at("id").get<std::string>()) {
            throw Error(Errc::CorruptManifest, "hyperedge id mismatch");
        }
        kb.mutable_hyperedge(id)->embedding_id = j.at("embedding_id").get<std::string>();
    }
    for (const auto& j : read_jsonl(root / "chunks.jsonl")) {
        Chunk c;
        c.id = j.at("id").get<std::string>();
        c.text = j.at("text").get<std::string>();
        c.doc_id = j.at("doc_id").get<std::string>();
        c.embedding_id = j.at("embedding_id").get<std::string>();
        c.image_ids = j.at("image_ids").get<std::vector<std::string>>();
        kb.add_chunk(std::move(c));
    }
    for (const auto& j : read_jsonl(root / "images.jsonl")) {
        ImageRecord img;
        img.id = j.at("id").get<std::string>();
        img.uri = j.at("uri").get<std::string>();
        img.labels = labels_from_json(j.at("labels"));
        img.descriptors = descriptors_from_json(j.at("descriptors"));
        kb.add_image(std::move(img));
    }

    auto vector_bytes = read_file_bytes((root / "vectors.bin").string());
    const json& rows = manifest["rows"];
    size_t expected = rows.size() * static_cast<size_t>(dim) * 4;
    if (vector_bytes.size() != expected) {
        throw Error(Errc::CorruptManifest,
                    "vectors.bin size " + std::to_string(vector_bytes.size()) +
                        ", expected " + std::to_string(expected));
    }
    for (auto it = rows.begin(); it != rows.end(); ++it) {
        size_t row = it.value().get<size_t>();
        std::vector<float> values(dim);
        const uint8_t* base = vector_bytes.data() + row * dim * 4;
        for (uint32_t i = 0; i < dim; ++i) {
            uint32_t bits = get_le32(base + i * 4);
            std::memcpy(&values[i], &bits, 4);
        }
        kb.index().upsert(it.key(), std::move(values));
    }
    return kb;
}

} // namespace hyperrag
