#pragma once

#include <string>

#include "hyperrag/model.hpp"

namespace hyperrag {

// On-disk layout: a directory holding manifest.json, entities.jsonl,
// hyperedges.jsonl, chunks.jsonl, images.jsonl, and vectors.bin
// (little-endian float32 rows, row order given by the manifest's
// embedding_id -> row table). JSONL rows are sorted by id so a
// save/load/save cycle is byte-identical.

constexpr int kKbFormatVersion = 1;

void save_kb(const KnowledgeBase& kb, const std::string& dir);
KnowledgeBase load_kb(const std::string& dir);

} // namespace hyperrag
