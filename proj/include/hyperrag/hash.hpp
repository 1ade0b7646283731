#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hyperrag {

// 128-bit content hash rendered as 32 lowercase hex chars.
// All stable identifiers in a knowledge base directory are derived this way.
std::string content_hash(std::span<const uint8_t> bytes);
std::string content_hash(const std::string& text);

// Hash of a whole file's bytes. Throws Error(IoError) if unreadable.
std::string content_hash_file(const std::string& path);

// FNV-1a 64-bit, used for trigram binning in the mock embedders.
uint64_t fnv1a64(std::span<const uint8_t> bytes);

} // namespace hyperrag
