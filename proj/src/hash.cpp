#include "hyperrag/hash.hpp"

#include "hyperrag/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>

namespace hyperrag {

namespace {

std::string to_hex(std::span<const uint8_t> digest) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest.size() * 2);
    for (uint8_t b : digest) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0x0f]);
    }
    return out;
}

} // namespace

std::string content_hash(std::span<const uint8_t> bytes) {
    // SHA-256 truncated to 128 bits; identity only, nothing cryptographic
    // rides on the truncation.
    std::array<uint8_t, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
    EVP_DigestFinal_ex(ctx, digest.data(), &len);
    EVP_MD_CTX_free(ctx);
    return to_hex(std::span<const uint8_t>(digest.data(), 16));
}

std::string content_hash(const std::string& text) {
    return content_hash(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

std::string content_hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read file: " + path);
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return content_hash(std::span<const uint8_t>(bytes.data(), bytes.size()));
}

uint64_t fnv1a64(std::span<const uint8_t> bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace hyperrag
