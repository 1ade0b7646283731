// Uniform protocol for external model providers (chat, embeddings, OCR,
// captioning) plus deterministic in-process mocks used by tests and fixtures.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hyperrag {

enum class ProviderKind { Chat, EmbedText, EmbedImage, Ocr, Caption };

std::string provider_kind_name(ProviderKind kind);
ProviderKind provider_kind_from_name(const std::string& name);

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Chat;
    std::string endpoint = "mock";  // base URL, or "mock" for the in-process implementation
    std::string model_name;
    double timeout_seconds = 30.0;
    int max_retries = 2;
    std::string api_key_env;    // name of the env var holding the key; never the key itself
    uint32_t dimension = 64;    // embedding providers only
    std::string fixture_path;   // mock ocr/caption: JSON map of image hash -> canned output
};

// Shared across all providers of a ProviderSet. Counters, not config.
struct ProviderStats {
    std::atomic<uint64_t> chat_calls{0};
    std::atomic<uint64_t> embed_text_calls{0};
    std::atomic<uint64_t> embed_image_calls{0};
    std::atomic<uint64_t> ocr_calls{0};
    std::atomic<uint64_t> caption_calls{0};
    std::atomic<uint64_t> retries{0};
    std::atomic<uint64_t> chat_image_payloads{0};
    std::atomic<uint64_t> chat_token_estimate{0};
    std::atomic<uint64_t> cache_hits{0};

    uint64_t calls(ProviderKind kind) const;
    uint64_t total_calls() const;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

struct OcrResult {
    std::vector<std::string> tokens;
    std::vector<double> confidences;

    bool operator==(const OcrResult&) const = default;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    // context_blocks are serialized retrieval items; image is raw encoded bytes.
    // Implementations must count image payloads so callers can assert none were sent.
    virtual std::string chat(const std::string& prompt,
                             const std::vector<std::string>& context_blocks,
                             const std::optional<std::vector<uint8_t>>& image = std::nullopt) = 0;
};

class TextEmbedProvider {
public:
    virtual ~TextEmbedProvider() = default;
    virtual std::vector<float> embed_text(const std::string& text) = 0;
    virtual uint32_t dimension() const = 0;
};

class ImageEmbedProvider {
public:
    virtual ~ImageEmbedProvider() = default;
    virtual std::vector<float> embed_image(const std::vector<uint8_t>& image_bytes) = 0;
    virtual uint32_t dimension() const = 0;
};

class OcrProvider {
public:
    virtual ~OcrProvider() = default;
    virtual OcrResult ocr(const std::vector<uint8_t>& image_bytes) = 0;
};

class CaptionProvider {
public:
    virtual ~CaptionProvider() = default;
    virtual std::string caption(const std::vector<uint8_t>& image_bytes) = 0;
};

// Deterministic embedding shared by the mock text and image providers:
// L2-normalized 64-bin histogram of FNV-1a-hashed byte trigrams. Inputs
// shorter than 3 bytes hash as a single window. Throws EmptyInput on empty.
std::vector<float> trigram_embedding(const std::vector<uint8_t>& bytes);

inline constexpr uint32_t kMockEmbeddingDim = 64;

class MockTextEmbedProvider : public TextEmbedProvider {
public:
    explicit MockTextEmbedProvider(std::shared_ptr<ProviderStats> stats);
    std::vector<float> embed_text(const std::string& text) override;  // lowercases first
    uint32_t dimension() const override { return kMockEmbeddingDim; }

private:
    std::shared_ptr<ProviderStats> stats_;
};

class MockImageEmbedProvider : public ImageEmbedProvider {
public:
    explicit MockImageEmbedProvider(std::shared_ptr<ProviderStats> stats);
    std::vector<float> embed_image(const std::vector<uint8_t>& image_bytes) override;
    uint32_t dimension() const override { return kMockEmbeddingDim; }

private:
    std::shared_ptr<ProviderStats> stats_;
};

// Routes on prompt markers: a judge prompt (contains "comprehensiveness")
// scores PREDICTION vs GOLD by token Jaccard; an extraction prompt (contains
// "\"entities\"") runs a rule-based extractor over the text after the last
// "TEXT:" marker; anything else echoes "ANSWER: " + first context block.
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::shared_ptr<ProviderStats> stats);
    std::string chat(const std::string& prompt,
                     const std::vector<std::string>& context_blocks,
                     const std::optional<std::vector<uint8_t>>& image) override;

private:
    std::shared_ptr<ProviderStats> stats_;
};

class MockOcrProvider : public OcrProvider {
public:
    MockOcrProvider(std::map<std::string, OcrResult> fixture, std::shared_ptr<ProviderStats> stats);
    // Unknown hash yields an empty result, matching an OCR engine seeing no text.
    OcrResult ocr(const std::vector<uint8_t>& image_bytes) override;

private:
    std::map<std::string, OcrResult> fixture_;
    std::shared_ptr<ProviderStats> stats_;
};

class MockCaptionProvider : public CaptionProvider {
public:
    MockCaptionProvider(std::map<std::string, std::string> fixture,
                        std::shared_ptr<ProviderStats> stats);
    // Unknown hash throws ProviderError: a captioner always says something.
    std::string caption(const std::vector<uint8_t>& image_bytes) override;

private:
    std::map<std::string, std::string> fixture_;
    std::shared_ptr<ProviderStats> stats_;
};

// Fixture maps are JSON objects keyed by image content hash.
void write_ocr_fixture(const std::string& path, const std::map<std::string, OcrResult>& entries);
std::map<std::string, OcrResult> read_ocr_fixture(const std::string& path);
void write_caption_fixture(const std::string& path,
                           const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> read_caption_fixture(const std::string& path);

// HTTP implementations speak OpenAI-compatible JSON for chat and embeddings;
// OCR and caption use a one-endpoint protocol: POST {"image_b64": ...} ->
// {"tokens": [], "confidences": []} or {"caption": ""}. Retries use
// exponential backoff (base 500 ms, x2); total attempts = max_retries + 1.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(ProviderConfig config, std::shared_ptr<ProviderStats> stats, SleepFn sleep);
    std::string chat(const std::string& prompt,
                     const std::vector<std::string>& context_blocks,
                     const std::optional<std::vector<uint8_t>>& image) override;

private:
    ProviderConfig config_;
    std::shared_ptr<ProviderStats> stats_;
    SleepFn sleep_;
};

class HttpEmbedProvider : public TextEmbedProvider, public ImageEmbedProvider {
public:
    HttpEmbedProvider(ProviderConfig config, std::shared_ptr<ProviderStats> stats, SleepFn sleep);
    std::vector<float> embed_text(const std::string& text) override;
    std::vector<float> embed_image(const std::vector<uint8_t>& image_bytes) override;
    uint32_t dimension() const override { return config_.dimension; }

private:
    ProviderConfig config_;
    std::shared_ptr<ProviderStats> stats_;
    SleepFn sleep_;
};

class HttpOcrProvider : public OcrProvider {
public:
    HttpOcrProvider(ProviderConfig config, std::shared_ptr<ProviderStats> stats, SleepFn sleep);
    OcrResult ocr(const std::vector<uint8_t>& image_bytes) override;

private:
    ProviderConfig config_;
    std::shared_ptr<ProviderStats> stats_;
    SleepFn sleep_;
};

class HttpCaptionProvider : public CaptionProvider {
public:
    HttpCaptionProvider(ProviderConfig config, std::shared_ptr<ProviderStats> stats, SleepFn sleep);
    std::string caption(const std::vector<uint8_t>& image_bytes) override;

private:
    ProviderConfig config_;
    std::shared_ptr<ProviderStats> stats_;
    SleepFn sleep_;
};

// Persistent OCR/caption response cache keyed by image content hash. Lives
// under the KB directory; only the build command opens it writable.
class ProviderCache {
public:
    ProviderCache() = default;  // in-memory only, never persisted
    static ProviderCache open(const std::string& dir, bool writable);

    // Hits increment stats->cache_hits once bound.
    void bind_stats(std::shared_ptr<ProviderStats> stats) { stats_ = std::move(stats); }

    std::optional<OcrResult> get_ocr(const std::string& image_hash) const;
    void put_ocr(const std::string& image_hash, const OcrResult& result);
    std::optional<std::string> get_caption(const std::string& image_hash) const;
    void put_caption(const std::string& image_hash, const std::string& caption);

    // Writes ocr.json / caption.json when opened writable; no-op otherwise.
    void flush();

private:
    std::string dir_;
    bool writable_ = false;
    bool dirty_ = false;
    std::shared_ptr<ProviderStats> stats_;
    std::map<std::string, OcrResult> ocr_;
    std::map<std::string, std::string> caption_;
    // unique_ptr keeps the cache movable; writes are serialized per instance.
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

struct ProviderSet {
    std::shared_ptr<ProviderStats> stats;
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<TextEmbedProvider> embed_text;
    std::shared_ptr<ImageEmbedProvider> embed_image;
    std::shared_ptr<OcrProvider> ocr;      // may be null when lambda 3 is disabled
    std::shared_ptr<CaptionProvider> caption;  // may be null when lambda 4 is disabled
};

// Builds providers from per-kind configs (keys = provider kind names).
// endpoint "mock" selects the in-process implementation. chat/embed_text/
// embed_image are required; ocr/caption are optional.
ProviderSet make_providers(const std::map<std::string, ProviderConfig>& configs,
                           SleepFn sleep = {});

}  // namespace hyperrag
