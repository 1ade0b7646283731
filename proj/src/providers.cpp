#include "hyperrag/providers.hpp"

#include "hyperrag/errors.hpp"
#include "hyperrag/hash.hpp"
#include "hyperrag/text.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

namespace hyperrag {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string provider_kind_name(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::Chat: return "chat";
        case ProviderKind::EmbedText: return "embed_text";
        case ProviderKind::EmbedImage: return "embed_image";
        case ProviderKind::Ocr: return "ocr";
        case ProviderKind::Caption: return "caption";
    }
    return "chat";
}

ProviderKind provider_kind_from_name(const std::string& name) {
    if (name == "chat") return ProviderKind::Chat;
    if (name == "embed_text") return ProviderKind::EmbedText;
    if (name == "embed_image") return ProviderKind::EmbedImage;
    if (name == "ocr") return ProviderKind::Ocr;
    if (name == "caption") return ProviderKind::Caption;
    throw Error(Errc::ConfigError, "unknown provider kind: " + name);
}

uint64_t ProviderStats::calls(ProviderKind kind) const {
    switch (kind) {
        case ProviderKind::Chat: return chat_calls.load();
        case ProviderKind::EmbedText: return embed_text_calls.load();
        case ProviderKind::EmbedImage: return embed_image_calls.load();
        case ProviderKind::Ocr: return ocr_calls.load();
        case ProviderKind::Caption: return caption_calls.load();
    }
    return 0;
}

uint64_t ProviderStats::total_calls() const {
    return chat_calls.load() + embed_text_calls.load() + embed_image_calls.load() +
           ocr_calls.load() + caption_calls.load();
}

std::vector<float> trigram_embedding(const std::vector<uint8_t>& bytes) {
    if (bytes.empty()) {
        throw Error(Errc::EmptyInput, "cannot embed empty input");
    }
    std::vector<double> bins(kMockEmbeddingDim, 0.0);
    if (bytes.size() < 3) {
        bins[fnv1a64(std::span<const uint8_t>(bytes)) % kMockEmbeddingDim] += 1.0;
    } else {
        for (size_t i = 0; i + 3 <= bytes.size(); ++i) {
            std::span<const uint8_t> window(bytes.data() + i, 3);
            bins[fnv1a64(window) % kMockEmbeddingDim] += 1.0;
        }
    }
    double norm = 0.0;
    for (double b : bins) norm += b * b;
    norm = std::sqrt(norm);
    std::vector<float> out(kMockEmbeddingDim);
    for (size_t i = 0; i < bins.size(); ++i) {
        out[i] = static_cast<float>(bins[i] / norm);
    }
    return out;
}

MockTextEmbedProvider::MockTextEmbedProvider(std::shared_ptr<ProviderStats> stats)
    : stats_(std::move(stats)) {}

std::vector<float> MockTextEmbedProvider::embed_text(const std::string& text) {
    std::string lowered = to_lower(text);
    std::vector<uint8_t> bytes(lowered.begin(), lowered.end());
    auto v = trigram_embedding(bytes);
    if (stats_) stats_->embed_text_calls.fetch_add(1);
    return v;
}

MockImageEmbedProvider::MockImageEmbedProvider(std::shared_ptr<ProviderStats> stats)
    : stats_(std::move(stats)) {}

std::vector<float> MockImageEmbedProvider::embed_image(const std::vector<uint8_t>& image_bytes) {
    auto v = trigram_embedding(image_bytes);
    if (stats_) stats_->embed_image_calls.fetch_add(1);
    return v;
}

namespace {

const std::set<std::string>& extraction_stopwords() {
    static const std::set<std::string> words = {
        "a",     "after", "all",   "also",  "an",    "and",  "are",   "as",    "at",
        "be",    "been",  "before", "both",  "but",   "by",   "each",  "for",   "from",
        "he",    "her",   "his",   "i",     "if",    "in",   "is",    "it",    "its",
        "no",    "not",   "of",    "on",    "or",    "our",  "she",   "that",  "the",
        "their", "them",  "then",  "these", "they",  "this", "those", "to",    "was",
        "we",    "were",  "when",  "while", "with",  "you",  "your"};
    return words;
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?') {
            std::string t = trim(current);
            if (!t.empty()) out.push_back(t);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    std::string t = trim(current);
    if (!t.empty()) out.push_back(t);
    return out;
}

bool is_capitalized(const std::string& word) {
    for (char c : word) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return std::isupper(static_cast<unsigned char>(c)) != 0;
        }
    }
    return false;
}

std::string cap_length(std::string s, size_t limit) {
    if (s.size() > limit) s.resize(limit);
    return trim(s);
}

// Capitalized-word runs become entities; sentences holding two or more
// distinct entities become one n-ary relation each.
json rule_based_extraction(const std::string& source) {
    std::vector<json> entities;
    std::set<std::string> seen_entities;  // lowercase names
    std::vector<json> relations;

    for (const auto& sentence : split_sentences(source)) {
        std::vector<std::string> words = split_words(sentence);
        std::vector<std::string> names;  // in order of appearance
        std::vector<std::string> run;
        auto flush_run = [&]() {
            if (run.empty()) return;
            bool all_stop = true;
            for (const auto& w : run) {
                if (!extraction_stopwords().count(to_lower(w))) all_stop = false;
            }
            std::string name;
            for (const auto& w : run) {
                if (!name.empty()) name += ' ';
                name += w;
            }
            run.clear();
            if (all_stop || name.size() < 2) return;
            names.push_back(name);
        };
        for (const auto& raw : words) {
            std::string word = strip_punct(raw);
            if (!word.empty() && is_capitalized(word)) {
                run.push_back(word);
            } else {
                flush_run();
            }
        }
        flush_run();

        std::vector<std::string> distinct;
        std::set<std::string> seen_here;
        for (const auto& n : names) {
            std::string key = to_lower(n);
            if (seen_here.insert(key).second) distinct.push_back(n);
            if (seen_entities.insert(key).second) {
                entities.push_back(json{{"name", n},
                                        {"kind_hint", ""},
                                        {"description", cap_length(sentence, 200)}});
            }
        }
        if (distinct.size() >= 2) {
            relations.push_back(json{{"members", distinct},
                                     {"relation_text", cap_length(sentence, 200)}});
        }
    }
    return json{{"entities", entities}, {"relations", relations}};
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string slice_between(const std::string& s, const std::string& from, const std::string& to) {
    auto start = s.find(from);
    if (start == std::string::npos) return "";
    start += from.size();
    auto end = to.empty() ? std::string::npos : s.find(to, start);
    return s.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

json judge_response(const std::string& prompt) {
    std::string prediction = slice_between(prompt, "PREDICTION:", "GOLD:");
    std::string gold = slice_between(prompt, "GOLD:", "");
    auto p = token_set(prediction);
    auto g = token_set(gold);
    size_t inter = 0;
    for (const auto& t : p) inter += g.count(t);
    double comprehensiveness = g.empty() ? 1.0 : static_cast<double>(inter) / g.size();
    double relevance = p.empty() ? 0.0 : static_cast<double>(inter) / p.size();
    return json{{"comprehensiveness", comprehensiveness},
                {"correctness", jaccard(p, g)},
                {"relevance", relevance}};
}

size_t chat_payload_length(const std::string& prompt, const std::vector<std::string>& blocks) {
    size_t n = prompt.size();
    for (const auto& b : blocks) n += b.size();
    return n;
}

}  // namespace

MockChatProvider::MockChatProvider(std::shared_ptr<ProviderStats> stats)
    : stats_(std::move(stats)) {}

std::string MockChatProvider::chat(const std::string& prompt,
                                   const std::vector<std::string>& context_blocks,
                                   const std::optional<std::vector<uint8_t>>& image) {
    if (stats_) {
        stats_->chat_calls.fetch_add(1);
        stats_->chat_token_estimate.fetch_add(chat_payload_length(prompt, context_blocks) / 4);
        if (image) stats_->chat_image_payloads.fetch_add(1);
    }
    if (prompt.find("comprehensiveness") != std::string::npos) {
        return judge_response(prompt).dump();
    }
    if (prompt.find("\"entities\"") != std::string::npos) {
        auto pos = prompt.rfind("TEXT:");
        std::string source = pos == std::string::npos ? prompt : prompt.substr(pos + 5);
        return rule_based_extraction(source).dump();
    }
    return "ANSWER: " + (context_blocks.empty() ? prompt : context_blocks.front());
}

MockOcrProvider::MockOcrProvider(std::map<std::string, OcrResult> fixture,
                                 std::shared_ptr<ProviderStats> stats)
    : fixture_(std::move(fixture)), stats_(std::move(stats)) {}

OcrResult MockOcrProvider::ocr(const std::vector<uint8_t>& image_bytes) {
    if (stats_) stats_->ocr_calls.fetch_add(1);
    auto it = fixture_.find(content_hash(std::span<const uint8_t>(image_bytes)));
    return it == fixture_.end() ? OcrResult{} : it->second;
}

MockCaptionProvider::MockCaptionProvider(std::map<std::string, std::string> fixture,
                                         std::shared_ptr<ProviderStats> stats)
    : fixture_(std::move(fixture)), stats_(std::move(stats)) {}

std::string MockCaptionProvider::caption(const std::vector<uint8_t>& image_bytes) {
    if (stats_) stats_->caption_calls.fetch_add(1);
    std::string hash = content_hash(std::span<const uint8_t>(image_bytes));
    auto it = fixture_.find(hash);
    if (it == fixture_.end()) {
        throw Error(Errc::ProviderError, "no caption fixture entry for image " + hash);
    }
    return it->second;
}

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read " + path);
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::IoError, path + " is not a JSON object");
    }
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

}  // namespace

void write_ocr_fixture(const std::string& path, const std::map<std::string, OcrResult>& entries) {
    json j = json::object();
    for (const auto& [hash, r] : entries) {
        j[hash] = json{{"confidences", r.confidences}, {"tokens", r.tokens}};
    }
    save_json_file(path, j);
}

std::map<std::string, OcrResult> read_ocr_fixture(const std::string& path) {
    std::map<std::string, OcrResult> out;
    json j = load_json_file(path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        OcrResult r;
        r.tokens = it.value().at("tokens").get<std::vector<std::string>>();
        r.confidences = it.value().at("confidences").get<std::vector<double>>();
        out[it.key()] = std::move(r);
    }
    return out;
}

void write_caption_fixture(const std::string& path,
                           const std::map<std::string, std::string>& entries) {
    json j = json::object();
    for (const auto& [hash, caption] : entries) {
        j[hash] = caption;
    }
    save_json_file(path, j);
}

std::map<std::string, std::string> read_caption_fixture(const std::string& path) {
    std::map<std::string, std::string> out;
    json j = load_json_file(path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        out[it.key()] = it.value().get<std::string>();
    }
    return out;
}

namespace {

std::string base64_encode(const std::vector<uint8_t>& bytes) {
    std::string out((bytes.size() + 2) / 3 * 4 + 1, '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                            static_cast<int>(bytes.size()));
    out.resize(static_cast<size_t>(n));
    return out;
}

struct SplitUrl {
    std::string base;  // scheme://host:port
    std::string path;  // leading path prefix, possibly empty
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Errc::ConfigError, "provider endpoint must be a URL or \"mock\": " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, ""};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

// POSTs JSON with retries; exponential backoff doubles from 500 ms.
json post_json(const ProviderConfig& config, const std::string& path_suffix, const json& body,
               ProviderStats* stats, const SleepFn& sleep) {
    SplitUrl url = split_url(config.endpoint);
    httplib::Client client(url.base);
    auto timeout = std::chrono::milliseconds(
        static_cast<long long>(config.timeout_seconds * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
        const char* key = std::getenv(config.api_key_env.c_str());
        if (key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    const std::string payload = body.dump();
    const int attempts = config.max_retries + 1;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            if (stats) stats->retries.fetch_add(1);
            auto delay = std::chrono::milliseconds(500) * (1LL << (attempt - 1));
            if (sleep) {
                sleep(delay);
            } else {
                std::this_thread::sleep_for(delay);
            }
        }
        auto res = client.Post(url.path + path_suffix, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) {
            last_error = "response body is not valid JSON";
            continue;
        }
        return parsed;
    }
    throw Error(Errc::ProviderError, provider_kind_name(config.kind) + " provider failed after " +
                                         std::to_string(attempts) + " attempts: " + last_error);
}

std::vector<float> parse_embedding_response(const json& response, uint32_t dimension) {
    std::vector<float> values;
    try {
        auto raw = response.at("data").at(0).at("embedding").get<std::vector<double>>();
        values.assign(raw.begin(), raw.end());
    } catch (const json::exception& e) {
        throw Error(Errc::ProviderError, std::string("malformed embedding response: ") + e.what());
    }
    if (values.size() != dimension) {
        throw Error(Errc::ProviderError,
                    "embedding dimension " + std::to_string(values.size()) + ", configured " +
                        std::to_string(dimension));
    }
    double norm = 0.0;
    for (float v : values) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm <= 0.0) {
        throw Error(Errc::ProviderError, "embedding provider returned a zero vector");
    }
    for (float& v : values) v = static_cast<float>(v / norm);
    return values;
}

}  // namespace

HttpChatProvider::HttpChatProvider(ProviderConfig config, std::shared_ptr<ProviderStats> stats,
                                   SleepFn sleep)
    : config_(std::move(config)), stats_(std::move(stats)), sleep_(std::move(sleep)) {}

std::string HttpChatProvider::chat(const std::string& prompt,
                                   const std::vector<std::string>& context_blocks,
                                   const std::optional<std::vector<uint8_t>>& image) {
    std::string text = prompt;
    for (const auto& block : context_blocks) {
        text += "\n\n";
        text += block;
    }
    json content;
    if (image) {
        if (stats_) stats_->chat_image_payloads.fetch_add(1);
        content = json::array(
            {json{{"type", "text"}, {"text", text}},
             json{{"type", "image_url"},
                  {"image_url", {{"url", "data:image/png;base64," + base64_encode(*image)}}}}});
    } else {
        content = text;
    }
    json body{{"model", config_.model_name},
              {"messages", json::array({json{{"role", "user"}, {"content", content}}})}};
    json response = post_json(config_, "/chat/completions", body, stats_.get(), sleep_);
    std::string answer;
    try {
        answer = response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(Errc::ProviderError, std::string("malformed chat response: ") + e.what());
    }
    if (stats_) {
        stats_->chat_calls.fetch_add(1);
        stats_->chat_token_estimate.fetch_add(chat_payload_length(prompt, context_blocks) / 4);
    }
    return answer;
}

HttpEmbedProvider::HttpEmbedProvider(ProviderConfig config, std::shared_ptr<ProviderStats> stats,
                                     SleepFn sleep)
    : config_(std::move(config)), stats_(std::move(stats)), sleep_(std::move(sleep)) {}

std::vector<float> HttpEmbedProvider::embed_text(const std::string& text) {
    if (text.empty()) {
        throw Error(Errc::EmptyInput, "cannot embed empty text");
    }
    json body{{"model", config_.model_name}, {"input", json::array({text})}};
    json response = post_json(config_, "/embeddings", body, stats_.get(), sleep_);
    auto values = parse_embedding_response(response, config_.dimension);
    if (stats_) stats_->embed_text_calls.fetch_add(1);
    return values;
}

std::vector<float> HttpEmbedProvider::embed_image(const std::vector<uint8_t>& image_bytes) {
    if (image_bytes.empty()) {
        throw Error(Errc::EmptyInput, "cannot embed empty image");
    }
    json body{{"model", config_.model_name},
              {"input", json::array({base64_encode(image_bytes)})}};
    json response = post_json(config_, "/embeddings", body, stats_.get(), sleep_);
    auto values = parse_embedding_response(response, config_.dimension);
    if (stats_) stats_->embed_image_calls.fetch_add(1);
    return values;
}

HttpOcrProvider::HttpOcrProvider(ProviderConfig config, std::shared_ptr<ProviderStats> stats,
                                 SleepFn sleep)
    : config_(std::move(config)), stats_(std::move(stats)), sleep_(std::move(sleep)) {}

OcrResult HttpOcrProvider::ocr(const std::vector<uint8_t>& image_bytes) {
    json body{{"image_b64", base64_encode(image_bytes)}};
    json response = post_json(config_, "", body, stats_.get(), sleep_);
    OcrResult result;
    try {
        result.tokens = response.at("tokens").get<std::vector<std::string>>();
        result.confidences = response.at("confidences").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(Errc::ProviderError, std::string("malformed ocr response: ") + e.what());
    }
    if (result.tokens.size() != result.confidences.size()) {
        throw Error(Errc::ProviderError, "ocr tokens/confidences length mismatch");
    }
    if (stats_) stats_->ocr_calls.fetch_add(1);
    return result;
}

HttpCaptionProvider::HttpCaptionProvider(ProviderConfig config,
                                         std::shared_ptr<ProviderStats> stats, SleepFn sleep)
    : config_(std::move(config)), stats_(std::move(stats)), sleep_(std::move(sleep)) {}

std::string HttpCaptionProvider::caption(const std::vector<uint8_t>& image_bytes) {
    json body{{"image_b64", base64_encode(image_bytes)}};
    json response = post_json(config_, "", body, stats_.get(), sleep_);
    std::string caption;
    try {
        caption = response.at("caption").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(Errc::ProviderError, std::string("malformed caption response: ") + e.what());
    }
    if (stats_) stats_->caption_calls.fetch_add(1);
    return caption;
}

ProviderCache ProviderCache::open(const std::string& dir, bool writable) {
    ProviderCache cache;
    cache.dir_ = dir;
    cache.writable_ = writable;
    fs::path ocr_path = fs::path(dir) / "ocr.json";
    fs::path caption_path = fs::path(dir) / "caption.json";
    if (fs::exists(ocr_path)) {
        cache.ocr_ = read_ocr_fixture(ocr_path.string());
    }
    if (fs::exists(caption_path)) {
        cache.caption_ = read_caption_fixture(caption_path.string());
    }
    return cache;
}

std::optional<OcrResult> ProviderCache::get_ocr(const std::string& image_hash) const {
    std::lock_guard<std::mutex> lock(*mu_);
    auto it = ocr_.find(image_hash);
    if (it == ocr_.end()) return std::nullopt;
    if (stats_) stats_->cache_hits.fetch_add(1);
    return it->second;
}

void ProviderCache::put_ocr(const std::string& image_hash, const OcrResult& result) {
    std::lock_guard<std::mutex> lock(*mu_);
    ocr_[image_hash] = result;
    dirty_ = true;
}

std::optional<std::string> ProviderCache::get_caption(const std::string& image_hash) const {
    std::lock_guard<std::mutex> lock(*mu_);
    auto it = caption_.find(image_hash);
    if (it == caption_.end()) return std::nullopt;
    if (stats_) stats_->cache_hits.fetch_add(1);
    return it->second;
}

void ProviderCache::put_caption(const std::string& image_hash, const std::string& caption) {
    std::lock_guard<std::mutex> lock(*mu_);
    caption_[image_hash] = caption;
    dirty_ = true;
}

void ProviderCache::flush() {
    std::lock_guard<std::mutex> lock(*mu_);
    if (!writable_ || !dirty_ || dir_.empty()) return;
    write_ocr_fixture((fs::path(dir_) / "ocr.json").string(), ocr_);
    write_caption_fixture((fs::path(dir_) / "caption.json").string(), caption_);
    dirty_ = false;
}

ProviderSet make_providers(const std::map<std::string, ProviderConfig>& configs, SleepFn sleep) {
    ProviderSet set;
    set.stats = std::make_shared<ProviderStats>();

    auto lookup = [&](ProviderKind kind) -> const ProviderConfig* {
        auto it = configs.find(provider_kind_name(kind));
        if (it == configs.end()) return nullptr;
        if (it->second.kind != kind) {
            throw Error(Errc::ConfigError,
                        "provider \"" + it->first + "\" declares kind " +
                            provider_kind_name(it->second.kind));
        }
        return &it->second;
    };
    auto require = [&](ProviderKind kind) -> const ProviderConfig& {
        const ProviderConfig* c = lookup(kind);
        if (!c) {
            throw Error(Errc::ConfigError,
                        "missing required provider config: " + provider_kind_name(kind));
        }
        return *c;
    };

    {
        const ProviderConfig& c = require(ProviderKind::Chat);
        if (c.endpoint == "mock") {
            set.chat = std::make_shared<MockChatProvider>(set.stats);
        } else {
            set.chat = std::make_shared<HttpChatProvider>(c, set.stats, sleep);
        }
    }
    {
        const ProviderConfig& c = require(ProviderKind::EmbedText);
        if (c.endpoint == "mock") {
            set.embed_text = std::make_shared<MockTextEmbedProvider>(set.stats);
        } else {
            set.embed_text = std::make_shared<HttpEmbedProvider>(c, set.stats, sleep);
        }
    }
    {
        const ProviderConfig& c = require(ProviderKind::EmbedImage);
        if (c.endpoint == "mock") {
            set.embed_image = std::make_shared<MockImageEmbedProvider>(set.stats);
        } else {
            set.embed_image = std::make_shared<HttpEmbedProvider>(c, set.stats, sleep);
        }
    }
    if (const ProviderConfig* c = lookup(ProviderKind::Ocr)) {
        if (c->endpoint == "mock") {
            std::map<std::string, OcrResult> fixture;
            if (!c->fixture_path.empty()) fixture = read_ocr_fixture(c->fixture_path);
            set.ocr = std::make_shared<MockOcrProvider>(std::move(fixture), set.stats);
        } else {
            set.ocr = std::make_shared<HttpOcrProvider>(*c, set.stats, sleep);
        }
    }
    if (const ProviderConfig* c = lookup(ProviderKind::Caption)) {
        if (c->endpoint == "mock") {
            std::map<std::string, std::string> fixture;
            if (!c->fixture_path.empty()) fixture = read_caption_fixture(c->fixture_path);
            set.caption = std::make_shared<MockCaptionProvider>(std::move(fixture), set.stats);
        } else {
            set.caption = std::make_shared<HttpCaptionProvider>(*c, set.stats, sleep);
        }
    }
    return set;
}

}  // namespace hyperrag
