#include "hyperrag/descriptors.hpp"

#include "hyperrag/errors.hpp"
#include "hyperrag/hash.hpp"
#include "hyperrag/text.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <tuple>

namespace hyperrag {

const std::array<std::pair<const char*, Rgb>, 16>& css_basic_palette() {
    static const std::array<std::pair<const char*, Rgb>, 16> palette = {{
        {"aqua", {0, 255, 255}},
        {"black", {0, 0, 0}},
        {"blue", {0, 0, 255}},
        {"fuchsia", {255, 0, 255}},
        {"gray", {128, 128, 128}},
        {"green", {0, 128, 0}},
        {"lime", {0, 255, 0}},
        {"maroon", {128, 0, 0}},
        {"navy", {0, 0, 128}},
        {"olive", {128, 128, 0}},
        {"purple", {128, 0, 128}},
        {"red", {255, 0, 0}},
        {"silver", {192, 192, 192}},
        {"teal", {0, 128, 128}},
        {"white", {255, 255, 255}},
        {"yellow", {255, 255, 0}},
    }};
    return palette;
}

namespace {

int64_t sq(int64_t v) { return v * v; }

int64_t rgb_distance_sq(const std::array<int, 3>& a, Rgb b) {
    return sq(a[0] - b.r) + sq(a[1] - b.g) + sq(a[2] - b.b);
}

}  // namespace

ColorExtraction extract_color(const Image& image) {
    if (image.pixel_count() == 0) {
        throw Error(Errc::DecodeError, "cannot extract color from an empty image");
    }
    uint64_t sums[3] = {0, 0, 0};
    for (const Rgb& p : image.pixels()) {
        sums[0] += p.r;
        sums[1] += p.g;
        sums[2] += p.b;
    }
    const uint64_t n = image.pixel_count();
    ColorExtraction out;
    for (int c = 0; c < 3; ++c) {
        // round half-up without going through floating point
        out.avg_rgb[c] = static_cast<int>((2 * sums[c] + n) / (2 * n));
    }
    int64_t best = std::numeric_limits<int64_t>::max();
    for (const auto& [name, rgb] : css_basic_palette()) {
        int64_t d = rgb_distance_sq(out.avg_rgb, rgb);
        if (d < best) {
            best = d;
            out.named_color = name;
        }
    }
    return out;
}

ShapeDescriptor extract_shape(const Image& image) {
    if (image.pixel_count() == 0) {
        throw Error(Errc::DecodeError, "cannot extract shape from an empty image");
    }
    const int w = image.width();
    const int h = image.height();

    // sorted map: modal ties resolve to the smallest RGB triple
    std::map<std::tuple<int, int, int>, int> border_counts;
    auto count_border = [&](int x, int y) {
        Rgb p = image.at(x, y);
        border_counts[{p.r, p.g, p.b}] += 1;
    };
    for (int x = 0; x < w; ++x) {
        count_border(x, 0);
        if (h > 1) count_border(x, h - 1);
    }
    for (int y = 1; y + 1 < h; ++y) {
        count_border(0, y);
        if (w > 1) count_border(w - 1, y);
    }
    std::array<int, 3> background{0, 0, 0};
    int best_count = 0;
    for (const auto& [rgb, count] : border_counts) {
        if (count > best_count) {
            best_count = count;
            background = {std::get<0>(rgb), std::get<1>(rgb), std::get<2>(rgb)};
        }
    }

    constexpr int64_t kThresholdSq = 32 * 32;
    int min_x = w, min_y = h, max_x = -1, max_y = -1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Rgb p = image.at(x, y);
            if (rgb_distance_sq(background, p) > kThresholdSq) {
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
        }
    }
    double box_w, box_h;
    if (max_x < 0) {
        box_w = w;
        box_h = h;
    } else {
        box_w = max_x - min_x + 1;
        box_h = max_y - min_y + 1;
    }
    ShapeDescriptor out;
    out.aspect_ratio = box_w / box_h;
    out.cls = classify_aspect_ratio(out.aspect_ratio);
    return out;
}

OcrDescriptor extract_ocr(const std::vector<uint8_t>& image_bytes, OcrProvider& provider) {
    OcrResult raw = provider.ocr(image_bytes);
    OcrDescriptor out;
    for (size_t i = 0; i < raw.tokens.size(); ++i) {
        std::string token = strip_punct(to_lower(raw.tokens[i]));
        if (token.empty()) continue;
        double confidence = i < raw.confidences.size() ? raw.confidences[i] : 1.0;
        out.tokens.push_back(std::move(token));
        out.confidences.push_back(std::clamp(confidence, 0.0, 1.0));
    }
    return out;
}

std::string extract_caption(const std::vector<uint8_t>& image_bytes, CaptionProvider& provider,
                            ProviderCache* cache) {
    std::string hash = content_hash(std::span<const uint8_t>(image_bytes));
    if (cache) {
        if (auto cached = cache->get_caption(hash)) {
            return *cached;
        }
    }
    std::string caption = provider.caption(image_bytes);
    if (trim(caption).empty()) {
        throw Error(Errc::EmptyCaption, "caption provider returned only whitespace");
    }
    if (cache) {
        cache->put_caption(hash, caption);
    }
    return caption;
}

namespace {

// Cap applies to the graph entity only; the stored descriptor keeps every
// token. Survivors keep their original order.
std::string ocr_entity_name(const OcrDescriptor& ocr, int cap) {
    std::vector<size_t> order(ocr.tokens.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return ocr.confidences[a] > ocr.confidences[b];
    });
    if (cap >= 0 && order.size() > static_cast<size_t>(cap)) {
        order.resize(static_cast<size_t>(cap));
    }
    std::sort(order.begin(), order.end());
    std::string name;
    for (size_t i : order) {
        if (!name.empty()) name += ' ';
        name += ocr.tokens[i];
    }
    return name;
}

}  // namespace

ExtractedDescriptors extract_all(const Image& image, const std::vector<uint8_t>& image_bytes,
                                 const ExtractOptions& options, OcrProvider* ocr,
                                 CaptionProvider* caption, ProviderCache* cache) {
    if (options.enabled.empty()) {
        throw Error(Errc::ConfigError, "enabled lambda set is empty");
    }
    for (int lambda : options.enabled) {
        if (lambda < 1 || lambda > 4) {
            throw Error(Errc::ConfigError, "lambda out of range: " + std::to_string(lambda));
        }
    }

    ExtractedDescriptors out;
    if (options.enabled.count(1)) {
        ColorExtraction color = extract_color(image);
        ColorDescriptor d;
        d.avg_rgb = color.avg_rgb;
        d.named_color = color.named_color;
        out.set.color = d;
        out.relations.push_back({1, color.named_color, "lambda-1 color: " + color.named_color});
    }
    if (options.enabled.count(2)) {
        ShapeDescriptor shape = extract_shape(image);
        if (options.shape_text_from_caption && caption) {
            try {
                shape.text = extract_caption(image_bytes, *caption, cache);
            } catch (const Error&) {
                // descriptive text is an upgrade, not a requirement
            }
        }
        std::string cls = shape_class_name(shape.cls);
        out.set.shape = shape;
        out.relations.push_back({2, cls, "lambda-2 shape: " + cls});
    }
    if (options.enabled.count(3)) {
        if (!ocr) {
            out.warnings.push_back("lambda-3 skipped: no ocr provider");
        } else {
            try {
                OcrDescriptor d = extract_ocr(image_bytes, *ocr);
                std::string name = ocr_entity_name(d, options.max_ocr_entity_tokens);
                out.set.ocr = std::move(d);
                if (!name.empty()) {
                    out.relations.push_back({3, name, "lambda-3 ocr: " + name});
                }
            } catch (const Error& e) {
                out.warnings.push_back(std::string("lambda-3 skipped: ") + e.what());
            }
        }
    }
    if (options.enabled.count(4)) {
        if (!caption) {
            out.warnings.push_back("lambda-4 skipped: no caption provider");
        } else {
            try {
                std::string text = extract_caption(image_bytes, *caption, cache);
                out.set.caption = text;
                out.relations.push_back({4, text, "lambda-4 caption: " + text});
            } catch (const Error& e) {
                out.warnings.push_back(std::string("lambda-4 skipped: ") + e.what());
            }
        }
    }
    return out;
}

}  // namespace hyperrag
