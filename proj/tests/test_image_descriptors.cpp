#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hyperrag/descriptors.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/hash.hpp"
#include "hyperrag/image.hpp"
#include "hyperrag/providers.hpp"

#include "support/test_support.hpp"

#include <cmath>
#include <random>

using namespace hyperrag;

namespace {

// Double-precision mean oracle, independent of the integer accumulation in
// the extractor.
std::array<double, 3> mean_rgb_oracle(const Image& img) {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    for (const auto& p : img.pixels()) {
        r += p.r;
        g += p.g;
        b += p.b;
    }
    double n = static_cast<double>(img.pixel_count());
    return {r / n, g / n, b / n};
}

}  // namespace

TEST_CASE("uniform images map to their palette color") {
    Image red(10, 10, {255, 0, 0});
    ColorExtraction c = extract_color(red);
    CHECK(c.avg_rgb == std::array<int, 3>{255, 0, 0});
    CHECK(c.named_color == "red");

    Image blue(3, 7, {0, 0, 255});
    CHECK(extract_color(blue).named_color == "blue");

    Image white(4, 4, {255, 255, 255});
    CHECK(extract_color(white).named_color == "white");
}

TEST_CASE("half black half white rounds half-up to gray") {
    Image img(10, 10, {0, 0, 0});
    img.fill_rect(0, 0, 10, 5, {255, 255, 255});
    ColorExtraction c = extract_color(img);
    CHECK(c.avg_rgb == std::array<int, 3>{128, 128, 128});
    CHECK(c.named_color == "gray");
}

TEST_CASE("average color matches a float oracle within one per channel") {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> dim(1, 40);
    std::uniform_int_distribution<int> channel(0, 255);
    for (int trial = 0; trial < 50; ++trial) {
        Image img(dim(rng), dim(rng));
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                img.set(x, y,
                        {static_cast<uint8_t>(channel(rng)), static_cast<uint8_t>(channel(rng)),
                         static_cast<uint8_t>(channel(rng))});
            }
        }
        auto oracle = mean_rgb_oracle(img);
        ColorExtraction c = extract_color(img);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(c.avg_rgb[i] - oracle[i]) <= 1.0);
        }
    }
}

TEST_CASE("named color ties resolve by palette order") {
    // (128,0,64) sits exactly between maroon (128,0,0) and purple (128,0,128);
    // maroon wins alphabetically.
    Image img(2, 2, {128, 0, 64});
    CHECK(extract_color(img).named_color == "maroon");
}

TEST_CASE("palette holds the 16 CSS basic colors in alphabetical order") {
    const auto& palette = css_basic_palette();
    REQUIRE(palette.size() == 16);
    CHECK(palette.front().first == std::string("aqua"));
    CHECK(palette.back().first == std::string("yellow"));
    for (size_t i = 1; i < palette.size(); ++i) {
        CHECK(std::string(palette[i - 1].first) < std::string(palette[i].first));
    }
}

TEST_CASE("shape classifies foreground bounding boxes") {
    // 40 wide x 120 tall dark rectangle on a white 200x200 canvas.
    Image tall(200, 200, {255, 255, 255});
    tall.fill_rect(80, 40, 40, 120, {20, 20, 20});
    ShapeDescriptor s = extract_shape(tall);
    CHECK(s.cls == ShapeClass::Tall);
    CHECK(s.aspect_ratio == doctest::Approx(40.0 / 120.0).epsilon(1e-9));

    Image wide(200, 200, {255, 255, 255});
    wide.fill_rect(0, 75, 200, 50, {20, 20, 20});
    ShapeDescriptor w = extract_shape(wide);
    CHECK(w.cls == ShapeClass::Wide);
    CHECK(w.aspect_ratio == doctest::Approx(4.0).epsilon(1e-9));

    Image square(100, 100, {255, 255, 255});
    square.fill_rect(30, 30, 40, 40, {20, 20, 20});
    CHECK(extract_shape(square).cls == ShapeClass::Square);
}

TEST_CASE("no foreground falls back to the whole image box") {
    Image img(120, 60, {200, 200, 200});
    ShapeDescriptor s = extract_shape(img);
    CHECK(s.aspect_ratio == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s.cls == ShapeClass::Wide);
}

TEST_CASE("foreground threshold is strictly greater than 32") {
    // Center differs from the border by exactly 32 along one axis: still
    // background. One unit more: foreground.
    Image at(50, 50, {100, 100, 100});
    at.fill_rect(20, 20, 10, 10, {132, 100, 100});
    CHECK(extract_shape(at).aspect_ratio == doctest::Approx(1.0).epsilon(1e-9));

    Image above(50, 50, {100, 100, 100});
    above.fill_rect(20, 10, 10, 30, {133, 100, 100});
    ShapeDescriptor s = extract_shape(above);
    CHECK(s.aspect_ratio == doctest::Approx(10.0 / 30.0).epsilon(1e-9));
    CHECK(s.cls == ShapeClass::Tall);
}

TEST_CASE("border mode ties pick the smallest RGB") {
    // Top half of the border is dark, bottom half light, equal counts by
    // construction: 100x2 strips. Dark (10,10,10) < light (240,240,240).
    Image img(100, 4, {240, 240, 240});
    img.fill_rect(0, 0, 100, 2, {10, 10, 10});
    // Foreground relative to dark background: the light half.
    ShapeDescriptor s = extract_shape(img);
    CHECK(s.aspect_ratio == doctest::Approx(100.0 / 2.0).epsilon(1e-9));
}

TEST_CASE("ocr tokens are lowercased and punctuation-stripped") {
    auto stats = std::make_shared<ProviderStats>();
    std::vector<uint8_t> bytes = Image(4, 4, {1, 2, 3}).encode_png();
    std::map<std::string, OcrResult> fixture;
    fixture[content_hash(bytes)] = {{"ZYN", "Cool", "Mint!"}, {0.9, 0.8, 0.7}};
    MockOcrProvider provider(fixture, stats);

    OcrDescriptor d = extract_ocr(bytes, provider);
    CHECK(d.tokens == std::vector<std::string>{"zyn", "cool", "mint"});
    CHECK(d.confidences == std::vector<double>{0.9, 0.8, 0.7});
}

TEST_CASE("ocr empty provider result stays empty") {
    auto stats = std::make_shared<ProviderStats>();
    MockOcrProvider provider({}, stats);
    std::vector<uint8_t> bytes = Image(4, 4).encode_png();
    OcrDescriptor d = extract_ocr(bytes, provider);
    CHECK(d.tokens.empty());
    CHECK(d.confidences.empty());
}

TEST_CASE("caption is cached by content hash") {
    auto stats = std::make_shared<ProviderStats>();
    std::vector<uint8_t> bytes = Image(5, 5, {9, 9, 9}).encode_png();
    std::map<std::string, std::string> fixture{{content_hash(bytes), "a gray square"}};
    MockCaptionProvider provider(fixture, stats);

    ProviderCache cache;
    cache.bind_stats(stats);
    CHECK(extract_caption(bytes, provider, &cache) == "a gray square");
    CHECK(stats->caption_calls.load() == 1);
    CHECK(extract_caption(bytes, provider, &cache) == "a gray square");
    CHECK(stats->caption_calls.load() == 1);
    CHECK(stats->cache_hits.load() == 1);
}

TEST_CASE("whitespace-only caption is an error") {
    auto stats = std::make_shared<ProviderStats>();
    std::vector<uint8_t> bytes = Image(5, 5).encode_png();
    MockCaptionProvider provider({{content_hash(bytes), "   \n"}}, stats);
    CHECK_THROWS_AS(extract_caption(bytes, provider, nullptr), Error);
}

TEST_CASE("extract_all runs exactly the enabled extractors") {
    auto providers = hyperrag::test::mock_providers();
    Image img = hyperrag::test::test_card({60, 60, 200}, 40, 40);
    std::vector<uint8_t> bytes = img.encode_png();

    ExtractOptions one;
    one.enabled = {1};
    ExtractedDescriptors only_color =
        extract_all(img, bytes, one, providers.ocr.get(), providers.caption.get(), nullptr);
    CHECK(only_color.set.color.has_value());
    CHECK(!only_color.set.shape.has_value());
    CHECK(!only_color.set.ocr.has_value());
    CHECK(!only_color.set.caption.has_value());
    CHECK(only_color.relations.size() == 1);
    CHECK(only_color.relations[0].lambda == 1);

    ExtractOptions empty;
    empty.enabled = {};
    CHECK_THROWS_AS(
        extract_all(img, bytes, empty, providers.ocr.get(), providers.caption.get(), nullptr),
        Error);
    ExtractOptions bad;
    bad.enabled = {1, 9};
    CHECK_THROWS_AS(
        extract_all(img, bytes, bad, providers.ocr.get(), providers.caption.get(), nullptr),
        Error);
}

TEST_CASE("extract_all with all lambdas emits one relation per lambda") {
    Image img = hyperrag::test::test_card({60, 60, 200}, 60, 20);
    std::vector<uint8_t> bytes = img.encode_png();
    std::string hash = content_hash(bytes);
    auto providers = hyperrag::test::mock_providers(
        {{hash, {{"zyn", "mint"}, {0.9, 0.8}}}}, {{hash, "a tin on a blue field"}});

    ExtractOptions all;
    all.enabled = {1, 2, 3, 4};
    ExtractedDescriptors d =
        extract_all(img, bytes, all, providers.ocr.get(), providers.caption.get(), nullptr);
    CHECK(d.relations.size() == 4);
    CHECK(d.set.color.has_value());
    CHECK(d.set.shape->cls == ShapeClass::Wide);
    CHECK(d.set.ocr->tokens == std::vector<std::string>{"zyn", "mint"});
    CHECK(*d.set.caption == "a tin on a blue field");

    std::set<int> lambdas;
    for (const auto& rel : d.relations) {
        lambdas.insert(rel.lambda);
        CHECK(!rel.descriptor_name.empty());
        CHECK(rel.relation_text.find("lambda-" + std::to_string(rel.lambda)) == 0);
    }
    CHECK(lambdas == std::set<int>{1, 2, 3, 4});

    // Determinism: a second pass produces an identical DescriptorSet.
    ExtractedDescriptors again =
        extract_all(img, bytes, all, providers.ocr.get(), providers.caption.get(), nullptr);
    CHECK(again.set == d.set);
}

TEST_CASE("caption failure under extract_all degrades to a warning") {
    Image img = hyperrag::test::test_card({10, 200, 10}, 40, 40);
    std::vector<uint8_t> bytes = img.encode_png();
    auto providers = hyperrag::test::mock_providers();  // empty caption fixture: throws

    ExtractOptions opts;
    opts.enabled = {1, 4};
    ExtractedDescriptors d =
        extract_all(img, bytes, opts, providers.ocr.get(), providers.caption.get(), nullptr);
    CHECK(d.set.color.has_value());
    CHECK(!d.set.caption.has_value());
    CHECK(d.relations.size() == 1);
    CHECK(!d.warnings.empty());
}

TEST_CASE("decode errors propagate") {
    std::vector<uint8_t> garbage = {0x00, 0x01, 0x02, 0x03};
    CHECK_THROWS_AS(Image::decode_bytes(garbage), Error);
    CHECK_THROWS_AS(Image::decode_bytes({}), Error);
}
