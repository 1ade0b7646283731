#include "hyperrag/fixtures.hpp"

#include "hyperrag/hash.hpp"
#include "hyperrag/image.hpp"
#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"
#include "hyperrag/text.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace hyperrag {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct DocFixture {
    const char* name;
    const char* text;
};

// Sentences are written so the rule-based mock extractor finds clean
// capitalized name runs: brand and flavor names never sit adjacent to other
// capitalized words they do not belong with.
const std::vector<DocFixture>& doc_table() {
    static const std::vector<DocFixture> docs = {
        {"zyn.txt",
         "Zyn is a brand of tobacco-free nicotine pouches sold in small round tins. "
         "Zyn offers a Cool Mint flavor alongside a Wintergreen line and a Citrus line. "
         "Cool Mint pouches from Zyn ship in a frost blue tin with a white band. "
         "Wintergreen pouches from Zyn ship in a deep green tin with a leaf mark. "
         "The Citrus line uses a bright yellow tin with an orange stripe around the lid. "
         "Each tin holds twenty slim pouches that sit flat under the lip. "
         "Pouches from Zyn contain no tobacco leaf and rely on nicotine salt instead. "
         "Many shelves place Zyn beside chewing gum near the register because the tins "
         "look alike at a glance. "
         "A fresh pouch releases flavor for about forty minutes before it fades. "
         "Users often start with the lighter three milligram strength and move up only "
         "if the draw feels weak. "
         "The six milligram strength carries a sharper tingle that new users tend to "
         "notice right away. "
         "Cool Mint remains the best seller for Zyn by a wide margin in most markets. "
         "Retail data places Wintergreen second in colder regions where the flavor "
         "reads as familiar. "
         "The Citrus line sells best in summer when shoppers look for something "
         "brighter than mint. "
         "Tins from Zyn carry a paper seal that snaps when the lid first turns. "
         "A spent pouch belongs in the catch lid on top of the tin, not on the street. "
         "The catch lid holds about ten used pouches before it needs emptying. "
         "Shoppers sometimes confuse the blue tin with the green one in dim light, so "
         "the lids carry raised letters. "
         "Raised letters also help people who buy by touch from a pocket without "
         "looking down."},
        {"velo.txt",
         "Velo makes slim nicotine pouches in matte plastic cans with a soft click lid. "
         "Velo sells a Mighty Peppermint flavor and an Ice Cool line for mint fans. "
         "Mighty Peppermint cans from Velo are navy with a silver stripe across the "
         "middle. "
         "The Ice Cool line comes in a pale blue can that fades toward white at the "
         "base. "
         "Velo also ships a Ruby Berry flavor aimed at people who dislike mint. "
         "Ruby Berry cans are crimson with a white cap and a small berry mark. "
         "A dry pouch from Velo releases flavor more slowly than a moist one, so the "
         "cans state the format on the side. "
         "The slim format from Velo sits lower on the gum than a full size pouch. "
         "Cans from Velo stack in towers of five on most shelves because the lids "
         "interlock. "
         "The click lid doubles as a catch for spent pouches, which keeps pockets "
         "clean. "
         "Mighty Peppermint runs stronger than the Ice Cool line even at the same "
         "stated strength, a quirk reviewers mention often. "
         "Ruby Berry tastes sweet for the first ten minutes and then settles into a "
         "mild tartness that lasts the rest of the session. "
         "Velo prints the batch date under the base of every can rather than on the "
         "label. "
         "A faded batch stamp is the quickest sign of old stock, so buyers check the "
         "base first. "
         "Some stores keep Velo in a chilled case in summer because heat softens the "
         "pouches and dulls the mint oils. "
         "Chilled cans also click shut with a cleaner snap, which staff use as a "
         "freshness check."},
        {"rogue.txt",
         "Rogue packs full size pouches with a firm fill and a broad flat shape. "
         "Rogue lists a Spearmint flavor and a Honey Lemon flavor and a Mango line. "
         "Spearmint tins from Rogue are mint green with a white wave across the lid. "
         "Honey Lemon tins from Rogue are amber with a yellow band. "
         "Mango tins are bright orange and easy to spot from across a store. "
         "Rogue also presses nicotine lozenges for people who dislike pouches. "
         "The lozenges from Rogue come in the same Spearmint flavor and the same "
         "Honey Lemon flavor as the pouches, so a user can switch formats without "
         "switching tastes."},
        {"klint.txt",
         "Klint rolls all white portion snus in slim formats with an even fill. "
         "Klint offers an Arctic Mint flavor and a Fresh Lime flavor. "
         "Arctic Mint rolls from Klint use an ice white can with pale blue print. "
         "Fresh Lime cans are lime green with a white lid and a thin silver ring. "
         "A can of Klint holds twenty four portions packed in two layers. "
         "Snus from Klint stays white before and after use, which keeps teeth free of "
         "stain. "
         "The white portion paper also slows the flavor release slightly compared to "
         "a moist brown portion."},
        {"skruf.txt",
         "Skruf blends traditional brown snus as well as modern white pouches. "
         "Skruf sells a Polar Mint flavor in the white pouch line. "
         "Polar Mint cans from Skruf are arctic silver with a pale crest. "
         "The brown snus from Skruf comes as loose weight in a squat black can. "
         "Brown snus carries a dark roasted tone that white pouches lack. "
         "Skruf prints a small crown over every lid as a mark of the house. "
         "Loose weight snus asks the user to shape a pinch by hand, a habit older "
         "buyers keep."},
        {"loop.txt",
         "Loop fills soft nicotine pouches with a fast release flavor system. "
         "Loop carries a Jalapeno Lime flavor for bold palates. "
         "Jalapeno Lime cans from Loop are chili red with a green ring. "
         "Loop also lists a Salty Ludicris flavor with a caramel note on top. "
         "Salty Ludicris cans are sand beige with brown script. "
         "A new can from Loop clicks shut with a child lock built into the rim. "
         "The fast release system peaks inside five minutes and suits short breaks."},
        {"colors.txt",
         "Mint flavors across most brands arrive in blue or green tins. "
         "Cool Mint from Zyn uses frost blue while Arctic Mint from Klint uses ice "
         "white. "
         "Spearmint from Rogue uses mint green and Polar Mint from Skruf uses arctic "
         "silver. "
         "Berry flavors trend red, so Ruby Berry from Velo wears crimson. "
         "Citrus shades run yellow to orange across the lines from Zyn and from "
         "Rogue. "
         "A shopper can often guess the flavor family from the tin color alone, which "
         "is why stores group tins by hue."},
        {"formats.txt",
         "Nicotine products span pouches and snus and lozenges. "
         "A mint family shows up in every format: Cool Mint as a pouch from Zyn, "
         "Arctic Mint as snus from Klint, and Spearmint as a lozenge from Rogue. "
         "Pouches dominate shelf space because round tins stack well. "
         "Loose snus remains popular in the far north where the habit runs oldest. "
         "Lozenges melt slowly and suit long flights where spitting is not an option. "
         "Flavor names repeat across formats even when the recipes differ in "
         "strength and cut."},
    };
    return docs;
}

struct ImageSpec {
    std::string file;
    Rgb background;
    ShapeClass shape = ShapeClass::Square;
    std::string brand;
    std::string flavor;
    std::string product_type;
    std::string tobacco_type;
    bool with_tobacco_type = true;
    int lot = 0;
};

std::vector<ImageSpec> image_table() {
    static const std::vector<std::pair<const char*, std::vector<const char*>>> brand_flavors =
        {
            {"Zyn", {"Cool Mint", "Wintergreen", "Citrus"}},
            {"Velo", {"Mighty Peppermint", "Ice Cool", "Ruby Berry"}},
            {"Rogue", {"Spearmint", "Honey Lemon", "Mango"}},
            {"Klint", {"Arctic Mint", "Fresh Lime"}},
            {"Skruf", {"Polar Mint"}},
            {"Loop", {"Jalapeno Lime", "Salty Ludicris"}},
        };
    static const char* product_types[] = {"pouch", "snus", "lozenge"};

    std::vector<ImageSpec> out;
    for (int i = 0; i < 32; ++i) {
        ImageSpec spec;
        char name[16];
        std::snprintf(name, sizeof(name), "img%02d.png", i);
        spec.file = name;
        spec.background = {static_cast<uint8_t>(40 + (i * 53) % 200),
                           static_cast<uint8_t>(40 + (i * 97) % 200),
                           static_cast<uint8_t>(40 + (i * 151) % 200)};
        spec.shape = static_cast<ShapeClass>(i % 3);
        const auto& [brand, flavors] = brand_flavors[i % brand_flavors.size()];
        spec.brand = brand;
        spec.flavor = flavors[(i / 6) % flavors.size()];
        spec.product_type = product_types[i % 3];
        spec.tobacco_type = (i % 5 == 0) ? "brown" : "tobacco-free";
        spec.with_tobacco_type = (i % 7 != 3);
        spec.lot = i;
        out.push_back(std::move(spec));
    }
    return out;
}

Image render_tin(const ImageSpec& spec) {
    Image img(96, 96, {spec.background.r, spec.background.g, spec.background.b});
    // Foreground contrasts with the border by exactly 128 per channel.
    Rgb fg{static_cast<uint8_t>(spec.background.r ^ 0x80),
           static_cast<uint8_t>(spec.background.g ^ 0x80),
           static_cast<uint8_t>(spec.background.b ^ 0x80)};
    switch (spec.shape) {
        case ShapeClass::Square:
            img.fill_rect(28, 28, 40, 40, fg);
            break;
        case ShapeClass::Tall:
            img.fill_rect(38, 18, 20, 60, fg);
            break;
        case ShapeClass::Wide:
            img.fill_rect(18, 38, 60, 20, fg);
            break;
    }
    return img;
}

std::string caption_for(const ImageSpec& spec) {
    return "A " + spec.brand + " " + spec.flavor + " " + spec.product_type + " tin, lot " +
           std::to_string(spec.lot) + ".";
}

OcrResult ocr_for(const ImageSpec& spec) {
    OcrResult out;
    for (const auto& word : split_words(to_lower(spec.brand + " " + spec.flavor))) {
        out.tokens.push_back(word);
    }
    char lot[8];
    std::snprintf(lot, sizeof(lot), "lot%02d", spec.lot);
    out.tokens.push_back(lot);
    double confidence = 0.99;
    for (size_t i = 0; i < out.tokens.size(); ++i) {
        out.confidences.push_back(confidence);
        confidence -= 0.02;
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace

FixtureLayout write_fixture_corpus(const std::string& dir) {
    FixtureLayout layout;
    layout.root = dir;
    fs::create_directories(fs::path(dir) / "docs");
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "fixtures");

    for (const auto& doc : doc_table()) {
        fs::path path = fs::path(dir) / "docs" / doc.name;
        write_text(path, doc.text);
        layout.doc_paths.push_back(path.string());
    }

    std::map<std::string, OcrResult> ocr_map;
    std::map<std::string, std::string> caption_map;
    std::string manifest;
    for (const auto& spec : image_table()) {
        Image img = render_tin(spec);
        std::vector<uint8_t> png = img.encode_png();
        fs::path path = fs::path(dir) / "images" / spec.file;
        write_file_bytes(path.string(), png);
        layout.image_paths.push_back(path.string());

        std::string hash = content_hash(png);
        ocr_map[hash] = ocr_for(spec);
        caption_map[hash] = caption_for(spec);

        json row = {{"uri", spec.file},
                    {"brand", spec.brand},
                    {"product_type", spec.product_type}};
        if (spec.with_tobacco_type) row["tobacco_type"] = spec.tobacco_type;
        manifest += row.dump() + "\n";
    }
    write_text(fs::path(dir) / "images" / "manifest.jsonl", manifest);

    layout.ocr_fixture_path = (fs::path(dir) / "fixtures" / "ocr.json").string();
    layout.caption_fixture_path = (fs::path(dir) / "fixtures" / "caption.json").string();
    write_ocr_fixture(layout.ocr_fixture_path, ocr_map);
    write_caption_fixture(layout.caption_fixture_path, caption_map);

    json docs = json::array();
    for (const auto& doc : doc_table()) docs.push_back(std::string("docs/") + doc.name);
    json corpus = {{"docs", docs},
                   {"images", "images/manifest.jsonl"},
                   {"chunk_size", 120},
                   {"chunk_overlap", 24}};
    layout.corpus_path = (fs::path(dir) / "corpus.json").string();
    write_text(layout.corpus_path, corpus.dump(2) + "\n");

    const auto table = image_table();
    std::vector<json> cases = {
        {{"question", "What flavors does Zyn offer?"},
         {"golden_answer",
          "Zyn offers a Cool Mint flavor alongside a Wintergreen line and a Citrus "
          "line."},
         {"tags", {"flavors-per-brand"}}},
        {{"question", "Which flavors does Velo sell?"},
         {"golden_answer",
          "Velo sells a Mighty Peppermint flavor and an Ice Cool line and a Ruby "
          "Berry flavor."},
         {"tags", {"flavors-per-brand"}}},
        {{"question", "What flavors does Rogue list?"},
         {"golden_answer",
          "Rogue lists a Spearmint flavor and a Honey Lemon flavor and a Mango line."},
         {"tags", {"flavors-per-brand"}}},
        {{"question", "What color is the Cool Mint tin from Zyn?"},
         {"golden_answer", "Cool Mint pouches from Zyn ship in a frost blue tin."},
         {"tags", {"flavor-color"}}},
        {{"question", "What color are Ruby Berry cans from Velo?"},
         {"golden_answer", "Ruby Berry cans are crimson with a white cap."},
         {"tags", {"flavor-color"}}},
        {{"question", "What color is the Fresh Lime can from Klint?"},
         {"golden_answer", "Fresh Lime cans are lime green with a white lid."},
         {"tags", {"flavor-color"}}},
        {{"question", "Which mint flavors appear across different product formats?"},
         {"golden_answer",
          "Cool Mint as a pouch from Zyn, Arctic Mint as snus from Klint, and "
          "Spearmint as a lozenge from Rogue."},
         {"tags", {"cross-format"}}},
        {{"question", "Which brand makes brown snus as loose weight?"},
         {"golden_answer",
          "The brown snus from Skruf comes as loose weight in a squat black can."},
         {"tags", {"cross-format"}}},
        {{"question", "What does Loop offer for bold palates?"},
         {"golden_answer", "Loop carries a Jalapeno Lime flavor for bold palates."},
         {"tags", {"flavors-per-brand"}}},
        {{"question", "Which product is shown in this tin photo?"},
         {"query_image", "images/img00.png"},
         {"golden_answer", caption_for(table[0])},
         {"tags", {"image-query"}}},
        {{"question", "What flavor family does this tin belong to?"},
         {"query_image", "images/img07.png"},
         {"golden_answer", caption_for(table[7])},
         {"tags", {"image-query"}}},
    };
    std::string cases_text;
    for (const auto& c : cases) cases_text += c.dump() + "\n";
    layout.cases_path = (fs::path(dir) / "cases.jsonl").string();
    write_text(layout.cases_path, cases_text);

    json config = {
        {"providers",
         {{"chat", {{"endpoint", "mock"}}},
          {"embed_text", {{"endpoint", "mock"}, {"dimension", 64}}},
          {"embed_image", {{"endpoint", "mock"}, {"dimension", 64}}},
          {"ocr", {{"endpoint", "mock"}, {"fixture_path", "fixtures/ocr.json"}}},
          {"caption", {{"endpoint", "mock"}, {"fixture_path", "fixtures/caption.json"}}}}},
        {"construction",
         {{"chunk_size", 120}, {"chunk_overlap", 24}, {"lambdas", {1, 2, 3, 4}}}},
        {"retrieval",
         {{"k", 8}, {"mode", "nico"}, {"criteria", {"i", "ii", "iii", "iv", "v"}}}},
    };
    layout.config_path = (fs::path(dir) / "hyperrag.json").string();
    write_text(layout.config_path, config.dump(2) + "\n");

    return layout;
}

}  // namespace hyperrag
