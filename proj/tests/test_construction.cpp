#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hyperrag/construction.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/fixtures.hpp"
#include "hyperrag/kb_store.hpp"
#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"
#include "support/test_support.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace hyperrag;
using hyperrag::test::ScriptedChatProvider;
using hyperrag::test::TempDir;

namespace {

std::string words(size_t n, const std::string& stem = "w") {
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += stem + std::to_string(i);
    }
    return out;
}

size_t word_count(const std::string& text) {
    std::istringstream in(text);
    std::string w;
    size_t n = 0;
    while (in >> w) ++n;
    return n;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

ProviderSet providers_with_chat(std::shared_ptr<ChatProvider> chat) {
    ProviderSet set = hyperrag::test::mock_providers();
    set.chat = std::move(chat);
    return set;
}

// Minimal single-doc corpus with no images.
CorpusSpec text_corpus(const TempDir& dir, const std::string& doc_text) {
    write_file(dir.sub("doc.txt"), doc_text);
    CorpusSpec spec;
    spec.docs = {"doc.txt"};
    spec.base_dir = dir.str();
    spec.chunk_size = 64;
    spec.chunk_overlap = 16;
    spec.enabled_lambdas = {1, 2, 3, 4};
    return spec;
}

}  // namespace

TEST_CASE("chunking slides a fixed window with the configured stride") {
    auto windows = chunk_text(words(250), 100, 20);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].word_offset == 0);
    CHECK(windows[1].word_offset == 80);
    CHECK(windows[2].word_offset == 160);
    CHECK(word_count(windows[0].text) == 100);
    CHECK(word_count(windows[1].text) == 100);
    CHECK(word_count(windows[2].text) == 90);
    CHECK(windows[0].text.rfind("w0 w1 ", 0) == 0);
    // Overlap: window 1 starts on the last 20 words of window 0.
    CHECK(windows[1].text.rfind("w80 w81 ", 0) == 0);
}

TEST_CASE("chunking emits one window when the document fits") {
    auto windows = chunk_text(words(100), 100, 20);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].word_offset == 0);
    CHECK(word_count(windows[0].text) == 100);

    auto shorter = chunk_text(words(17), 100, 20);
    REQUIRE(shorter.size() == 1);
    CHECK(word_count(shorter[0].text) == 17);
}

TEST_CASE("chunking covers every word at least once") {
    for (size_t n : {16, 99, 100, 101, 250, 777}) {
        auto windows = chunk_text(words(n), 100, 20);
        std::set<size_t> covered;
        for (const auto& w : windows) {
            size_t count = word_count(w.text);
            for (size_t i = 0; i < count; ++i) covered.insert(w.word_offset + i);
        }
        CHECK(covered.size() == n);
        CHECK(*covered.rbegin() == n - 1);
    }
}

TEST_CASE("chunking collapses whitespace by re-joining words") {
    auto windows = chunk_text("one\t two\n\nthree   four", 16, 0);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].text == "one two three four");
}

TEST_CASE("chunking rejects degenerate settings and empty documents") {
    CHECK_THROWS_WITH_AS(static_cast<void>(chunk_text(words(30), 15, 0)),
                         doctest::Contains("at least 16"), Error);
    CHECK_THROWS_WITH_AS(static_cast<void>(chunk_text(words(30), 20, 20)),
                         doctest::Contains("smaller than chunk size"), Error);
    try {
        chunk_text("   \n\t  ", 20, 4);
        FAIL("expected EmptyDocument");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyDocument);
    }
}

TEST_CASE("extraction parser accepts a full payload and dedupes members") {
    std::string response = R"({
      "entities": [
        {"name": " Zyn ", "kind_hint": "brand", "description": "a pouch brand"},
        {"name": "Cool Mint"}
      ],
      "relations": [
        {"members": ["Zyn", "zyn", "Cool Mint"], "relation_text": "Zyn sells Cool Mint",
         "weight": 0.5}
      ]
    })";
    std::string error;
    auto payload = parse_extraction(response, error);
    REQUIRE(payload.has_value());
    CHECK(error.empty());
    REQUIRE(payload->entities.size() == 2);
    CHECK(payload->entities[0].name == "Zyn");
    CHECK(payload->entities[0].kind_hint == "brand");
    CHECK(payload->entities[0].description == "a pouch brand");
    CHECK(payload->entities[1].kind_hint.empty());
    REQUIRE(payload->relations.size() == 1);
    // "Zyn" and "zyn" collapse to one member under name normalization.
    CHECK(payload->relations[0].members == std::vector<std::string>{"Zyn", "Cool Mint"});
    CHECK(payload->relations[0].weight == doctest::Approx(0.5));
}

TEST_CASE("extraction parser defaults weight to 1 and relations to empty") {
    std::string error;
    auto payload = parse_extraction(R"({"entities": [{"name": "Velo"}]})", error);
    REQUIRE(payload.has_value());
    CHECK(payload->relations.empty());

    auto with_relation = parse_extraction(
        R"({"entities": [], "relations": [{"members": ["A1", "B2"], "relation_text": "t"}]})",
        error);
    REQUIRE(with_relation.has_value());
    CHECK(with_relation->relations[0].weight == doctest::Approx(1.0));
}

TEST_CASE("extraction parser rejects malformed payloads with a reason") {
    struct Case {
        const char* response;
        const char* reason;
    };
    const Case cases[] = {
        {"not json at all", "not a JSON object"},
        {"[1, 2]", "not a JSON object"},
        {R"({"relations": []})", "missing \"entities\""},
        {R"({"entities": [{"kind_hint": "x"}]})", "string name"},
        {R"({"entities": [{"name": "  "}]})", "empty name"},
        {R"({"entities": [], "relations": [{"members": ["Zyn", " zyn"],
           "relation_text": "t"}]})",
         "at least 2 distinct members"},
        {R"({"entities": [], "relations": [{"members": ["A1", "B2"]}]})",
         "without relation_text"},
        {R"({"entities": [], "relations": [{"members": ["A1", "B2"], "relation_text": "t",
           "weight": 1.5}]})",
         "outside [0,1]"},
        {R"({"entities": [], "relations": [{"members": ["A1", "B2"], "relation_text": "t",
           "weight": "heavy"}]})",
         "must be a number"},
    };
    for (const auto& c : cases) {
        std::string error;
        auto payload = parse_extraction(c.response, error);
        CHECK_FALSE(payload.has_value());
        CHECK_MESSAGE(error.find(c.reason) != std::string::npos,
                      "response ", c.response, " gave error: ", error);
    }
}

TEST_CASE("graph extraction repairs once after an invalid response") {
    ScriptedChatProvider chat({"garbage", R"({"entities": [{"name": "Zyn"}]})"});
    auto outcome = extract_text_graph("some chunk", chat, "extract from: {chunk}");
    REQUIRE(outcome.payload.has_value());
    CHECK(outcome.repair_calls == 1);
    REQUIRE(chat.calls() == 2);
    CHECK(chat.prompts[0] == "extract from: some chunk");
    CHECK(chat.prompts[1] == "extract from: some chunk\n\nReturn only valid JSON.");
}

TEST_CASE("graph extraction gives up after a failed repair") {
    ScriptedChatProvider chat({"garbage", "still garbage"});
    auto outcome = extract_text_graph("some chunk", chat, "{chunk}");
    CHECK_FALSE(outcome.payload.has_value());
    CHECK(outcome.repair_calls == 1);
    CHECK_FALSE(outcome.error.empty());
    CHECK(chat.calls() == 2);
}

TEST_CASE("build flags chunks whose extraction never parses") {
    TempDir dir("flagged");
    auto chat = std::make_shared<ScriptedChatProvider>(std::vector<std::string>{"nope"});
    ProviderSet set = providers_with_chat(chat);
    CorpusSpec spec = text_corpus(dir, words(30));

    BuildResult result = build_knowledge(spec, set, {}, nullptr);
    CHECK(result.report.chunks == 1);
    CHECK(result.report.parse_failures == 1);
    CHECK(result.report.repair_calls == 1);
    REQUIRE(result.report.flagged_chunks.size() == 1);
    CHECK(result.kb.chunks().count(result.report.flagged_chunks[0]) == 1);
    REQUIRE(result.report.warnings.size() == 1);
    CHECK(result.report.warnings[0].find("extraction failed") != std::string::npos);
    // The chunk itself stays retrievable even though extraction failed.
    CHECK(result.report.entities == 0);
    CHECK(result.report.hyperedges == 0);
}

TEST_CASE("build promotes unseen relation members to stub entities") {
    TempDir dir("closure");
    auto chat = std::make_shared<ScriptedChatProvider>(std::vector<std::string>{
        R"({"entities": [{"name": "Zyn", "description": "a brand"}],
            "relations": [{"members": ["Zyn", "Velo"],
                           "relation_text": "Zyn competes with Velo"}]})"});
    ProviderSet set = providers_with_chat(chat);
    CorpusSpec spec = text_corpus(dir, words(30));

    BuildResult result = build_knowledge(spec, set, {}, nullptr);
    const Entity* zyn = result.kb.find_entity_by_key("Zyn", EntityKind::Text);
    const Entity* velo = result.kb.find_entity_by_key("Velo", EntityKind::Text);
    REQUIRE(zyn);
    REQUIRE(velo);
    CHECK(zyn->description == "a brand");
    CHECK(velo->description == "(mentioned)");
    REQUIRE(result.kb.hyperedges().size() == 1);
    const auto& edge = result.kb.hyperedges().begin()->second;
    CHECK(edge.members.size() == 2);
    CHECK(edge.weight == doctest::Approx(1.0));
    CHECK(result.kb.integrity_violations().empty());
}

TEST_CASE("build folds kind hints into entity descriptions") {
    TempDir dir("kind-hint");
    auto chat = std::make_shared<ScriptedChatProvider>(std::vector<std::string>{
        R"({"entities": [{"name": "Zyn", "kind_hint": "brand", "description": "sells pouches"},
                         {"name": "Velo", "kind_hint": "brand"}]})"});
    ProviderSet set = providers_with_chat(chat);
    CorpusSpec spec = text_corpus(dir, words(30));

    BuildResult result = build_knowledge(spec, set, {}, nullptr);
    CHECK(result.kb.find_entity_by_key("Zyn", EntityKind::Text)->description ==
          "brand: sells pouches");
    CHECK(result.kb.find_entity_by_key("Velo", EntityKind::Text)->description == "brand");
}

TEST_CASE("corpus spec loads docs, chunk settings, and an image manifest") {
    TempDir dir("spec-load");
    write_file(dir.sub("a.txt"), "text");
    write_file(dir.sub("manifest.jsonl"),
               R"({"uri": "img0.png", "brand": "Zyn", "product_type": "pouch"})"
               "\n\n"
               R"({"uri": "img1.png", "tobacco_type": "brown"})"
               "\n");
    write_file(dir.sub("corpus.json"),
               R"({"docs": ["a.txt"], "images": "manifest.jsonl",
                   "chunk_size": 120, "chunk_overlap": 24})");

    CorpusSpec spec = load_corpus_spec(dir.sub("corpus.json"));
    CHECK(spec.docs == std::vector<std::string>{"a.txt"});
    CHECK(spec.base_dir == dir.str());
    CHECK(spec.chunk_size == 120);
    CHECK(spec.chunk_overlap == 24);
    REQUIRE(spec.images.size() == 2);
    CHECK(spec.images[0].uri == dir.sub("img0.png"));
    CHECK(spec.images[0].labels.brand == "Zyn");
    CHECK(spec.images[0].labels.product_type == "pouch");
    CHECK_FALSE(spec.images[0].labels.tobacco_type.has_value());
    CHECK(spec.images[1].labels.tobacco_type == "brown");
}

TEST_CASE("corpus spec rejects unknown keys and manifest rows without uri") {
    TempDir dir("spec-bad");
    write_file(dir.sub("corpus.json"), R"({"docs": [], "chunking": 10})");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_corpus_spec(dir.sub("corpus.json"))),
                         doctest::Contains("chunking"), Error);

    write_file(dir.sub("manifest.jsonl"), R"({"brand": "Zyn"})" "\n");
    write_file(dir.sub("corpus2.json"), R"({"images": "manifest.jsonl"})");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_corpus_spec(dir.sub("corpus2.json"))),
                         doctest::Contains("no uri"), Error);

    CHECK_THROWS_AS(static_cast<void>(load_corpus_spec(dir.sub("missing.json"))), Error);
}

TEST_CASE("build requires providers for the enabled descriptor lambdas") {
    TempDir dir("lambda-req");
    CorpusSpec spec = text_corpus(dir, words(30));
    ProviderSet set = hyperrag::test::mock_providers();
    set.ocr = nullptr;
    CHECK_THROWS_WITH_AS(static_cast<void>(build_knowledge(spec, set, {}, nullptr)),
                         doctest::Contains("lambda 3"), Error);

    spec.enabled_lambdas = {1, 2, 4};
    set.caption = nullptr;
    CHECK_THROWS_WITH_AS(static_cast<void>(build_knowledge(spec, set, {}, nullptr)),
                         doctest::Contains("lambda 4"), Error);

    spec.enabled_lambdas = {1, 2};
    CHECK_NOTHROW(static_cast<void>(build_knowledge(spec, set, {}, nullptr)));

    set.embed_text = nullptr;
    CHECK_THROWS_AS(static_cast<void>(build_knowledge(spec, set, {}, nullptr)), Error);
}

TEST_CASE("demo corpus build hits the frozen structural counts") {
    TempDir dir("fixture-build");
    FixtureLayout layout = write_fixture_corpus(dir.str());
    CorpusSpec spec = load_corpus_spec(layout.corpus_path);
    ProviderSet set = hyperrag::test::mock_providers(
        read_ocr_fixture(layout.ocr_fixture_path),
        read_caption_fixture(layout.caption_fixture_path));

    BuildResult result = build_knowledge(spec, set, {}, nullptr);
    const BuildReport& report = result.report;

    CHECK(report.documents == 8);
    CHECK(report.chunks == 12);
    CHECK(report.images == 32);
    CHECK(report.entities == 155);
    CHECK(report.text_entities == 41);
    CHECK(report.image_entities == 32);
    CHECK(report.descriptor_entities == 82);
    CHECK(report.hyperedges == 252);
    CHECK(report.lambda_edges ==
          std::map<int, size_t>{{1, 32}, {2, 32}, {3, 32}, {4, 32}});
    CHECK(report.label_edges == 91);
    CHECK(report.descriptor_hyperedges == 219);
    CHECK(report.parse_failures == 0);
    CHECK(report.repair_calls == 0);
    CHECK(report.flagged_chunks.empty());
    CHECK(report.warnings.empty());

    CHECK(report.provider_calls.chat == 12);
    CHECK(report.provider_calls.embed_text == 451);
    CHECK(report.provider_calls.embed_image == 32);
    CHECK(report.provider_calls.ocr == 32);
    CHECK(report.provider_calls.caption == 32);
    CHECK(report.provider_calls.retries == 0);

    CHECK(result.kb.index().size() == 483);
    CHECK(result.kb.integrity_violations().empty());
}

TEST_CASE("descriptor edge total follows the per-image count law") {
    TempDir dir("count-law");
    FixtureLayout layout = write_fixture_corpus(dir.str());
    CorpusSpec spec = load_corpus_spec(layout.corpus_path);
    ProviderSet set = hyperrag::test::mock_providers(
        read_ocr_fixture(layout.ocr_fixture_path),
        read_caption_fixture(layout.caption_fixture_path));

    BuildResult result = build_knowledge(spec, set, {}, nullptr);

    // Oracle recomputed from the stored records: every image carries one edge
    // per extracted descriptor plus one per present label.
    size_t expected = 0;
    for (const auto& [id, record] : result.kb.images()) {
        if (record.descriptors.color) expected += 1;
        if (record.descriptors.shape) expected += 1;
        if (record.descriptors.ocr && !record.descriptors.ocr->tokens.empty()) expected += 1;
        if (record.descriptors.caption) expected += 1;
        if (record.labels.brand) expected += 1;
        if (record.labels.product_type) expected += 1;
        if (record.labels.tobacco_type) expected += 1;
    }
    CHECK(result.report.descriptor_hyperedges == expected);

    size_t lambda_total = 0;
    for (const auto& [lambda, count] : result.report.lambda_edges) lambda_total += count;
    CHECK(result.report.descriptor_hyperedges == lambda_total + result.report.label_edges);
}

TEST_CASE("disabling lambdas drops exactly their descriptor edges") {
    TempDir dir("lambda-diff");
    FixtureLayout layout = write_fixture_corpus(dir.str());
    CorpusSpec spec = load_corpus_spec(layout.corpus_path);
    spec.enabled_lambdas = {1, 2};
    ProviderSet set = hyperrag::test::mock_providers(
        read_ocr_fixture(layout.ocr_fixture_path),
        read_caption_fixture(layout.caption_fixture_path));

    BuildResult result = build_knowledge(spec, set, {}, nullptr);
    const BuildReport& report = result.report;
    CHECK(report.lambda_edges == std::map<int, size_t>{{1, 32}, {2, 32}});
    CHECK(report.label_edges == 91);
    CHECK(report.descriptor_hyperedges == 64 + 91);
    CHECK(report.provider_calls.ocr == 0);
    CHECK(report.provider_calls.caption == 0);
    // Text side is untouched by the lambda choice.
    CHECK(report.chunks == 12);
    CHECK(report.text_entities == 41);
    CHECK(result.kb.enabled_lambdas() == LambdaSet{1, 2});
    for (const auto& [id, record] : result.kb.images()) {
        CHECK_FALSE(record.descriptors.ocr.has_value());
        CHECK_FALSE(record.descriptors.caption.has_value());
    }
}

TEST_CASE("demo corpus builds are deterministic byte for byte") {
    TempDir dir("det");
    FixtureLayout layout = write_fixture_corpus(dir.str());
    CorpusSpec spec = load_corpus_spec(layout.corpus_path);

    std::string digests[2];
    std::string reports[2];
    for (int round = 0; round < 2; ++round) {
        ProviderSet set = hyperrag::test::mock_providers(
            read_ocr_fixture(layout.ocr_fixture_path),
            read_caption_fixture(layout.caption_fixture_path));
        BuildResult result = build_knowledge(spec, set, {}, nullptr);
        std::string kb_dir = dir.sub("kb" + std::to_string(round));
        std::filesystem::create_directories(kb_dir);
        save_kb(result.kb, kb_dir);
        digests[round] = hyperrag::test::dir_digest(kb_dir);
        reports[round] = report_to_json(result.report);
    }
    CHECK(digests[0] == digests[1]);
    CHECK(reports[0] == reports[1]);
}

TEST_CASE("build reports round-trip through the kb directory") {
    TempDir dir("report-rt");
    auto chat = std::make_shared<ScriptedChatProvider>(std::vector<std::string>{
        R"({"entities": [{"name": "Zyn"}]})"});
    ProviderSet set = providers_with_chat(chat);
    CorpusSpec spec = text_corpus(dir, words(40));

    BuildResult result = build_knowledge(spec, set, {}, nullptr);
    std::string kb_dir = dir.sub("kb");
    std::filesystem::create_directories(kb_dir);
    write_report(result.report, kb_dir);

    BuildReport back = read_report(kb_dir);
    CHECK(back.documents == result.report.documents);
    CHECK(back.chunks == result.report.chunks);
    CHECK(back.entities == result.report.entities);
    CHECK(back.hyperedges == result.report.hyperedges);
    CHECK(back.lambda_edges == result.report.lambda_edges);
    CHECK(back.label_edges == result.report.label_edges);
    CHECK(back.descriptor_hyperedges == result.report.descriptor_hyperedges);
    CHECK(back.provider_calls.chat == result.report.provider_calls.chat);
    CHECK(back.provider_calls.embed_text == result.report.provider_calls.embed_text);
    CHECK(report_to_json(back) == report_to_json(result.report));
}

TEST_CASE("embedding ids carry their row-kind prefixes") {
    CHECK(entity_embedding_id("abc") == "e:abc");
    CHECK(hyperedge_embedding_id("abc") == "h:abc");
    CHECK(chunk_embedding_id("abc") == "c:abc");
    CHECK(image_visual_embedding_id("abc") == "iv:abc");
    CHECK(image_caption_embedding_id("abc") == "ic:abc");
    CHECK(image_shape_embedding_id("abc") == "is:abc");
}
