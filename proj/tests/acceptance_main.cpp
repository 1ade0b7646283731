// Acceptance gate: ten end-to-end checks over the whole engine, one
// pass/fail line each. Exit is nonzero if any check fails.
#include "hyperrag/construction.hpp"
#include "hyperrag/descriptors.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/evaluation.hpp"
#include "hyperrag/fixtures.hpp"
#include "hyperrag/image.hpp"
#include "hyperrag/kb_store.hpp"
#include "hyperrag/model.hpp"
#include "hyperrag/retrieval.hpp"
#include "hyperrag/vector_index.hpp"
#include "support/test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hyperrag;
using hyperrag::test::TempDir;

namespace {

constexpr double kScoreTolerance = 1e-6;   // cosine / criterion score agreement
constexpr double kFusionTolerance = 1e-12;  // closed-form RRF sums
constexpr int kChannelTolerance = 1;        // mean color vs double-precision oracle

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;  // keep the first failure
        ok = false;
    }
    void require(bool condition, const std::string& why) {
        if (!condition) fail(why);
    }
};

std::vector<float> random_unit_vector(std::mt19937& rng, size_t dim) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<float> v(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : v) {
            x = normal(rng);
            norm += static_cast<double>(x) * x;
        }
    } while (norm == 0.0);
    return v;
}

// criterion 1: every top-k answer agrees with an independent full scan.
Check check_index_exactness() {
    Check check;
    auto start = std::chrono::steady_clock::now();

    const size_t dim = 64;
    const size_t n = 1000;
    std::mt19937 rng(20240817);
    VectorIndex index(dim);
    std::vector<std::pair<std::string, std::vector<float>>> rows;
    for (size_t i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "v%04zu", i);
        auto vec = random_unit_vector(rng, dim);
        index.upsert(id, vec);
        rows.emplace_back(id, vec);
    }

    for (int q = 0; q < 100 && check.ok; ++q) {
        auto query = random_unit_vector(rng, dim);
        // Full-scan oracle at quantized precision, ties by ascending id.
        std::vector<ScoredHit> oracle;
        for (const auto& [id, vec] : rows) {
            oracle.push_back({id, index.score_against(query, id)});
        }
        std::stable_sort(oracle.begin(), oracle.end(),
                         [](const ScoredHit& a, const ScoredHit& b) {
                             auto qa = VectorIndex::quantize_score(a.score);
                             auto qb = VectorIndex::quantize_score(b.score);
                             if (qa != qb) return qa > qb;
                             return a.id < b.id;
                         });
        for (int k : {1, 5, 20}) {
            auto hits = index.top_k(query, k);
            check.require(hits.size() == static_cast<size_t>(k), "wrong result count");
            for (size_t i = 0; i < hits.size() && check.ok; ++i) {
                check.require(hits[i].id == oracle[i].id,
                              "rank " + std::to_string(i) + " disagrees with the full scan");
                check.require(std::abs(hits[i].score - oracle[i].score) <= kScoreTolerance,
                              "score drifts from the full scan");
            }
        }
    }

    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    check.require(elapsed < 5000, "index check exceeded 5 s: " + std::to_string(elapsed) + " ms");
    return check;
}

// criterion 2: mean color and palette naming match double-precision oracles.
Check check_color_oracle() {
    Check check;
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> dims(3, 40);
    std::uniform_int_distribution<int> byte(0, 255);

    for (int round = 0; round < 50 && check.ok; ++round) {
        int w = dims(rng);
        int h = dims(rng);
        Image image(w, h);
        double sum_r = 0.0, sum_g = 0.0, sum_b = 0.0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                Rgb c{static_cast<uint8_t>(byte(rng)), static_cast<uint8_t>(byte(rng)),
                      static_cast<uint8_t>(byte(rng))};
                image.set(x, y, c);
                sum_r += c.r;
                sum_g += c.g;
                sum_b += c.b;
            }
        }
        double count = static_cast<double>(w) * h;
        std::array<double, 3> mean{sum_r / count, sum_g / count, sum_b / count};

        ColorExtraction got = extract_color(image);
        for (int ch = 0; ch < 3; ++ch) {
            check.require(std::abs(got.avg_rgb[ch] - mean[ch]) <= kChannelTolerance + 0.5,
                          "channel mean off by more than 1");
        }

        // Naming oracle over the extractor's own mean, nearest by squared
        // distance, first palette entry on ties.
        std::string best;
        double best_dist = 1e18;
        for (const auto& [name, rgb] : css_basic_palette()) {
            double d = std::pow(got.avg_rgb[0] - rgb.r, 2) +
                       std::pow(got.avg_rgb[1] - rgb.g, 2) +
                       std::pow(got.avg_rgb[2] - rgb.b, 2);
            if (d < best_dist) {
                best_dist = d;
                best = name;
            }
        }
        check.require(got.named_color == best,
                      "named " + got.named_color + ", oracle says " + best);
    }
    return check;
}

// criterion 3: metric closed forms.
Check check_metric_closed_forms() {
    Check check;
    double partial = f1_score("mint flavor pouch", "mint pouch");
    check.require(partial == 0.8, "f1(mint flavor pouch, mint pouch) != 0.8 exactly");
    check.require(f1_score("zyn cool mint", "zyn cool mint") == 1.0, "f1 of identical text != 1");

    MockTextEmbedProvider embed(nullptr);
    double self = retrieval_similarity("wintergreen pouches in a tin",
                                       "wintergreen pouches in a tin", embed);
    check.require(std::abs(self - 1.0) <= kScoreTolerance, "self-similarity not 1 within 1e-6");
    return check;
}

// criterion 4: two builds of the same corpus are byte-identical on disk.
Check check_build_determinism(const FixtureLayout& layout) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    TempDir out("acceptance-det");
    std::string digests[2];
    for (int round = 0; round < 2; ++round) {
        ProviderSet set = hyperrag::test::mock_providers(
            read_ocr_fixture(layout.ocr_fixture_path),
            read_caption_fixture(layout.caption_fixture_path));
        BuildResult result =
            build_knowledge(load_corpus_spec(layout.corpus_path), set, {}, nullptr);
        std::string dir = out.sub("kb" + std::to_string(round));
        std::filesystem::create_directories(dir);
        save_kb(result.kb, dir);
        write_report(result.report, dir);
        digests[round] = hyperrag::test::dir_digest(dir);
    }
    check.require(digests[0] == digests[1], "repeated builds differ on disk");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    check.require(elapsed < 60000,
                  "two builds exceeded 60 s: " + std::to_string(elapsed) + " ms");
    return check;
}

// criterion 5: reported descriptor edges equal the per-image recount.
Check check_count_law(const BuildResult& built) {
    Check check;
    size_t expected = 0;
    for (const auto& [id, record] : built.kb.images()) {
        if (record.descriptors.color) expected += 1;
        if (record.descriptors.shape) expected += 1;
        if (record.descriptors.ocr && !record.descriptors.ocr->tokens.empty()) expected += 1;
        if (record.descriptors.caption) expected += 1;
        if (record.labels.brand) expected += 1;
        if (record.labels.product_type) expected += 1;
        if (record.labels.tobacco_type) expected += 1;
    }
    check.require(built.report.descriptor_hyperedges == expected,
                  "report says " + std::to_string(built.report.descriptor_hyperedges) +
                      ", recount says " + std::to_string(expected));

    size_t lambda_total = 0;
    for (const auto& [lambda, count] : built.report.lambda_edges) lambda_total += count;
    check.require(
        built.report.descriptor_hyperedges == lambda_total + built.report.label_edges,
        "lambda/label split does not add up");
    check.require(built.kb.integrity_violations().empty(), "kb has dangling references");
    return check;
}

// criterion 6: querying with a stored image puts it at fused rank 1 with
// perfect scores on all five criteria.
Check check_self_retrieval(const FixtureLayout& layout, const BuildResult& built) {
    Check check;
    ProviderSet set = hyperrag::test::mock_providers(
        read_ocr_fixture(layout.ocr_fixture_path),
        read_caption_fixture(layout.caption_fixture_path));
    std::vector<uint8_t> bytes = read_file_bytes(layout.image_paths.at(0));
    std::string image_id = content_hash(std::span<const uint8_t>(bytes));

    Query query;
    query.text = "identify this tin";
    query.image = bytes;
    query.k = 8;
    RetrievalResult result = retrieve(built.kb, query, set, nullptr);
    check.require(!result.images.empty(), "no image matches returned");
    if (!check.ok) return check;

    const ImageMatch& top = result.images.front();
    check.require(top.id == image_id, "stored image is not fused rank 1");
    check.require(top.skipped_criteria.empty(), "criteria were skipped on the exact match");
    check.require(top.criterion_scores.size() == 5, "expected scores for all five criteria");
    for (const auto& [name, score] : top.criterion_scores) {
        check.require(std::abs(score - 1.0) <= kScoreTolerance,
                      "criterion " + name + " scored " + std::to_string(score));
    }
    return check;
}

// criterion 7: fused scores equal hand-computed reciprocal-rank sums.
Check check_fusion_closed_form() {
    Check check;
    // a: ranks 1,2,3 -> 1/61 + 1/62 + 1/63
    // b: ranks 2,1   -> 1/62 + 1/61
    // c: ranks 3,2   -> 1/63 + 1/62  (tie with b broken by id)
    // d: rank 1 once -> 1/61
    std::vector<std::vector<ScoredHit>> rankings{
        {{"a", 0.9}, {"b", 0.8}, {"c", 0.7}},
        {{"b", 0.9}, {"c", 0.8}, {"a", 0.7}},
        {{"d", 0.9}, {"a", 0.8}},
    };
    std::map<std::string, double> expected{
        {"a", 1.0 / 61 + 1.0 / 63 + 1.0 / 62},
        {"b", 1.0 / 62 + 1.0 / 61},
        {"c", 1.0 / 63 + 1.0 / 62},
        {"d", 1.0 / 61},
    };
    auto fused = fuse(rankings, 10);
    check.require(fused.size() == expected.size(), "wrong fused item count");
    for (const auto& hit : fused) {
        check.require(std::abs(hit.score - expected.at(hit.id)) <= kFusionTolerance,
                      "fused score for " + hit.id + " off the closed form");
    }
    check.require(fused[0].id == "a", "order head wrong");

    // Shared ranks: two tied leaders both take rank 1, third takes rank 3.
    auto tied = fuse({{{"x", 0.5}, {"y", 0.5}, {"z", 0.4}}}, 10);
    check.require(std::abs(tied[0].score - 1.0 / 61) <= kFusionTolerance &&
                      std::abs(tied[1].score - 1.0 / 61) <= kFusionTolerance,
                  "tied leaders do not share rank 1");
    check.require(std::abs(tied[2].score - 1.0 / 63) <= kFusionTolerance,
                  "rank after a tie does not skip");
    return check;
}

// criterion 8: generation mode contracts observed through provider stats.
Check check_mode_contracts(const FixtureLayout& layout, const BuildResult& built) {
    Check check;
    {
        ProviderSet set = hyperrag::test::mock_providers(
            read_ocr_fixture(layout.ocr_fixture_path),
            read_caption_fixture(layout.caption_fixture_path));
        Query query;
        query.text = "what is zyn";
        query.mode = GenerationMode::Naive;
        GenerationResult out = generate_answer(built.kb, query, RetrievalResult{}, set, {});
        check.require(set.stats->chat_calls.load() == 1, "naive made != 1 chat call");
        check.require(set.stats->embed_text_calls.load() == 0 &&
                          set.stats->embed_image_calls.load() == 0,
                      "naive embedded something");
        check.require(out.context_blocks.empty(), "naive saw context blocks");
    }
    {
        ProviderSet set = hyperrag::test::mock_providers(
            read_ocr_fixture(layout.ocr_fixture_path),
            read_caption_fixture(layout.caption_fixture_path));
        Query query;
        query.text = "describe the minty tins";
        query.image = read_file_bytes(layout.image_paths.at(2));
        query.k = 4;
        query.mode = GenerationMode::Nico;
        RetrievalResult retrieval = retrieve(built.kb, query, set, nullptr);
        generate_answer(built.kb, query, retrieval, set, {});
        check.require(set.stats->chat_image_payloads.load() == 0,
                      "image bytes reached the chat provider");
        check.require(set.stats->chat_calls.load() == 1, "generation made != 1 chat call");
    }
    return check;
}

// criterion 9: the ablation grid is complete, bounded, and reproducible.
Check check_ablation_grid(const FixtureLayout& layout, const BuildResult& built) {
    Check check;
    std::vector<EvalCase> cases = load_eval_cases(layout.cases_path);
    std::string dumps[2];
    for (int round = 0; round < 2; ++round) {
        ProviderSet set = hyperrag::test::mock_providers(
            read_ocr_fixture(layout.ocr_fixture_path),
            read_caption_fixture(layout.caption_fixture_path));
        auto reports = run_ablation(built.kb, cases, default_ablation_subsets(), {4, 8}, set,
                                    nullptr, {});
        check.require(reports.size() == 8, "grid is not 4 subsets x 2 ks");
        for (const auto& report : reports) {
            check.require(report.cases.size() == cases.size(), "cell dropped cases");
            auto bounded = [](double v) { return v >= 0.0 && v <= 1.0; };
            check.require(bounded(report.mean_f1) && bounded(report.mean_rs),
                          "cell metric out of [0,1]");
            if (report.mean_ge) {
                check.require(bounded(*report.mean_ge), "cell ge out of [0,1]");
            }
        }
        dumps[round] = ablation_to_json(reports).dump();
    }
    check.require(dumps[0] == dumps[1], "repeated ablations differ");
    return check;
}

// criterion 10: the store loads back exactly what was saved.
Check check_store_roundtrip() {
    Check check;
    for (uint32_t seed = 1; seed <= 20 && check.ok; ++seed) {
        std::mt19937 rng(seed);
        const uint32_t dim = 16;
        KnowledgeBase kb(dim, {1, 2, 3, 4});
        // Sources must resolve, so everything hangs off one real chunk.
        const std::string chunk_id = "chunk-" + std::to_string(seed);
        kb.add_chunk({chunk_id, "seed text for the round-trip corpus", "doc-1", "", {}});

        std::vector<std::string> ids;
        for (int i = 0; i < 500; ++i) {
            std::string name = "entity " + std::to_string(seed) + "-" + std::to_string(i);
            std::string id = kb.add_entity(name, EntityKind::Text,
                                           i % 3 ? "description " + std::to_string(i) : "",
                                           chunk_id);
            ids.push_back(id);
        }
        std::uniform_int_distribution<size_t> pick(0, ids.size() - 1);
        std::uniform_int_distribution<int> arity(2, 5);
        std::uniform_real_distribution<double> weight(0.0, 1.0);
        for (int e = 0; e < 300; ++e) {
            std::set<std::string> members;
            int target = arity(rng);
            while (static_cast<int>(members.size()) < target) {
                members.insert(ids[pick(rng)]);
            }
            kb.add_hyperedge(std::vector<std::string>(members.begin(), members.end()),
                             "relation " + std::to_string(e), weight(rng), chunk_id);
        }
        for (const auto& id : ids) {
            Entity* entity = kb.mutable_entity(id);
            entity->embedding_id = entity_embedding_id(id);
            kb.index().upsert(entity->embedding_id, random_unit_vector(rng, dim));
        }

        TempDir dir("acceptance-store");
        save_kb(kb, dir.str());
        KnowledgeBase loaded = load_kb(dir.str());
        check.require(loaded == kb, "seed " + std::to_string(seed) + " round-trip mismatch");
        check.require(loaded.integrity_violations().empty(),
                      "loaded kb has dangling references");
    }
    return check;
}

}  // namespace

int main() {
    TempDir fixture_dir("acceptance-fixture");
    FixtureLayout layout = write_fixture_corpus(fixture_dir.str());
    ProviderSet build_set = hyperrag::test::mock_providers(
        read_ocr_fixture(layout.ocr_fixture_path),
        read_caption_fixture(layout.caption_fixture_path));
    BuildResult built =
        build_knowledge(load_corpus_spec(layout.corpus_path), build_set, {}, nullptr);

    struct Criterion {
        int number;
        const char* name;
        Check result;
    };
    std::vector<Criterion> criteria;
    criteria.push_back({1, "exact top-k matches a full-scan oracle", check_index_exactness()});
    criteria.push_back({2, "mean color and palette name match oracles", check_color_oracle()});
    criteria.push_back({3, "metric closed forms hold", check_metric_closed_forms()});
    criteria.push_back(
        {4, "kb builds are byte-identical", check_build_determinism(layout)});
    criteria.push_back({5, "descriptor edge count law holds", check_count_law(built)});
    criteria.push_back(
        {6, "stored image self-query is a perfect match", check_self_retrieval(layout, built)});
    criteria.push_back(
        {7, "rank fusion matches its closed form", check_fusion_closed_form()});
    criteria.push_back(
        {8, "generation modes respect their call contracts",
         check_mode_contracts(layout, built)});
    criteria.push_back(
        {9, "ablation grid is complete and reproducible", check_ablation_grid(layout, built)});
    criteria.push_back({10, "kb store round-trips exactly", check_store_roundtrip()});

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (criterion.result.ok) {
            std::printf("[PASS] criterion %d: %s\n", criterion.number, criterion.name);
        } else {
            ++failures;
            std::printf("[FAIL] criterion %d: %s (%s)\n", criterion.number, criterion.name,
                        criterion.result.detail.c_str());
        }
    }
    if (failures) {
        std::printf("%d of %zu acceptance criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
}
