// Writes the self-contained demo corpus used by the test suite and the
// quickstart: text docs, synthetic product-tin images, canned OCR/caption
// maps keyed by image content hash, eval cases, and a mock config.
#pragma once

#include <string>
#include <vector>

namespace hyperrag {

struct FixtureLayout {
    std::string root;
    std::string corpus_path;           // corpus.json
    std::string cases_path;            // cases.jsonl
    std::string config_path;           // hyperrag.json
    std::string ocr_fixture_path;      // fixtures/ocr.json
    std::string caption_fixture_path;  // fixtures/caption.json
    std::vector<std::string> doc_paths;
    std::vector<std::string> image_paths;
};

// Idempotent: same directory in, byte-identical files out.
FixtureLayout write_fixture_corpus(const std::string& dir);

}  // namespace hyperrag
