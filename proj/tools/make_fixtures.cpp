#include "hyperrag/fixtures.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Write the demo corpus: docs, tin images, fixtures, cases, config"};
    std::string out_dir;
    app.add_option("--out", out_dir, "Directory to write into")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        hyperrag::FixtureLayout layout = hyperrag::write_fixture_corpus(out_dir);
        nlohmann::json summary = {{"root", layout.root},
                                  {"corpus", layout.corpus_path},
                                  {"cases", layout.cases_path},
                                  {"config", layout.config_path},
                                  {"docs", layout.doc_paths.size()},
                                  {"images", layout.image_paths.size()}};
        std::cout << summary.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
