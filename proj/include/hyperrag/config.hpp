// Application config: one JSON file wiring providers, construction and
// retrieval defaults, and prompt template paths.
#pragma once

#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"
#include "hyperrag/retrieval.hpp"

#include <map>
#include <set>
#include <string>

namespace hyperrag {

struct AppConfig {
    std::map<std::string, ProviderConfig> providers;  // keyed by kind name

    size_t chunk_size = 200;
    size_t chunk_overlap = 40;
    LambdaSet lambdas = {1, 2, 3, 4};

    int k = 8;
    GenerationMode mode = GenerationMode::Nico;
    std::set<int> criteria = {1, 2, 3, 4, 5};

    std::string cache_dir;  // empty: descriptor cache lives in the KB directory

    // Loaded template texts; empty string selects the built-in default.
    std::string extract_template;
    std::string generate_template;
    std::string judge_template;

    std::string config_dir;  // directory the config file was loaded from
};

// Parses and validates. Unknown keys anywhere are rejected; template and
// fixture paths are resolved against the config file's directory and must
// exist; raw API keys are refused (only env-var names are accepted).
AppConfig load_app_config(const std::string& path);

// explicit_path when given (must exist), else ./hyperrag.json, else error.
std::string discover_config_path(const std::string& explicit_path);

// All five providers on the in-process mock implementations, dimension 64.
AppConfig default_mock_config();

}  // namespace hyperrag
