#include "hyperrag/config.hpp"

#include "hyperrag/errors.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace hyperrag {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.count(key)) {
            throw Error(Errc::ConfigError, where + ": unknown key \"" + key + "\"");
        }
    }
}

std::string resolve_existing_path(const json& value, const fs::path& base,
                                  const std::string& where) {
    if (!value.is_string()) {
        throw Error(Errc::ConfigError, where + " must be a string path");
    }
    fs::path p = value.get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!fs::exists(p)) {
        throw Error(Errc::ConfigError, where + ": file not found: " + p.string());
    }
    return p.string();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open: " + path);
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

ProviderConfig parse_provider(const std::string& kind_key, const json& obj,
                              const fs::path& base) {
    const std::string where = "providers." + kind_key;
    if (!obj.is_object()) {
        throw Error(Errc::ConfigError, where + " must be an object");
    }
    if (obj.contains("api_key")) {
        throw Error(Errc::ConfigError,
                    where + ": raw api_key is not accepted; use api_key_env");
    }
    reject_unknown_keys(obj,
                        {"endpoint", "model_name", "timeout_seconds", "max_retries",
                         "api_key_env", "dimension", "fixture_path"},
                        where);
    ProviderConfig config;
    config.kind = provider_kind_from_name(kind_key);
    if (obj.contains("endpoint")) config.endpoint = obj.at("endpoint").get<std::string>();
    if (obj.contains("model_name")) {
        config.model_name = obj.at("model_name").get<std::string>();
    }
    if (obj.contains("timeout_seconds")) {
        config.timeout_seconds = obj.at("timeout_seconds").get<double>();
    }
    if (obj.contains("max_retries")) config.max_retries = obj.at("max_retries").get<int>();
    if (obj.contains("api_key_env")) {
        config.api_key_env = obj.at("api_key_env").get<std::string>();
    }
    if (obj.contains("dimension")) config.dimension = obj.at("dimension").get<uint32_t>();
    if (obj.contains("fixture_path")) {
        config.fixture_path =
            resolve_existing_path(obj.at("fixture_path"), base, where + ".fixture_path");
    }
    if (config.timeout_seconds <= 0.0) {
        throw Error(Errc::ConfigError, where + ": timeout_seconds must be > 0");
    }
    if (config.max_retries < 0) {
        throw Error(Errc::ConfigError, where + ": max_retries must be >= 0");
    }
    if (config.dimension < 1) {
        throw Error(Errc::ConfigError, where + ": dimension must be >= 1");
    }
    if (config.endpoint.empty()) {
        throw Error(Errc::ConfigError, where + ": endpoint must be non-empty");
    }
    return config;
}

LambdaSet parse_lambda_array(const json& value, const std::string& where) {
    if (!value.is_array() || value.empty()) {
        throw Error(Errc::ConfigError, where + " must be a non-empty array");
    }
    LambdaSet out;
    for (const auto& item : value) {
        if (!item.is_number_integer()) {
            throw Error(Errc::ConfigError, where + " entries must be integers 1..4");
        }
        int lambda = item.get<int>();
        if (lambda < 1 || lambda > 4) {
            throw Error(Errc::ConfigError,
                        where + ": lambda out of range: " + std::to_string(lambda));
        }
        out.insert(lambda);
    }
    return out;
}

}  // namespace

AppConfig load_app_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open config file: " + path);
    }
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        throw Error(Errc::ConfigError, "config is not a JSON object: " + path);
    }
    reject_unknown_keys(root, {"providers", "construction", "retrieval", "paths"}, "config");

    AppConfig config;
    const fs::path base = fs::absolute(path).parent_path();
    config.config_dir = base.string();

    if (root.contains("providers")) {
        const json& providers = root.at("providers");
        if (!providers.is_object()) {
            throw Error(Errc::ConfigError, "providers must be an object");
        }
        for (const auto& [key, value] : providers.items()) {
            config.providers.emplace(key, parse_provider(key, value, base));
        }
    }

    if (root.contains("construction")) {
        const json& c = root.at("construction");
        if (!c.is_object()) {
            throw Error(Errc::ConfigError, "construction must be an object");
        }
        reject_unknown_keys(c, {"chunk_size", "chunk_overlap", "lambdas"}, "construction");
        if (c.contains("chunk_size")) config.chunk_size = c.at("chunk_size").get<size_t>();
        if (c.contains("chunk_overlap")) {
            config.chunk_overlap = c.at("chunk_overlap").get<size_t>();
        }
        if (c.contains("lambdas")) {
            config.lambdas = parse_lambda_array(c.at("lambdas"), "construction.lambdas");
        }
        if (config.chunk_size < 16) {
            throw Error(Errc::ConfigError, "construction.chunk_size must be >= 16");
        }
        if (config.chunk_overlap >= config.chunk_size) {
            throw Error(Errc::ConfigError,
                        "construction.chunk_overlap must be smaller than chunk_size");
        }
    }

    if (root.contains("retrieval")) {
        const json& r = root.at("retrieval");
        if (!r.is_object()) {
            throw Error(Errc::ConfigError, "retrieval must be an object");
        }
        reject_unknown_keys(r, {"k", "mode", "criteria"}, "retrieval");
        if (r.contains("k")) config.k = r.at("k").get<int>();
        if (config.k < 1) {
            throw Error(Errc::ConfigError, "retrieval.k must be >= 1");
        }
        if (r.contains("mode")) {
            config.mode = generation_mode_from_name(r.at("mode").get<std::string>());
        }
        if (r.contains("criteria")) {
            const json& criteria = r.at("criteria");
            if (!criteria.is_array() || criteria.empty()) {
                throw Error(Errc::ConfigError,
                            "retrieval.criteria must be a non-empty array");
            }
            config.criteria.clear();
            for (const auto& item : criteria) {
                if (!item.is_string()) {
                    throw Error(Errc::ConfigError,
                                "retrieval.criteria entries must be names i..v");
                }
                config.criteria.insert(criterion_from_name(item.get<std::string>()));
            }
        }
    }

    if (root.contains("paths")) {
        const json& p = root.at("paths");
        if (!p.is_object()) {
            throw Error(Errc::ConfigError, "paths must be an object");
        }
        reject_unknown_keys(
            p, {"extract_template", "generate_template", "judge_template", "cache_dir"},
            "paths");
        if (p.contains("extract_template")) {
            config.extract_template = read_text_file(
                resolve_existing_path(p.at("extract_template"), base, "paths.extract_template"));
        }
        if (p.contains("generate_template")) {
            config.generate_template = read_text_file(resolve_existing_path(
                p.at("generate_template"), base, "paths.generate_template"));
        }
        if (p.contains("judge_template")) {
            config.judge_template = read_text_file(
                resolve_existing_path(p.at("judge_template"), base, "paths.judge_template"));
        }
        if (p.contains("cache_dir")) {
            if (!p.at("cache_dir").is_string()) {
                throw Error(Errc::ConfigError, "paths.cache_dir must be a string path");
            }
            fs::path dir = p.at("cache_dir").get<std::string>();
            if (dir.is_relative()) dir = base / dir;
            config.cache_dir = dir.string();
        }
    }

    return config;
}

std::string discover_config_path(const std::string& explicit_path) {
    if (!explicit_path.empty()) {
        if (!fs::exists(explicit_path)) {
            throw Error(Errc::ConfigError, "config file not found: " + explicit_path);
        }
        return explicit_path;
    }
    if (fs::exists("hyperrag.json")) {
        return "hyperrag.json";
    }
    throw Error(Errc::ConfigError,
                "no config found: pass --config or create ./hyperrag.json");
}

AppConfig default_mock_config() {
    AppConfig config;
    for (const char* kind : {"chat", "embed_text", "embed_image", "ocr", "caption"}) {
        ProviderConfig p;
        p.kind = provider_kind_from_name(kind);
        p.endpoint = "mock";
        config.providers.emplace(kind, p);
    }
    return config;
}

}  // namespace hyperrag
