#include "vcr/config.hpp"

#include "vcr/remote_provider.hpp"

#include <cstdlib>
#include <fstream>

namespace vcr {

using nlohmann::json;

ProviderSettings provider_settings_from_json(const json& doc) {
    ProviderSettings s;
    s.kind = doc.value("kind", s.kind);
    s.dimension = doc.value("dimension", s.dimension);
    s.tokenizer_profile = doc.value("tokenizer_profile", s.tokenizer_profile);
    s.window_tokens = doc.value("window_tokens", s.window_tokens);
    s.endpoint = doc.value("endpoint", s.endpoint);
    s.model = doc.value("model", s.model);
    s.batch_size = doc.value("batch_size", s.batch_size);
    s.max_in_flight = doc.value("max_in_flight", s.max_in_flight);
    if (doc.contains("cache_dir")) s.cache_dir = doc["cache_dir"].get<std::string>();
    return s;
}

ServiceConfig service_config_from_json(const json& doc) {
    ServiceConfig c;
    try {
        c.host = doc.value("host", c.host);
        c.port = doc.value("port", c.port);
        if (doc.contains("index_path")) c.index_path = doc["index_path"].get<std::string>();
        if (doc.contains("map_path")) c.map_path = doc["map_path"].get<std::string>();
        if (doc.contains("archive_path")) c.archive_path = doc["archive_path"].get<std::string>();
        if (doc.contains("static_dir")) c.static_dir = doc["static_dir"].get<std::string>();
        c.map_seed = doc.value("map_seed", c.map_seed);
        if (doc.contains("provider")) c.provider = provider_settings_from_json(doc["provider"]);
        if (doc.contains("llm")) {
            const auto& l = doc["llm"];
            c.llm.endpoint = l.value("endpoint", c.llm.endpoint);
            c.llm.model = l.value("model", c.llm.model);
            if (l.contains("cache_dir")) c.llm.cache_dir = l["cache_dir"].get<std::string>();
        }
        if (doc.contains("query")) c.domain_label = doc["query"].value("domain_label", c.domain_label);
        if (doc.contains("search")) {
            auto agg = doc["search"].value("aggregation", std::string("max"));
            if (agg == "max")
                c.aggregation = VideoAggregation::Max;
            else if (agg == "mean")
                c.aggregation = VideoAggregation::Mean;
            else
                throw ValidationError("config: search.aggregation must be 'max' or 'mean'");
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return c;
}

void apply_env_overrides(ServiceConfig& config) {
    if (const char* port = std::getenv("VCR_PORT")) {
        try {
            config.port = std::stoi(port);
        } catch (const std::exception&) {
            throw ValidationError(std::string("VCR_PORT is not a port number: ") + port);
        }
    }
    if (const char* index = std::getenv("VCR_INDEX_PATH")) config.index_path = index;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    auto config = service_config_from_json(doc);
    apply_env_overrides(config);
    return config;
}

std::shared_ptr<EmbeddingProvider> make_provider(const ProviderSettings& settings) {
    std::shared_ptr<EmbeddingProvider> provider;
    if (settings.kind == "mock") {
        provider = std::make_shared<MockProvider>(settings.dimension, make_tokenizer(settings.tokenizer_profile),
                                                  settings.window_tokens);
    } else if (settings.kind == "remote") {
        auto rc = RemoteConfig::from_env();
        if (!settings.endpoint.empty()) rc.endpoint = settings.endpoint;
        rc.model = settings.model;
        rc.dimension = settings.dimension;
        rc.window_tokens = settings.window_tokens;
        rc.batch_size = settings.batch_size;
        rc.max_in_flight = settings.max_in_flight;
        provider = std::make_shared<RemoteProvider>(std::move(rc));
    } else {
        throw ValidationError("unknown provider kind '" + settings.kind + "' (expected mock or remote)");
    }
    if (settings.cache_dir)
        provider = std::make_shared<CachingProvider>(provider, std::make_shared<EmbeddingCache>(*settings.cache_dir));
    return provider;
}

std::shared_ptr<EmbeddingProvider> provider_for_index(const std::string& provider_id,
                                                      const ProviderSettings& settings) {
    ProviderSettings s = settings;
    if (is_mock_provider_id(provider_id)) {
        std::string rest = provider_id.substr(5);
        auto dash = rest.find('-');
        s.kind = "mock";
        s.tokenizer_profile = dash == std::string::npos ? "default" : rest.substr(dash + 1);
        try {
            s.dimension = std::stoul(rest.substr(0, dash));
        } catch (const std::exception&) {
            throw ValidationError("malformed mock provider id '" + provider_id + "'");
        }
        s.cache_dir.reset();
    } else if (provider_id.starts_with("remote:")) {
        s.kind = "remote";
        s.model = provider_id.substr(7);
    } else {
        throw ValidationError("unknown provider id '" + provider_id + "'");
    }
    auto provider = make_provider(s);
    if (provider->profile().provider_id != provider_id)
        throw ProviderMismatch("rebuilt provider '" + provider->profile().provider_id + "' does not match index '" +
                               provider_id + "'");
    return provider;
}

std::shared_ptr<LlmClient> make_llm_client(const LlmSettings& settings) {
    auto config = LlmConfig::from_env();
    if (!settings.endpoint.empty()) config.endpoint = settings.endpoint;
    if (config.endpoint.empty()) return nullptr;
    config.model = settings.model;
    std::shared_ptr<LlmClient> client = std::make_shared<HttpLlmClient>(std::move(config));
    if (settings.cache_dir) client = std::make_shared<CachedLlmClient>(client, *settings.cache_dir);
    return client;
}

} // namespace vcr
