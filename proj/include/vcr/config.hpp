#pragma once

#include "vcr/embedding.hpp"
#include "vcr/query_generation.hpp"
#include "vcr/vector_index.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

namespace vcr {

struct ProviderSettings {
    std::string kind = "mock";   // "mock" | "remote"
    std::size_t dimension = 1536;
    std::string tokenizer_profile = "default";
    std::size_t window_tokens = 512;
    std::string endpoint;        // remote; falls back to VCR_EMBED_ENDPOINT
    std::string model = "text-embedding-ada-002";
    std::size_t batch_size = 64;
    std::ptrdiff_t max_in_flight = 4;
    std::optional<std::filesystem::path> cache_dir;
};

struct LlmSettings {
    std::string endpoint; // falls back to VCR_LLM_ENDPOINT; no endpoint = template only
    std::string model = "gpt-4";
    std::optional<std::filesystem::path> cache_dir;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path index_path = "index.vcr";
    std::optional<std::filesystem::path> map_path;
    std::optional<std::filesystem::path> archive_path;
    std::optional<std::filesystem::path> static_dir;
    std::uint64_t map_seed = 42;
    ProviderSettings provider;
    LlmSettings llm;
    std::string domain_label = std::string(kDefaultDomainLabel);
    VideoAggregation aggregation = VideoAggregation::Max;
};

ProviderSettings provider_settings_from_json(const nlohmann::json& doc);

// JSON config file; VCR_PORT and VCR_INDEX_PATH override the file. Relative
// paths are resolved against the current directory.
ServiceConfig load_service_config(const std::filesystem::path& path);
ServiceConfig service_config_from_json(const nlohmann::json& doc);
void apply_env_overrides(ServiceConfig& config);

std::shared_ptr<EmbeddingProvider> make_provider(const ProviderSettings& settings);

// Rebuilds the provider an index was built with from its provider id
// ("mock-<M>[-<tokenizer>]" or "remote:<model>"), taking remote transport
// details from `settings`.
std::shared_ptr<EmbeddingProvider> provider_for_index(const std::string& provider_id,
                                                      const ProviderSettings& settings = {});

// nullptr when no endpoint is configured.
std::shared_ptr<LlmClient> make_llm_client(const LlmSettings& settings);

} // namespace vcr
