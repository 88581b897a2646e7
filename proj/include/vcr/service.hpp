#pragma once

#include "vcr/config.hpp"
#include "vcr/insights.hpp"
#include "vcr/query_generation.hpp"
#include "vcr/topics_map.hpp"
#include "vcr/vector_index.hpp"

#include <memory>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace vcr {

struct HttpResult {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

struct ServiceState {
    IndexMatrix index;
    Archive archive; // metadata; may be empty when no archive is configured
    TopicsMapModel map;
    std::shared_ptr<EmbeddingProvider> provider;
    std::shared_ptr<LlmClient> llm; // optional
    std::string domain_label = std::string(kDefaultDomainLabel);
    VideoAggregation aggregation = VideoAggregation::Max;
    std::string ontology_body; // pre-rendered so every response is byte-identical
};

// Request handling over an immutable loaded state. Handlers are callable
// directly (tests) or through mount() on an httplib server. Until load() is
// called every /api endpoint answers 503.
class Service {
public:
    void load(ServiceState state);
    bool loaded() const;

    HttpResult healthz() const;
    HttpResult ontology() const;
    HttpResult search(const std::string& request_body) const;
    HttpResult video(const std::string& video_id, bool include_insights) const;

    void mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir = std::nullopt);

private:
    std::shared_ptr<const ServiceState> snapshot() const;

    mutable std::mutex mutex_;
    std::shared_ptr<const ServiceState> state_;
};

// Loads index, archive metadata and map (building the map when no map file
// is configured) as described by the config.
ServiceState load_service_state(const ServiceConfig& config);

} // namespace vcr
