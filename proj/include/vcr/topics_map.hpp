#pragma once

#include "vcr/embedding.hpp"
#include "vcr/insights.hpp"
#include "vcr/query_generation.hpp"
#include "vcr/tsne.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vcr {

struct TopicNode {
    std::string name;
    std::size_t frequency = 0;
    double x = 0.0;
    double y = 0.0;
    double radius_hint = 0.0;

    bool operator==(const TopicNode&) const = default;
};

// Positions are frozen: they depend only on the ontology, the provider and
// the seed, never on queries.
struct TopicsMapModel {
    std::vector<TopicNode> nodes;
    std::uint64_t seed = 0;
    std::string provider_id;
    std::vector<EmbeddingVector> name_embeddings; // parallel to nodes

    const TopicNode* find(std::string_view name) const;
};

struct MapParams {
    std::uint64_t seed = 42;
    std::optional<double> perplexity; // default_perplexity(n) when unset
    std::size_t iterations = 1000;
    std::optional<double> learning_rate; // n / 12 when unset
};

inline constexpr double kMinRadius = 4.0;
inline constexpr double kMaxRadius = 40.0;

// sqrt(frequency) mapped linearly onto [kMinRadius, kMaxRadius] over the
// ontology's frequency range; the midpoint when all frequencies are equal.
double radius_hint(std::size_t frequency, std::size_t min_frequency, std::size_t max_frequency);

// Embeds every topic name and lays the names out with t-SNE. Ontologies with
// fewer than 4 topics (too small for t-SNE) are placed on a unit circle.
TopicsMapModel build_map(const std::vector<TopicCount>& ontology, EmbeddingProvider& provider,
                         const MapParams& params = {});

struct RelevanceOverlay {
    std::string query_id;
    std::vector<double> raw;       // cosine(query, topic name), parallel to nodes
    std::vector<double> relevance; // min-max normalized to [0, 1]; all-equal -> 0.5

    std::map<std::string, double> by_name(const TopicsMapModel& map) const;
};

RelevanceOverlay relevance_overlay(const TopicsMapModel& map, const GeneratedQuery& query,
                                   std::string query_id = {});

// {"seed","provider_id","nodes":[{"name","frequency","x","y","radius_hint"}]}
nlohmann::json map_to_json(const TopicsMapModel& map);

// Restores positions verbatim and re-embeds the names with `provider`, which
// must match the map's provider id.
TopicsMapModel map_from_json(const nlohmann::json& doc, EmbeddingProvider& provider);

void save_map(const TopicsMapModel& map, const std::filesystem::path& path);
TopicsMapModel load_map(const std::filesystem::path& path, EmbeddingProvider& provider);

} // namespace vcr
