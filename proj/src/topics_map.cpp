#include "vcr/topics_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace vcr {

using nlohmann::json;

const TopicNode* TopicsMapModel::find(std::string_view name) const {
    for (const auto& n : nodes)
        if (n.name == name) return &n;
    return nullptr;
}

double radius_hint(std::size_t frequency, std::size_t min_frequency, std::size_t max_frequency) {
    if (max_frequency <= min_frequency) return (kMinRadius + kMaxRadius) / 2.0;
    double lo = std::sqrt(static_cast<double>(min_frequency));
    double hi = std::sqrt(static_cast<double>(max_frequency));
    double t = (std::sqrt(static_cast<double>(frequency)) - lo) / (hi - lo);
    return kMinRadius + (kMaxRadius - kMinRadius) * t;
}

namespace {

std::vector<double> unit_normalized(const EmbeddingVector& v) {
    double norm = 0.0;
    for (float f : v.values) norm += static_cast<double>(f) * f;
    norm = std::sqrt(norm);
    std::vector<double> out(v.values.size(), 0.0);
    if (norm > 0.0)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = v.values[i] / norm;
    return out;
}

void assign_radii(std::vector<TopicNode>& nodes) {
    if (nodes.empty()) return;
    auto [lo, hi] = std::minmax_element(nodes.begin(), nodes.end(),
                                        [](const auto& a, const auto& b) { return a.frequency < b.frequency; });
    const std::size_t fmin = lo->frequency, fmax = hi->frequency;
    for (auto& n : nodes) n.radius_hint = radius_hint(n.frequency, fmin, fmax);
}

std::vector<EmbeddingVector> embed_names(const std::vector<TopicNode>& nodes, EmbeddingProvider& provider) {
    std::vector<EmbeddingVector> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back(embed_pooled(provider, n.name));
    return out;
}

} // namespace

TopicsMapModel build_map(const std::vector<TopicCount>& ontology, EmbeddingProvider& provider,
                         const MapParams& params) {
    TopicsMapModel map;
    map.seed = params.seed;
    map.provider_id = provider.profile().provider_id;
    if (ontology.empty()) return map;
    for (const auto& t : ontology) map.nodes.push_back({t.name, t.count, 0.0, 0.0, 0.0});
    map.name_embeddings = embed_names(map.nodes, provider);
    assign_radii(map.nodes);

    const std::size_t n = map.nodes.size();
    if (n < 4) {
        for (std::size_t i = 0; i < n; ++i) {
            double angle = n == 1 ? 0.0 : 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
            map.nodes[i].x = n == 1 ? 0.0 : std::cos(angle);
            map.nodes[i].y = n == 1 ? 0.0 : std::sin(angle);
        }
        return map;
    }

    std::vector<std::vector<double>> vectors;
    vectors.reserve(n);
    for (const auto& e : map.name_embeddings) vectors.push_back(unit_normalized(e));
    TsneParams tp;
    tp.seed = params.seed;
    tp.perplexity = params.perplexity.value_or(default_perplexity(n));
    tp.iterations = params.iterations;
    tp.learning_rate = params.learning_rate;
    tp.kl_every = 0;
    auto projected = project_tsne(vectors, tp);
    for (std::size_t i = 0; i < n; ++i) {
        map.nodes[i].x = projected.positions[i].x;
        map.nodes[i].y = projected.positions[i].y;
    }
    return map;
}

std::map<std::string, double> RelevanceOverlay::by_name(const TopicsMapModel& map) const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < map.nodes.size() && i < relevance.size(); ++i) out[map.nodes[i].name] = relevance[i];
    return out;
}

RelevanceOverlay relevance_overlay(const TopicsMapModel& map, const GeneratedQuery& query, std::string query_id) {
    if (query.embedding.provider_id != map.provider_id)
        throw ProviderMismatch("relevance_overlay: query embedded by '" + query.embedding.provider_id +
                               "' but map built with '" + map.provider_id + "'");
    RelevanceOverlay overlay;
    overlay.query_id = std::move(query_id);
    overlay.raw.reserve(map.name_embeddings.size());
    for (const auto& e : map.name_embeddings) overlay.raw.push_back(cosine(query.embedding, e));
    if (overlay.raw.empty()) return overlay;
    auto [lo, hi] = std::minmax_element(overlay.raw.begin(), overlay.raw.end());
    const double min = *lo, max = *hi;
    overlay.relevance.reserve(overlay.raw.size());
    for (double r : overlay.raw) overlay.relevance.push_back(max > min ? (r - min) / (max - min) : 0.5);
    return overlay;
}

json map_to_json(const TopicsMapModel& map) {
    json nodes = json::array();
    for (const auto& n : map.nodes)
        nodes.push_back(
            {{"name", n.name}, {"frequency", n.frequency}, {"x", n.x}, {"y", n.y}, {"radius_hint", n.radius_hint}});
    return {{"seed", map.seed}, {"provider_id", map.provider_id}, {"nodes", std::move(nodes)}};
}

TopicsMapModel map_from_json(const json& doc, EmbeddingProvider& provider) {
    TopicsMapModel map;
    try {
        map.seed = doc.at("seed").get<std::uint64_t>();
        map.provider_id = doc.at("provider_id").get<std::string>();
        for (const auto& n : doc.at("nodes"))
            map.nodes.push_back({n.at("name").get<std::string>(), n.at("frequency").get<std::size_t>(),
                                 n.at("x").get<double>(), n.at("y").get<double>(), n.at("radius_hint").get<double>()});
    } catch (const json::exception& e) {
        throw ParseError(std::string("map JSON: ") + e.what());
    }
    if (map.provider_id != provider.profile().provider_id)
        throw ProviderMismatch("map was built with '" + map.provider_id + "' but provider is '" +
                               provider.profile().provider_id + "'");
    map.name_embeddings = embed_names(map.nodes, provider);
    return map;
}

void save_map(const TopicsMapModel& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << map_to_json(map).dump(1) << '\n';
}

TopicsMapModel load_map(const std::filesystem::path& path, EmbeddingProvider& provider) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open map " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return map_from_json(doc, provider);
}

} // namespace vcr
