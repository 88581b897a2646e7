#include "vcr/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace vcr {

using nlohmann::json;

namespace {

HttpResult json_result(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResult error_result(int status, const std::string& message) {
    return json_result(status, {{"error", message}});
}

HttpResult not_ready() { return error_result(503, "index is loading"); }

std::vector<std::string> string_list(const json& doc, const char* key) {
    if (!doc.contains(key) || doc[key].is_null()) return {};
    if (!doc[key].is_array()) throw ValidationError(std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : doc[key]) {
        if (!item.is_string()) throw ValidationError(std::string("'") + key + "' must be an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

json optional_json(const auto& value) { return value ? json(*value) : json(nullptr); }

} // namespace

void Service::load(ServiceState state) {
    if (state.ontology_body.empty()) state.ontology_body = map_to_json(state.map).dump();
    auto ready = std::make_shared<const ServiceState>(std::move(state));
    std::lock_guard lock(mutex_);
    state_ = std::move(ready);
}

std::shared_ptr<const ServiceState> Service::snapshot() const {
    std::lock_guard lock(mutex_);
    return state_;
}

bool Service::loaded() const { return snapshot() != nullptr; }

HttpResult Service::healthz() const {
    auto s = snapshot();
    if (!s) return json_result(200, {{"status", "loading"}, {"index_n", nullptr}, {"index_m", nullptr}, {"provider_id", nullptr}});
    return json_result(200, {{"status", "ok"},
                             {"index_n", s->index.size()},
                             {"index_m", s->index.dimension()},
                             {"provider_id", s->index.provider_id()}});
}

HttpResult Service::ontology() const {
    auto s = snapshot();
    if (!s) return not_ready();
    return {200, s->ontology_body, "application/json"};
}

HttpResult Service::search(const std::string& request_body) const {
    auto s = snapshot();
    if (!s) return not_ready();

    TopicSelection selection;
    std::size_t k = 5;
    try {
        json req = json::parse(request_body);
        if (!req.is_object()) return error_result(400, "request body must be a JSON object");
        selection.ontology_topics = string_list(req, "topics");
        selection.custom_terms = string_list(req, "custom_terms");
        if (req.contains("k")) {
            if (!req["k"].is_number_integer() || req["k"].get<long long>() < 1)
                return error_result(400, "'k' must be an integer >= 1");
            k = req["k"].get<std::size_t>();
        }
    } catch (const json::exception& e) {
        return error_result(400, std::string("malformed request: ") + e.what());
    } catch (const ValidationError& e) {
        return error_result(400, e.what());
    }
    if (selection.empty()) return error_result(400, "select at least one topic or custom term");

    try {
        auto query = generate_query(selection, *s->provider, s->llm.get(), s->domain_label);
        auto hits = s->index.size() > 0 ? search_videos(s->index, query.embedding, k, s->aggregation)
                                        : std::vector<VideoHit>{};
        auto overlay = relevance_overlay(s->map, query);

        json results = json::array();
        for (const auto& hit : hits) {
            const auto& ref = s->index.sidecar()[hit.best_row];
            json r{{"video_id", hit.video_id},
                   {"score", hit.score},
                   {"best_segment", {{"segment_idx", hit.best_segment_idx}, {"start_s", ref.start_s}, {"end_s", ref.end_s}}}};
            if (const auto* v = s->archive.find(hit.video_id)) {
                r["title"] = v->title;
                r["author"] = v->author;
                r["event_date"] = optional_json(v->event_date);
                r["views"] = optional_json(v->views);
                r["likes"] = optional_json(v->likes);
                r["thumbnail_url"] = optional_json(v->thumbnail_url);
                r["player_url"] = optional_json(v->player_url);
            } else {
                r["title"] = hit.video_id;
                r["author"] = "";
                r["event_date"] = nullptr;
                r["views"] = nullptr;
                r["likes"] = nullptr;
            }
            results.push_back(std::move(r));
        }
        json relevance = json::object();
        for (const auto& [name, value] : overlay.by_name(s->map)) relevance[name] = value;
        return json_result(200, {{"query_text", query.query_text},
                                 {"query_source", to_string(query.source)},
                                 {"results", std::move(results)},
                                 {"topic_relevance", std::move(relevance)}});
    } catch (const std::exception& e) {
        spdlog::error("search failed: {}", e.what());
        return error_result(500, e.what());
    }
}

HttpResult Service::video(const std::string& video_id, bool include_insights) const {
    auto s = snapshot();
    if (!s) return not_ready();
    const auto* v = s->archive.find(video_id);
    if (!v) return error_result(404, "unknown video '" + video_id + "'");
    json body = to_json(*v, include_insights);
    if (include_insights) body["insight_count"] = v->insights.size();
    return json_result(200, body);
}

void Service::mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir) {
    auto reply = [](httplib::Response& res, const HttpResult& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, healthz()); });
    server.Get("/api/ontology", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, ontology()); });
    server.Post("/api/search",
                [this, reply](const httplib::Request& req, httplib::Response& res) { reply(res, search(req.body)); });
    server.Get(R"(/api/videos/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
        bool insights = req.has_param("include") && req.get_param_value("include") == "insights";
        reply(res, video(req.matches[1].str(), insights));
    });
    if (static_dir && !server.set_mount_point("/", static_dir->string()))
        spdlog::warn("static UI directory {} not found; serving the API only", static_dir->string());
}

ServiceState load_service_state(const ServiceConfig& config) {
    ServiceState state;
    state.index = load_index(config.index_path);
    state.provider = provider_for_index(state.index.provider_id(), config.provider);
    if (config.archive_path) state.archive = load_archive(*config.archive_path);
    if (config.map_path) {
        state.map = load_map(*config.map_path, *state.provider);
    } else if (!state.index.ontology().empty()) {
        MapParams params;
        params.seed = config.map_seed;
        state.map = build_map(state.index.ontology(), *state.provider, params);
    } else {
        state.map.provider_id = state.index.provider_id();
        state.map.seed = config.map_seed;
    }
    state.llm = make_llm_client(config.llm);
    state.domain_label = config.domain_label;
    state.aggregation = config.aggregation;
    return state;
}

} // namespace vcr
