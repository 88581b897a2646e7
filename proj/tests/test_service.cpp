#include "synthetic.hpp"
#include "vcr/config.hpp"
#include "vcr/fusion.hpp"
#include "vcr/service.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

using namespace vcr;
using namespace vcr::testing;
using nlohmann::json;

namespace {

Archive small_archive() {
    std::vector<VideoRecord> videos;
    videos.push_back(make_video("sci", {"Science", "Biology"},
                                {insight(Source::ASR, "cells and genes shape evolution in science labs", 0, 5),
                                 insight(Source::OCR, "BIOLOGY 101", 1, 3)}));
    videos.push_back(make_video("law", {"Law", "Policy"},
                                {insight(Source::ASR, "courts and policy decide law in every land", 0, 6)}));
    videos.push_back(make_video("art", {"Design"}, {insight(Source::ASR, "design shapes how we see art", 0, 4),
                                                     insight(Source::CAPTION, "a person on a stage", 0, 4)}));
    videos[0].views = 1200;
    videos[0].likes = 40;
    videos[0].event_date = "2018-11-02";
    videos[0].player_url = "https://example.org/play/sci";
    return make_archive(std::move(videos));
}

ServiceState make_state() {
    ServiceState state;
    state.archive = small_archive();
    state.provider = std::make_shared<MockProvider>(256);
    state.index = IndexMatrix(state.provider->profile().provider_id, 256);
    for (const auto& v : state.archive.videos)
        for (const auto& s : fuse_video(v))
            state.index.add({s.video_id, s.segment_idx, s.start_s, s.end_s}, embed_pooled(*state.provider, s.render()));
    state.index.set_ontology(state.archive.ontology);
    state.map = build_map(state.archive.ontology, *state.provider, MapParams{});
    return state;
}

} // namespace

TEST(Service, BeforeLoad) {
    Service service;
    auto h = service.healthz();
    EXPECT_EQ(h.status, 200);
    EXPECT_EQ(json::parse(h.body).at("status"), "loading");
    EXPECT_EQ(service.ontology().status, 503);
    EXPECT_EQ(service.search(R"({"topics":["Law"]})").status, 503);
    EXPECT_EQ(service.video("law", false).status, 503);
}

TEST(Service, HealthAfterLoad) {
    Service service;
    service.load(make_state());
    auto h = json::parse(service.healthz().body);
    EXPECT_EQ(h.at("status"), "ok");
    EXPECT_EQ(h.at("index_m"), 256);
    EXPECT_EQ(h.at("index_n"), 3);
    EXPECT_EQ(h.at("provider_id"), "mock-256");
}

TEST(Service, OntologyIsStable) {
    Service service;
    auto state = make_state();
    const auto nodes = state.map.nodes.size();
    service.load(std::move(state));
    auto a = service.ontology(), b = service.ontology();
    EXPECT_EQ(a.status, 200);
    EXPECT_EQ(a.body, b.body);
    auto doc = json::parse(a.body);
    EXPECT_EQ(doc.at("nodes").size(), nodes);
    EXPECT_EQ(doc.at("nodes").size(), small_archive().ontology.size());
    for (const auto& n : doc.at("nodes")) {
        EXPECT_TRUE(n.contains("x"));
        EXPECT_TRUE(n.contains("radius_hint"));
        EXPECT_TRUE(n.contains("frequency"));
    }
}

TEST(Service, SearchValidation) {
    Service service;
    service.load(make_state());
    EXPECT_EQ(service.search("{}").status, 400);
    EXPECT_EQ(service.search(R"({"topics":[],"custom_terms":[]})").status, 400);
    EXPECT_EQ(service.search("not json").status, 400);
    EXPECT_EQ(service.search(R"({"topics":"Law"})").status, 400);
    EXPECT_EQ(service.search(R"({"topics":["Law"],"k":0})").status, 400);
    EXPECT_EQ(service.search(R"({"topics":["Law"],"k":"3"})").status, 400);
}

TEST(Service, SearchResponseShape) {
    Service service;
    service.load(make_state());
    auto r = service.search(R"({"topics":["Science"],"custom_terms":["genes"],"k":5})");
    ASSERT_EQ(r.status, 200) << r.body;
    auto doc = json::parse(r.body);
    EXPECT_EQ(doc.at("query_source"), "TEMPLATE");
    EXPECT_NE(doc.at("query_text").get<std::string>().find("genes"), std::string::npos);
    const auto& results = doc.at("results");
    ASSERT_EQ(results.size(), 3u);
    EXPECT_EQ(results[0].at("video_id"), "sci");
    EXPECT_EQ(results[0].at("views"), 1200);
    EXPECT_EQ(results[0].at("event_date"), "2018-11-02");
    EXPECT_EQ(results[0].at("player_url"), "https://example.org/play/sci");
    EXPECT_TRUE(results[0].at("best_segment").contains("start_s"));
    for (std::size_t i = 1; i < results.size(); ++i)
        EXPECT_GE(results[i - 1].at("score").get<double>(), results[i].at("score").get<double>());
    const auto& rel = doc.at("topic_relevance");
    EXPECT_EQ(rel.size(), small_archive().ontology.size());
    EXPECT_EQ(rel.at("Science"), 1.0);

    auto again = service.search(R"({"topics":["Science"],"custom_terms":["genes"],"k":5})");
    EXPECT_EQ(again.body, r.body);
    EXPECT_EQ(json::parse(service.search(R"({"topics":["Law"],"k":1})").body).at("results").size(), 1u);
}

TEST(Service, VideoEndpoint) {
    Service service;
    service.load(make_state());
    auto plain = service.video("sci", false);
    ASSERT_EQ(plain.status, 200);
    EXPECT_FALSE(json::parse(plain.body).contains("insights"));
    auto full = json::parse(service.video("sci", true).body);
    EXPECT_EQ(full.at("insight_count"), 2);
    EXPECT_EQ(full.at("insights").size(), 2u);
    EXPECT_EQ(service.video("nope", false).status, 404);
}

TEST(Service, LiveServerConcurrentRequestsMatchSerial) {
    Service service;
    service.load(make_state());
    httplib::Server server;
    service.mount(server);
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");
    EXPECT_EQ(client.Get("/api/videos/nope")->status, 404);
    EXPECT_EQ(client.Get("/api/videos/law?include=insights")->status, 200);
    EXPECT_EQ(client.Options("/api/search")->status, 204);

    const std::vector<std::string> bodies = {R"({"topics":["Science"]})", R"({"topics":["Law"],"k":2})",
                                             R"({"custom_terms":["design art"]})", R"({"topics":["Policy","Biology"]})"};
    std::vector<std::string> serial;
    for (const auto& b : bodies) serial.push_back(service.search(b).body);

    std::vector<std::thread> workers;
    std::vector<std::string> got(bodies.size() * 4);
    for (std::size_t i = 0; i < got.size(); ++i)
        workers.emplace_back([&, i] {
            httplib::Client c("127.0.0.1", port);
            auto res = c.Post("/api/search", bodies[i % bodies.size()], "application/json");
            if (res) got[i] = res->body;
        });
    for (auto& w : workers) w.join();
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], serial[i % bodies.size()]);

    server.stop();
    t.join();
}

TEST(Service, LoadStateFromConfig) {
    TempDir dir;
    auto state = make_state();
    save_index(state.index, dir / "index.vcr");
    save_archive(state.archive, dir / "archive.json");
    ServiceConfig config;
    config.index_path = dir / "index.vcr";
    config.archive_path = dir / "archive.json";
    auto loaded = load_service_state(config);
    EXPECT_EQ(loaded.index, state.index);
    EXPECT_EQ(loaded.map.nodes, state.map.nodes);
    EXPECT_EQ(loaded.provider->profile().provider_id, "mock-256");

    save_map(state.map, dir / "map.json");
    config.map_path = dir / "map.json";
    EXPECT_EQ(load_service_state(config).map.nodes, state.map.nodes);
}
