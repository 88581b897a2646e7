#include "synthetic.hpp"
#include "vcr/topics_map.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vcr;
using namespace vcr::testing;

namespace {

std::vector<TopicCount> ontology(std::initializer_list<std::pair<const char*, std::size_t>> items) {
    std::vector<TopicCount> out;
    for (auto [name, count] : items) out.push_back({name, count});
    return out;
}

double dist(const TopicNode& a, const TopicNode& b) { return std::hypot(a.x - b.x, a.y - b.y); }

} // namespace

TEST(RadiusHint, MonotoneAndBounded) {
    EXPECT_DOUBLE_EQ(radius_hint(10, 10, 1215), kMinRadius);
    EXPECT_DOUBLE_EQ(radius_hint(1215, 10, 1215), kMaxRadius);
    EXPECT_DOUBLE_EQ(radius_hint(7, 7, 7), (kMinRadius + kMaxRadius) / 2);
    double last = 0;
    for (std::size_t f = 10; f <= 1215; f += 5) {
        double r = radius_hint(f, 10, 1215);
        EXPECT_GT(r, last);
        last = r;
    }
}

TEST(BuildMap, SmallOntologiesUseCircle) {
    MockProvider p(64);
    auto one = build_map(ontology({{"Solo", 3}}), p);
    ASSERT_EQ(one.nodes.size(), 1u);
    EXPECT_EQ(one.nodes[0].x, 0.0);
    auto three = build_map(ontology({{"A", 1}, {"B", 2}, {"C", 3}}), p);
    ASSERT_EQ(three.nodes.size(), 3u);
    for (const auto& n : three.nodes) EXPECT_NEAR(std::hypot(n.x, n.y), 1.0, 1e-12);
    EXPECT_TRUE(build_map({}, p).nodes.empty());
}

TEST(BuildMap, DeterministicPerSeed) {
    MockProvider p(256);
    std::vector<TopicCount> topics;
    for (int i = 0; i < 15; ++i) topics.push_back({"topic number " + std::to_string(i), std::size_t(10 + i)});
    MapParams params;
    params.iterations = 300;
    auto a = build_map(topics, p, params);
    auto b = build_map(topics, p, params);
    EXPECT_EQ(a.nodes, b.nodes);
    params.seed = 7;
    auto c = build_map(topics, p, params);
    EXPECT_NE(a.nodes, c.nodes);
    ASSERT_EQ(a.nodes.size(), 15u);
    EXPECT_EQ(a.nodes[3].name, "topic number 3");
    EXPECT_EQ(a.nodes[3].frequency, 13u);
}

TEST(BuildMap, CloserNamesLandCloser) {
    // "Law" and "Policy" share context tokens; "Biology" shares none with them.
    MockProvider p(512);
    auto topics = ontology({{"law policy government", 20},
                            {"policy government rights", 20},
                            {"biology cells genes", 20},
                            {"cells genes evolution", 20},
                            {"ocean climate water", 20},
                            {"climate water ice", 20},
                            {"music sound rhythm", 20},
                            {"sound rhythm dance", 20}});
    const std::size_t law = 0, policy = 1, biology = 2;
    auto emb = [&](std::size_t i) { return p.embed(topics[i].name); };
    ASSERT_GT(cosine(emb(law), emb(policy)), cosine(emb(law), emb(biology)));

    int agree = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        MapParams params;
        params.seed = seed;
        auto map = build_map(topics, p, params);
        agree += dist(map.nodes[law], map.nodes[policy]) < dist(map.nodes[law], map.nodes[biology]);
    }
    EXPECT_GE(agree, 16);
}

TEST(RelevanceOverlay, SingleTopicQueryScoresItselfHighest) {
    MockProvider p(1536);
    auto topics = ontology({{"Science", 30}, {"Law", 20}, {"Music", 15}, {"Ocean", 12}, {"Design", 11}});
    MapParams params;
    params.iterations = 250;
    auto map = build_map(topics, p, params);
    for (const auto& t : topics) {
        auto q = generate_query({{t.name}, {}}, p);
        auto overlay = relevance_overlay(map, q, "q");
        auto best = std::max_element(overlay.raw.begin(), overlay.raw.end()) - overlay.raw.begin();
        EXPECT_EQ(map.nodes[std::size_t(best)].name, t.name);
        EXPECT_DOUBLE_EQ(overlay.by_name(map).at(t.name), 1.0);
        EXPECT_DOUBLE_EQ(*std::min_element(overlay.relevance.begin(), overlay.relevance.end()), 0.0);
    }
}

TEST(RelevanceOverlay, AllEqualIsHalfAndScalingInvariant) {
    MockProvider p(64);
    auto map = build_map(ontology({{"alpha", 2}, {"beta", 2}}), p);
    GeneratedQuery q;
    q.embedding = EmbeddingVector{std::vector<float>(64, 0.0f), p.profile().provider_id};
    auto overlay = relevance_overlay(map, q);
    EXPECT_EQ(overlay.relevance, (std::vector<double>{0.5, 0.5}));

    auto map5 = build_map(ontology({{"alpha", 1}, {"beta", 2}, {"gamma", 3}, {"delta", 4}, {"alpha beta", 5}}), p,
                          {42, std::nullopt, 250, 200.0});
    auto base = generate_query({{"alpha"}, {"gamma"}}, p);
    auto scaled = base;
    for (auto& x : scaled.embedding.values) x *= 3.5f;
    auto a = relevance_overlay(map5, base), b = relevance_overlay(map5, scaled);
    for (std::size_t i = 0; i < a.relevance.size(); ++i) EXPECT_NEAR(a.relevance[i], b.relevance[i], 1e-9);

    GeneratedQuery other;
    other.embedding = EmbeddingVector{std::vector<float>(64, 1.0f), "mock-128"};
    EXPECT_THROW(relevance_overlay(map, other), ProviderMismatch);
}

TEST(MapPersistence, PositionsFrozenAcrossReload) {
    MockProvider p(128);
    std::vector<TopicCount> topics;
    for (int i = 0; i < 9; ++i) topics.push_back({"t" + std::to_string(i), std::size_t(10 + 3 * i)});
    auto map = build_map(topics, p, {42, std::nullopt, 300, 200.0});
    TempDir dir;
    save_map(map, dir / "map.json");
    auto loaded = load_map(dir / "map.json", p);
    EXPECT_EQ(loaded.nodes, map.nodes);
    EXPECT_EQ(loaded.seed, 42u);
    EXPECT_EQ(loaded.name_embeddings.size(), 9u);

    for (int i = 0; i < 5; ++i) relevance_overlay(loaded, generate_query({{"t1"}, {}}, p));
    EXPECT_EQ(loaded.nodes, map.nodes);

    MockProvider other(64);
    EXPECT_THROW(load_map(dir / "map.json", other), ProviderMismatch);
}
