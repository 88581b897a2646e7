#include "synthetic.hpp"
#include "vcr/evaluation.hpp"
#include "vcr/fusion.hpp"

#include <gtest/gtest.h>
#include <png.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace vcr;
using namespace vcr::testing;

namespace {

IndexMatrix index_archive(const Archive& archive, EmbeddingProvider& provider) {
    IndexMatrix index(provider.profile().provider_id, provider.profile().dimension);
    for (const auto& v : archive.videos)
        for (const auto& s : fuse_video(v, {}, provider.tokenizer()))
            index.add({s.video_id, s.segment_idx, s.start_s, s.end_s}, embed_pooled(provider, s.render()));
    return index;
}

} // namespace

TEST(Metrics, MrrExamples) {
    EXPECT_EQ(mrr(std::vector<std::size_t>{1, 1, 1}), 1.0);
    EXPECT_EQ(mrr(std::vector<std::size_t>{2, 2, 2}), 0.5);
    EXPECT_EQ(mrr(std::vector<std::size_t>{1, 2, 0}), 0.5);
    EXPECT_THROW(mrr(std::vector<std::size_t>{}), PreconditionError);
}

TEST(Metrics, RecallExamples) {
    EXPECT_DOUBLE_EQ(recall_at_k(std::vector<std::size_t>{1, 3, 7}, 3), 2.0 / 3.0);
    EXPECT_EQ(recall_at_k(std::vector<std::size_t>{1, 3, 7}, 7), 1.0);
    EXPECT_EQ(recall_at_k(std::vector<std::size_t>{0, 0}, 10), 0.0);
    EXPECT_THROW(recall_at_k(std::vector<std::size_t>{}, 1), PreconditionError);
    EXPECT_THROW(recall_at_k(std::vector<std::size_t>{1}, 0), PreconditionError);
}

TEST(Metrics, MatchBruteForceOnRandomRanks) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, 60), rank(0, 20);
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::size_t> ranks(len(rng));
        for (auto& r : ranks) r = rank(rng);
        long double rr = 0;
        for (auto r : ranks) rr += r == 0 ? 0.0L : 1.0L / static_cast<long double>(r);
        EXPECT_NEAR(mrr(ranks), static_cast<double>(rr / ranks.size()), 1e-12);
        for (std::size_t k : {1, 3, 5, 10}) {
            std::size_t hit = 0;
            for (auto r : ranks) hit += (r >= 1 && r <= k);
            EXPECT_NEAR(recall_at_k(ranks, k), double(hit) / double(ranks.size()), 1e-12);
        }
        double last = -1;
        for (std::size_t k = 1; k <= 21; ++k) {
            double r = recall_at_k(ranks, k);
            EXPECT_GE(r, last);
            last = r;
        }
    }
}

TEST(Metrics, BoundsWhenAllFound) {
    const std::size_t n = 542;
    std::vector<std::size_t> worst(n, n), best(n, 1);
    EXPECT_NEAR(mrr(worst), 1.0 / 542.0, 1e-15);
    EXPECT_EQ(mrr(best), 1.0);
}

TEST(Queries, LoadValidates) {
    TempDir dir;
    write_file(dir / "q.jsonl",
               "{\"query_id\":\"a\",\"query_text\":\"x\",\"correct_video_id\":\"v\"}\n\n"
               "{\"query_id\":\"b\",\"query_text\":\"y\",\"correct_video_id\":\"w\"}\n");
    auto qs = load_queries(dir / "q.jsonl");
    ASSERT_EQ(qs.size(), 2u);
    EXPECT_EQ(qs[1].correct_video_id, "w");
    save_queries(qs, dir / "r.jsonl");
    EXPECT_EQ(load_queries(dir / "r.jsonl").size(), 2u);

    write_file(dir / "dup.jsonl", "{\"query_id\":\"a\",\"query_text\":\"x\",\"correct_video_id\":\"v\"}\n"
                                  "{\"query_id\":\"a\",\"query_text\":\"y\",\"correct_video_id\":\"w\"}\n");
    EXPECT_THROW(load_queries(dir / "dup.jsonl"), ValidationError);
    write_file(dir / "empty.jsonl", "\n");
    EXPECT_THROW(load_queries(dir / "empty.jsonl"), ValidationError);
    EXPECT_THROW(load_queries(dir / "missing.jsonl"), Error);
}

TEST(RunEval, DisjointCorpusIsPerfect) {
    auto corpus = disjoint_corpus(40, 30, 10, 1);
    MockProvider provider(1536);
    auto index = index_archive(corpus.archive, provider);
    auto queries = self_queries(corpus, 8, 2);
    EvalOptions options;
    options.jobs = 4;
    auto report = run_eval(index, queries, provider, {1, 3, 5, 10}, options);
    EXPECT_EQ(report.Q, 40u);
    EXPECT_EQ(report.mrr, 1.0);
    EXPECT_EQ(report.recall_at.at(1), 1.0);
    ASSERT_TRUE(report.mean_rank.has_value());
    EXPECT_EQ(*report.mean_rank, 1.0);
    for (auto r : report.ranks) EXPECT_EQ(r, 1u);
}

TEST(RunEval, IdentityCorpus) {
    auto corpus = disjoint_corpus(25, 12, 12, 5);
    MockProvider provider(512);
    auto index = index_archive(corpus.archive, provider);
    QuerySet queries;
    for (const auto& v : corpus.archive.videos) queries.push_back({"q-" + v.video_id, v.insights[0].text, v.video_id});
    auto report = run_eval(index, queries, provider, {1});
    for (auto r : report.ranks) EXPECT_EQ(r, 1u);
}

TEST(RunEval, UnfoundAndUnknownQueries) {
    auto corpus = disjoint_corpus(5, 10, 10, 3);
    MockProvider provider(1536);
    auto index = index_archive(corpus.archive, provider);
    QuerySet queries = {{"good", corpus.vocab[2][0], corpus.archive.videos[2].video_id},
                        {"nothing", "zzzunseen yyyunseen", corpus.archive.videos[4].video_id},
                        {"ghost", "anything", "no-such-video"}};
    EvalOptions options;
    options.rank_cutoff = 1;
    auto report = run_eval(index, queries, provider, {1, 3}, options);
    EXPECT_EQ(report.Q, 2u);
    EXPECT_EQ(report.skipped, (std::vector<std::string>{"ghost"}));
    EXPECT_EQ(report.ranks[0], 1u);
    EXPECT_EQ(report.ranks[1], 0u);
    EXPECT_EQ(report.mrr, 0.5);
    EXPECT_EQ(*report.mean_rank, 1.0);

    auto json = report_to_json(report);
    EXPECT_EQ(json.at("Q"), 2);
    EXPECT_EQ(json.at("recall_at").at("1"), 0.5);
    EXPECT_TRUE(json.contains("mean_rank"));

    MockProvider other(64);
    EXPECT_THROW(run_eval(index, queries, other, {1}), ProviderMismatch);
}

TEST(RunEval, MeanRankIsReportedSeparately) {
    // Ranks {1, 4}: MRR 0.625, mean rank 2.5; neither is the other's reciprocal.
    std::vector<std::size_t> ranks = {1, 4};
    EXPECT_EQ(mrr(ranks), 0.625);
    EXPECT_NE(1.0 / mrr(ranks), 2.5);
}

TEST(CorrelationMatrix, HandComputedTwoByTwo) {
    MockProvider provider(1536);
    IndexMatrix index(provider.profile().provider_id, 1536);
    index.add({"va", 0, 0, 1}, provider.embed("apple banana"));
    index.add({"vb", 0, 0, 1}, provider.embed("banana cherry cherry"));
    QuerySet queries = {{"q1", "apple", "va"}, {"q2", "cherry", "vb"}};
    TempDir dir;
    auto m = correlation_matrix(index, queries, provider, dir / "m.csv", dir / "m.png");
    // Disjoint hash buckets assumed; checked here so the expected values hold.
    for (std::string_view a : {"apple", "banana", "cherry"})
        for (std::string_view b : {"apple", "banana", "cherry"}) {
            if (a == b) continue;
            ASSERT_NE(provider.bucket(a), provider.bucket(b));
        }
    EXPECT_NEAR(m.at(0, 0), 1.0 / std::sqrt(2.0), 1e-6); // rows are stored as float32
    EXPECT_NEAR(m.at(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(m.at(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(m.at(1, 1), 2.0 / std::sqrt(5.0), 1e-6);

    auto csv = read_file(dir / "m.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "query_id,va,vb");
    EXPECT_NE(csv.find("q1,0.707106"), std::string::npos) << csv;

    FILE* f = std::fopen((dir / "m.png").c_str(), "rb");
    ASSERT_NE(f, nullptr);
    unsigned char sig[8];
    ASSERT_EQ(std::fread(sig, 1, 8, f), 8u);
    EXPECT_EQ(png_sig_cmp(sig, 0, 8), 0);
    std::fclose(f);
}

TEST(CorrelationMatrix, IdentityCorpusHasDominantDiagonal) {
    auto corpus = disjoint_corpus(15, 10, 10, 8);
    MockProvider provider(1536);
    auto index = index_archive(corpus.archive, provider);
    QuerySet queries;
    for (const auto& v : corpus.archive.videos) queries.push_back({"q-" + v.video_id, v.insights[0].text, v.video_id});
    auto m = score_matrix(index, queries, provider, 2);
    for (std::size_t q = 0; q < queries.size(); ++q)
        for (std::size_t v = 0; v < m.video_ids.size(); ++v) EXPECT_GE(m.at(q, q), m.at(q, v));
    TempDir dir;
    EXPECT_THROW(correlation_matrix(index, {}, provider, dir / "x.csv"), Error);
}
