#include "synthetic.hpp"
#include "vcr/ocr_consolidation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace vcr;
using namespace vcr::ocr;
using namespace vcr::testing;

namespace {

InsightRecord ocr_at(std::string text, double start, double end, double conf = 1.0) {
    return {Source::OCR, std::move(text), start, end, conf};
}

std::vector<std::string> rendered(const Alignment& a) {
    std::vector<std::string> out;
    for (const auto& row : a) out.push_back(render_row(row));
    return out;
}

} // namespace

TEST(Levenshtein, Basics) {
    EXPECT_EQ(levenshtein(U"kitten", U"sitting"), 3u);
    EXPECT_EQ(levenshtein(U"", U"abc"), 3u);
    EXPECT_DOUBLE_EQ(normalized_distance(U"", U""), 0.0);
    EXPECT_DOUBLE_EQ(normalized_distance(U"HELLO", U"GOODBYE"), 1.0);
    EXPECT_DOUBLE_EQ(normalized_distance(U"HELLO", U"HELL0"), 0.2);
}

TEST(Utf8, RoundTrip) {
    const std::string s = "café 日本 ü";
    auto t = decode_utf8(s);
    EXPECT_EQ(t.size(), 9u);
    EXPECT_EQ(encode_utf8(t), s);
}

TEST(ClusterOcr, IdenticalFramesFormOneCluster) {
    std::vector<InsightRecord> recs;
    for (int i = 0; i < 5; ++i) recs.push_back(ocr_at("SLIDE TITLE", i, i + 1));
    auto clusters = cluster_ocr(recs);
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].members.size(), 5u);
    EXPECT_EQ(clusters[0].span_start, 0.0);
    EXPECT_EQ(clusters[0].span_end, 5.0);
}

TEST(ClusterOcr, DistantTextsSplit) {
    auto clusters = cluster_ocr({ocr_at("HELLO", 0, 1), ocr_at("GOODBYE", 0, 1)}, {0.3, 5.0});
    EXPECT_EQ(clusters.size(), 2u);
}

TEST(ClusterOcr, TemporalGateSplits) {
    auto clusters = cluster_ocr({ocr_at("NEWS AT 9", 0, 2), ocr_at("NEWS AT 9", 500, 502)}, {0.3, 10.0});
    ASSERT_EQ(clusters.size(), 2u);
    EXPECT_EQ(clusters[0].span_start, 0.0);
    EXPECT_EQ(clusters[1].span_start, 500.0);
}

TEST(ClusterOcr, SingleLinkageChains) {
    // A~B and B~C link even though A and C are too far apart directly.
    auto clusters = cluster_ocr({ocr_at("ABCDEFGHIJ", 0, 1), ocr_at("ABCDEFGXYZ", 1, 2), ocr_at("ABCDXYZXYZ", 2, 3)},
                                {0.3, 5.0});
    EXPECT_EQ(clusters.size(), 1u);
}

TEST(ClusterOcr, MatchesBruteForceComponents) {
    std::mt19937_64 rng(11);
    const std::vector<std::string> truths = {"BREAKING NEWS", "WEATHER", "SPORTS TONIGHT", "MARKETS"};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<InsightRecord> recs;
        std::uniform_real_distribution<double> when(0.0, 60.0);
        std::uniform_int_distribution<std::size_t> which(0, truths.size() - 1);
        for (int i = 0; i < 25; ++i) {
            double t = when(rng);
            recs.push_back(ocr_at(corrupt(truths[which(rng)], 0.1, rng), t, t + 0.5));
        }
        const ClusterParams params{0.3, 5.0};
        auto clusters = cluster_ocr(recs, params);

        // Oracle: connected components of the full pairwise link graph.
        const std::size_t n = recs.size();
        std::vector<std::size_t> comp(n);
        for (std::size_t i = 0; i < n; ++i) comp[i] = i;
        auto linked = [&](const InsightRecord& a, const InsightRecord& b) {
            double gap = std::max(a.start_s, b.start_s) - std::min(a.end_s, b.end_s);
            return std::max(gap, 0.0) <= params.gap_s &&
                   normalized_distance(decode_utf8(a.text), decode_utf8(b.text)) <= params.dist_threshold;
        };
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (linked(recs[i], recs[j]) && comp[j] > comp[i]) {
                        comp[j] = comp[i];
                        changed = true;
                    }
        }
        std::set<std::multiset<std::string>> expected, actual;
        for (std::size_t c : std::set<std::size_t>(comp.begin(), comp.end())) {
            std::multiset<std::string> members;
            for (std::size_t i = 0; i < n; ++i)
                if (comp[i] == c) members.insert(recs[i].text + "@" + std::to_string(recs[i].start_s));
            expected.insert(members);
        }
        for (const auto& cl : clusters) {
            std::multiset<std::string> members;
            for (const auto& m : cl.members) members.insert(m.text + "@" + std::to_string(m.start_s));
            actual.insert(members);
        }
        EXPECT_EQ(actual, expected) << "trial " << trial;
    }
}

TEST(AlignCenterStar, Singleton) { EXPECT_EQ(rendered(align_center_star(std::vector<std::string>{"ABC"})), (std::vector<std::string>{"ABC"})); }

TEST(AlignCenterStar, HandDerivedPair) {
    EXPECT_EQ(rendered(align_center_star(std::vector<std::string>{"AC", "ABC"})),
              (std::vector<std::string>{"A-C", "ABC"}));
}

TEST(AlignCenterStar, EqualLengthSubstitutionsNeedNoGaps) {
    auto rows = rendered(align_center_star(std::vector<std::string>{"HELLO", "HELL0", "HELLO"}));
    EXPECT_EQ(rows, (std::vector<std::string>{"HELLO", "HELL0", "HELLO"}));
}

TEST(AlignCenterStar, RowsPreserveInputWithGapsRemoved) {
    std::vector<std::string> texts = {"BREAKNG NEWS", "BREAKING NEWS", "BRAKING NEWS!", "BREAKING NEWZ"};
    auto rows = align_center_star(texts);
    ASSERT_EQ(rows.size(), texts.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].size(), rows[0].size());
        Text stripped;
        for (char32_t c : rows[i])
            if (c != kGap) stripped.push_back(c);
        EXPECT_EQ(encode_utf8(stripped), texts[i]);
    }
}

TEST(AlignPair, NeedlemanWunschScoreIsOptimal) {
    // Brute-force DP score check against the aligned pair's column score.
    const AlignScores s{1, -1, -1};
    auto column_score = [&](const Text& a, const Text& b) {
        int total = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == kGap || b[i] == kGap) total += s.gap;
            else total += a[i] == b[i] ? s.match : s.mismatch;
        }
        return total;
    };
    auto best = [&](const Text& a, const Text& b) {
        std::vector<std::vector<int>> f(a.size() + 1, std::vector<int>(b.size() + 1));
        for (std::size_t i = 0; i <= a.size(); ++i) f[i][0] = static_cast<int>(i) * s.gap;
        for (std::size_t j = 0; j <= b.size(); ++j) f[0][j] = static_cast<int>(j) * s.gap;
        for (std::size_t i = 1; i <= a.size(); ++i)
            for (std::size_t j = 1; j <= b.size(); ++j)
                f[i][j] = std::max({f[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? s.match : s.mismatch),
                                    f[i - 1][j] + s.gap, f[i][j - 1] + s.gap});
        return f[a.size()][b.size()];
    };
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        std::uniform_int_distribution<int> len(0, 12);
        std::uniform_int_distribution<int> ch('A', 'D');
        Text a, b;
        for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char32_t>(ch(rng)));
        for (int i = len(rng); i > 0; --i) b.push_back(static_cast<char32_t>(ch(rng)));
        auto [ra, rb] = align_pair(a, b, s);
        ASSERT_EQ(ra.size(), rb.size());
        EXPECT_EQ(column_score(ra, rb), best(a, b));
    }
}

TEST(Consensus, Examples) {
    EXPECT_EQ(consensus(align_center_star(std::vector<std::string>{"HELLO", "HELL0", "HELLO"})), "HELLO");
    EXPECT_EQ(consensus(align_center_star(std::vector<std::string>{"ABC"})), "ABC");
    const Alignment rows = {decode_utf8("A") + Text(1, kGap) + decode_utf8("C"), decode_utf8("ABC"),
                            decode_utf8("A") + Text(1, kGap) + decode_utf8("C")};
    EXPECT_EQ(consensus(rows), "AC");
}

TEST(Consensus, TieGoesToSmallerCharacterAndCharacterBeatsGap) {
    EXPECT_EQ(consensus({decode_utf8("B"), decode_utf8("A")}), "A");
    EXPECT_EQ(consensus({Text(1, kGap), decode_utf8("Z")}), "Z");
}

TEST(Consensus, IdenticalStringsReproduced) {
    for (std::size_t k = 1; k <= 6; ++k) {
        std::vector<std::string> texts(k, "Café 2024: Keynote");
        EXPECT_EQ(consensus(align_center_star(texts)), "Café 2024: Keynote");
    }
}

TEST(Consolidate, EmptyInput) { EXPECT_TRUE(consolidate({}).empty()); }

TEST(Consolidate, RecoversBreakingNews) {
    std::mt19937_64 rng(3);
    int exact = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<InsightRecord> recs;
        for (int i = 0; i < 9; ++i) recs.push_back(ocr_at(corrupt("BREAKING NEWS", 0.05, rng), i * 0.5, i * 0.5 + 0.5));
        auto out = consolidate(recs);
        ASSERT_EQ(out.size(), 1u);
        exact += out[0].text == "BREAKING NEWS";
    }
    EXPECT_EQ(exact, 20);
}

TEST(Consolidate, DisjointTextsInTimeOrder) {
    auto out = consolidate({ocr_at("SECOND SLIDE", 30, 31, 0.5), ocr_at("FIRST SLIDE", 0, 1, 0.9),
                            ocr_at("FIRST SLIDE", 1, 2, 0.7), {Source::ASR, "spoken", 0.5, 3.0, 1.0}});
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].text, "FIRST SLIDE");
    EXPECT_EQ(out[0].start_s, 0.0);
    EXPECT_EQ(out[0].end_s, 2.0);
    EXPECT_NEAR(out[0].confidence, 0.8, 1e-12);
    EXPECT_EQ(out[1].source, Source::ASR);
    EXPECT_EQ(out[2].text, "SECOND SLIDE");
}

TEST(Consolidate, PermutationInvariant) {
    std::mt19937_64 rng(9);
    std::vector<InsightRecord> recs;
    for (int i = 0; i < 8; ++i) recs.push_back(ocr_at(corrupt("QUARTERLY RESULTS", 0.08, rng), i, i + 1));
    for (int i = 0; i < 6; ++i) recs.push_back(ocr_at(corrupt("THANK YOU", 0.08, rng), 40 + i, 41 + i));
    auto base = consolidate(recs);
    for (int t = 0; t < 10; ++t) {
        std::shuffle(recs.begin(), recs.end(), rng);
        EXPECT_EQ(consolidate(recs), base);
    }
}

TEST(Consolidate, OutputCountAndLengthBounds) {
    std::mt19937_64 rng(21);
    std::vector<InsightRecord> recs;
    for (int i = 0; i < 7; ++i) recs.push_back(ocr_at(corrupt("OPEN DATA SUMMIT", 0.1, rng), i, i + 1));
    auto clusters = cluster_ocr(recs);
    auto out = consolidate(recs);
    EXPECT_EQ(out.size(), clusters.size());
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        std::size_t longest = 0;
        for (const auto& m : clusters[c].members) longest = std::max(longest, decode_utf8(m.text).size());
        EXPECT_LE(decode_utf8(out[c].text).size(), longest);
    }
}
