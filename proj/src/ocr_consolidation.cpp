#include "vcr/ocr_consolidation.hpp"

#include "vcr/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

namespace vcr::ocr {

Text decode_utf8(std::string_view s) {
    constexpr char32_t kReplacement = 0xFFFD;
    Text out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + len > s.size()) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(const Text& text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) {
        if (cp == kGap) continue;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::size_t levenshtein(const Text& a, const Text& b) {
    if (a.size() < b.size()) return levenshtein(b, a);
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

double normalized_distance(const Text& a, const Text& b) {
    std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

bool canonical_less(const InsightRecord& a, const InsightRecord& b) {
    return std::tie(a.start_s, a.end_s, a.text, a.confidence) <
           std::tie(b.start_s, b.end_s, b.text, b.confidence);
}

} // namespace

std::vector<OcrCluster> cluster_ocr(const std::vector<InsightRecord>& records,
                                    const ClusterParams& params) {
    for (const auto& r : records)
        if (r.source != Source::OCR) throw PreconditionError("cluster_ocr: non-OCR record");

    std::vector<InsightRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), canonical_less);
    std::vector<Text> texts;
    texts.reserve(sorted.size());
    for (const auto& r : sorted) texts.push_back(decode_utf8(r.text));

    const std::size_t n = sorted.size();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Sorted by start, so the gap to i only grows from here on.
            if (sorted[j].start_s - sorted[i].end_s > params.gap_s) break;
            if (uf.find(i) == uf.find(j)) continue;
            std::size_t la = texts[i].size(), lb = texts[j].size();
            std::size_t longest = std::max(la, lb);
            if (longest > 0 &&
                static_cast<double>(la > lb ? la - lb : lb - la) / static_cast<double>(longest) >
                    params.dist_threshold)
                continue;
            if (normalized_distance(texts[i], texts[j]) <= params.dist_threshold) uf.unite(i, j);
        }
    }

    std::map<std::size_t, OcrCluster> by_root;
    for (std::size_t i = 0; i < n; ++i) {
        auto& c = by_root[uf.find(i)];
        if (c.members.empty()) {
            c.span_start = sorted[i].start_s;
            c.span_end = sorted[i].end_s;
        }
        c.span_start = std::min(c.span_start, sorted[i].start_s);
        c.span_end = std::max(c.span_end, sorted[i].end_s);
        c.members.push_back(sorted[i]);
    }
    // Roots are the smallest index in each component, so map order is span order.
    std::vector<OcrCluster> out;
    out.reserve(by_root.size());
    for (auto& [root, cluster] : by_root) out.push_back(std::move(cluster));
    return out;
}

std::pair<Text, Text> align_pair(const Text& a, const Text& b, const AlignScores& scores) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<long> dp((n + 1) * (m + 1));
    auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
    for (std::size_t i = 0; i <= n; ++i) dp[at(i, 0)] = static_cast<long>(i) * scores.gap;
    for (std::size_t j = 0; j <= m; ++j) dp[at(0, j)] = static_cast<long>(j) * scores.gap;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j) {
            long diag = dp[at(i - 1, j - 1)] + (a[i - 1] == b[j - 1] ? scores.match : scores.mismatch);
            long up = dp[at(i - 1, j)] + scores.gap;
            long left = dp[at(i, j - 1)] + scores.gap;
            dp[at(i, j)] = std::max({diag, up, left});
        }

    // Traceback preference: diagonal, then gap in b, then gap in a.
    Text ra, rb;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 &&
            dp[at(i, j)] ==
                dp[at(i - 1, j - 1)] + (a[i - 1] == b[j - 1] ? scores.match : scores.mismatch)) {
            ra.push_back(a[--i]);
            rb.push_back(b[--j]);
        } else if (i > 0 && dp[at(i, j)] == dp[at(i - 1, j)] + scores.gap) {
            ra.push_back(a[--i]);
            rb.push_back(kGap);
        } else {
            ra.push_back(kGap);
            rb.push_back(b[--j]);
        }
    }
    std::reverse(ra.begin(), ra.end());
    std::reverse(rb.begin(), rb.end());
    return {std::move(ra), std::move(rb)};
}

namespace {

// Folds one pairwise alignment (center vs other) into the growing multiple
// alignment whose row `center_row` holds the gapped center. Gaps already in
// the center stay gaps ("once a gap, always a gap").
void merge_into(Alignment& msa, std::size_t center_row, const Text& pw_center, const Text& pw_other) {
    const Text& mc = msa[center_row];
    const std::size_t rows = msa.size();
    Alignment merged(rows + 1);
    std::size_t i = 0, j = 0;
    auto take_column = [&](std::size_t col, char32_t new_char) {
        for (std::size_t r = 0; r < rows; ++r) merged[r].push_back(msa[r][col]);
        merged[rows].push_back(new_char);
    };
    auto new_column = [&](char32_t new_char) {
        for (std::size_t r = 0; r < rows; ++r) merged[r].push_back(kGap);
        merged[rows].push_back(new_char);
    };
    while (i < mc.size() || j < pw_center.size()) {
        bool msa_gap = i < mc.size() && mc[i] == kGap;
        bool pw_gap = j < pw_center.size() && pw_center[j] == kGap;
        if (i < mc.size() && j < pw_center.size() && !msa_gap && !pw_gap) {
            take_column(i++, pw_other[j++]);
        } else if (j < pw_center.size() && pw_gap) {
            if (msa_gap)
                take_column(i++, pw_other[j++]);
            else
                new_column(pw_other[j++]);
        } else {
            take_column(i++, kGap);
        }
    }
    msa = std::move(merged);
}

} // namespace

Alignment align_center_star(const std::vector<Text>& texts, const AlignScores& scores) {
    if (texts.empty()) throw PreconditionError("align_center_star: no texts");
    if (!(scores.match > scores.mismatch) || !(scores.gap < 0))
        throw PreconditionError("align_center_star: need match > mismatch and gap < 0");
    const std::size_t k = texts.size();
    if (k == 1) return {texts[0]};

    std::vector<std::size_t> summed(k, 0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            std::size_t d = levenshtein(texts[a], texts[b]);
            summed[a] += d;
            summed[b] += d;
        }
    const std::size_t center =
        static_cast<std::size_t>(std::min_element(summed.begin(), summed.end()) - summed.begin());

    Alignment msa{texts[center]};
    std::vector<std::size_t> order{center};
    for (std::size_t t = 0; t < k; ++t) {
        if (t == center) continue;
        auto [pc, po] = align_pair(texts[center], texts[t], scores);
        merge_into(msa, 0, pc, po);
        order.push_back(t);
    }

    Alignment out(k);
    for (std::size_t r = 0; r < k; ++r) out[order[r]] = std::move(msa[r]);
    return out;
}

Alignment align_center_star(const std::vector<std::string>& texts, const AlignScores& scores) {
    std::vector<Text> decoded;
    decoded.reserve(texts.size());
    for (const auto& t : texts) decoded.push_back(decode_utf8(t));
    return align_center_star(decoded, scores);
}

std::string consensus(const Alignment& alignment) {
    if (alignment.empty()) throw PreconditionError("consensus: empty alignment");
    const std::size_t width = alignment.front().size();
    for (const auto& row : alignment)
        if (row.size() != width) throw PreconditionError("consensus: alignment is not rectangular");

    Text out;
    std::map<char32_t, std::size_t> votes;
    for (std::size_t col = 0; col < width; ++col) {
        votes.clear();
        for (const auto& row : alignment) ++votes[row[col]];
        // std::map iterates ascending and kGap is the largest key, so the
        // first strict maximum is the tie-broken winner.
        auto winner = votes.begin();
        for (auto it = votes.begin(); it != votes.end(); ++it)
            if (it->second > winner->second) winner = it;
        if (winner->first != kGap) out.push_back(winner->first);
    }
    return encode_utf8(out);
}

std::string render_row(const Text& row, char gap_char) {
    Text copy = row;
    std::replace(copy.begin(), copy.end(), kGap, static_cast<char32_t>(gap_char));
    return encode_utf8(copy);
}

std::vector<InsightRecord> consolidate(const std::vector<InsightRecord>& records,
                                       const ClusterParams& params, const AlignScores& scores) {
    std::vector<InsightRecord> ocr, out;
    for (const auto& r : records) (r.source == Source::OCR ? ocr : out).push_back(r);

    for (auto& cluster : cluster_ocr(ocr, params)) {
        std::vector<std::string> texts;
        double confidence = 0.0;
        for (const auto& m : cluster.members) {
            texts.push_back(m.text);
            confidence += m.confidence;
        }
        std::string text = consensus(align_center_star(texts, scores));
        if (text.empty()) text = cluster.members.front().text;
        out.push_back({Source::OCR, std::move(text), cluster.span_start, cluster.span_end,
                       confidence / static_cast<double>(cluster.members.size())});
    }
    sort_insights(out);
    return out;
}

VideoRecord consolidate_video(VideoRecord video, const ClusterParams& params,
                              const AlignScores& scores) {
    video.insights = consolidate(video.insights, params, scores);
    return video;
}

} // namespace vcr::ocr
