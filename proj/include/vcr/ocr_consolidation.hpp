#pragma once

#include "vcr/insights.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vcr::ocr {

// Code-point sequence; the alignment works on characters, not UTF-8 bytes.
using Text = std::u32string;

// Not a valid code point, so it can never collide with real text.
inline constexpr char32_t kGap = 0xFFFFFFFFu;

Text decode_utf8(std::string_view utf8);
std::string encode_utf8(const Text& text);

std::size_t levenshtein(const Text& a, const Text& b);

// Edit distance divided by the longer length; 0 for two empty strings.
double normalized_distance(const Text& a, const Text& b);

struct ClusterParams {
    double dist_threshold = 0.3;
    double gap_s = 5.0;
};

struct OcrCluster {
    std::vector<InsightRecord> members;
    std::string consensus;
    double span_start = 0.0;
    double span_end = 0.0;
};

// Single-linkage clustering. Two records link when their normalized edit
// distance is within dist_threshold and the gap between their time intervals
// is within gap_s. Clusters come back ordered by span start, members in
// canonical (start, end, text, confidence) order. consensus is left empty.
std::vector<OcrCluster> cluster_ocr(const std::vector<InsightRecord>& records,
                                    const ClusterParams& params = {});

struct AlignScores {
    int match = 1;
    int mismatch = -1;
    int gap = -1;
};

// Rows are in input order, all the same length; kGap marks gaps.
using Alignment = std::vector<Text>;

// Global Needleman-Wunsch alignment of two strings.
std::pair<Text, Text> align_pair(const Text& a, const Text& b, const AlignScores& scores);

// Center-star progressive multiple alignment. The center is the member with
// the smallest summed edit distance to the others (lowest index on ties).
Alignment align_center_star(const std::vector<Text>& texts, const AlignScores& scores = {});
Alignment align_center_star(const std::vector<std::string>& texts, const AlignScores& scores = {});

// Column-wise plurality vote. Ties go to the smaller code point; the gap
// sorts after every character. Columns won by the gap are dropped.
std::string consensus(const Alignment& alignment);

// Renders a row with `gap_char` in place of gaps (for display and tests).
std::string render_row(const Text& row, char gap_char = '-');

// Replaces the OCR records with one record per cluster (consensus text,
// cluster span, mean member confidence). Non-OCR records pass through.
// Output is in insight order.
std::vector<InsightRecord> consolidate(const std::vector<InsightRecord>& records,
                                       const ClusterParams& params = {},
                                       const AlignScores& scores = {});

VideoRecord consolidate_video(VideoRecord video, const ClusterParams& params = {},
                              const AlignScores& scores = {});

} // namespace vcr::ocr
