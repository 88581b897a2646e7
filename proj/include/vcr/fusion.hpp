#pragma once

#include "vcr/insights.hpp"
#include "vcr/tokenizer.hpp"

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace vcr {

struct FusedLine {
    Source tag = Source::ASR;
    std::string text;
    double start_s = 0.0;
    double end_s = 0.0;
    // Set on the second and later pieces of a line that was hard-split
    // because it alone exceeded the token budget.
    bool continuation = false;

    // "[" + tag + "] " + text
    std::string render() const;

    bool operator==(const FusedLine&) const = default;
};

struct Segment {
    std::string video_id;
    std::uint32_t segment_idx = 0;
    std::vector<FusedLine> lines;
    std::size_t token_count = 0;
    double start_s = 0.0;
    double end_s = 0.0;

    // Rendered lines joined with '\n'; this is what gets embedded.
    std::string render() const;
};

struct SegmentParams {
    std::size_t budget_tokens = 4096;
    double time_gap_s = 30.0;
};

// Which modalities to include when serializing.
class SourceSet {
public:
    SourceSet() = default; // all sources
    SourceSet(std::initializer_list<Source> sources);
    bool contains(Source s) const { return (bits_ >> static_cast<unsigned>(s)) & 1u; }
    static SourceSet parse(std::string_view csv); // "asr,ocr,caption"

private:
    unsigned bits_ = 0b111;
};

// One line per insight, in the (already sorted) insight order.
std::vector<FusedLine> serialize(const VideoRecord& video, const SourceSet& sources = {});

// Greedy packing of whole lines into segments of at most budget_tokens
// (line content tokens; tags are not counted). A new segment also starts when
// a line begins more than time_gap_s after the latest end in the current
// segment. A single line over budget is cut at token boundaries into
// budget-sized pieces whose texts concatenate back to the original.
std::vector<Segment> segment(const std::string& video_id, const std::vector<FusedLine>& lines,
                             const SegmentParams& params = {},
                             const Tokenizer& tokenizer = default_tokenizer());

// Inverse of segmentation: rejoins hard-split pieces.
std::vector<FusedLine> flatten(const std::vector<Segment>& segments);

std::vector<Segment> fuse_video(const VideoRecord& video, const SegmentParams& params = {},
                                const Tokenizer& tokenizer = default_tokenizer(),
                                const SourceSet& sources = {});

} // namespace vcr
