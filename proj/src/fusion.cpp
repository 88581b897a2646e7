#include "vcr/fusion.hpp"

#include "vcr/error.hpp"

#include <algorithm>
#include <cctype>

namespace vcr {

std::string FusedLine::render() const {
    std::string out = "[";
    out += to_string(tag);
    out += "] ";
    out += text;
    return out;
}

std::string Segment::render() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out.push_back('\n');
        out += lines[i].render();
    }
    return out;
}

SourceSet::SourceSet(std::initializer_list<Source> sources) : bits_(0) {
    for (auto s : sources) bits_ |= 1u << static_cast<unsigned>(s);
}

SourceSet SourceSet::parse(std::string_view csv) {
    SourceSet set{};
    set.bits_ = 0;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        auto end = csv.find(',', pos);
        if (end == std::string_view::npos) end = csv.size();
        auto piece = csv.substr(pos, end - pos);
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.front()))) piece.remove_prefix(1);
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back()))) piece.remove_suffix(1);
        std::string name(piece);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        if (!name.empty()) {
            auto s = parse_source(name);
            if (!s) throw Error("unknown source '" + name + "'");
            set.bits_ |= 1u << static_cast<unsigned>(*s);
        }
        pos = end + 1;
    }
    if (set.bits_ == 0) throw Error("empty source list");
    return set;
}

std::vector<FusedLine> serialize(const VideoRecord& video, const SourceSet& sources) {
    std::vector<FusedLine> out;
    out.reserve(video.insights.size());
    for (const auto& rec : video.insights)
        if (sources.contains(rec.source))
            out.push_back({rec.source, rec.text, rec.start_s, rec.end_s, false});
    return out;
}

namespace {

struct Piece {
    FusedLine line;
    std::size_t tokens;
};

void split_line(const FusedLine& line, std::size_t budget, const Tokenizer& tokenizer,
                std::vector<Piece>& out) {
    auto tokens = tokenizer.tokenize(line.text);
    if (tokens.size() <= budget) {
        out.push_back({line, tokens.size()});
        return;
    }
    for (std::size_t first = 0; first < tokens.size(); first += budget) {
        std::size_t last = std::min(first + budget, tokens.size());
        std::size_t begin = first == 0 ? 0 : tokens[first].begin;
        std::size_t end = last == tokens.size() ? line.text.size() : tokens[last].begin;
        FusedLine piece = line;
        piece.text = line.text.substr(begin, end - begin);
        piece.continuation = line.continuation || first != 0;
        out.push_back({std::move(piece), last - first});
    }
}

} // namespace

std::vector<Segment> segment(const std::string& video_id, const std::vector<FusedLine>& lines,
                             const SegmentParams& params, const Tokenizer& tokenizer) {
    if (params.budget_tokens < 1) throw PreconditionError("segment: budget_tokens must be >= 1");

    std::vector<Piece> pieces;
    pieces.reserve(lines.size());
    for (const auto& line : lines) split_line(line, params.budget_tokens, tokenizer, pieces);

    std::vector<Segment> out;
    Segment current;
    auto flush = [&] {
        if (current.lines.empty()) return;
        current.video_id = video_id;
        current.segment_idx = static_cast<std::uint32_t>(out.size());
        out.push_back(std::move(current));
        current = Segment{};
    };
    for (auto& piece : pieces) {
        if (!current.lines.empty()) {
            bool over_budget = current.token_count + piece.tokens > params.budget_tokens;
            bool time_break =
                !piece.line.continuation && piece.line.start_s - current.end_s > params.time_gap_s;
            if (over_budget || time_break) flush();
        }
        if (current.lines.empty()) {
            current.start_s = piece.line.start_s;
            current.end_s = piece.line.end_s;
        }
        current.end_s = std::max(current.end_s, piece.line.end_s);
        current.token_count += piece.tokens;
        current.lines.push_back(std::move(piece.line));
    }
    flush();
    return out;
}

std::vector<FusedLine> flatten(const std::vector<Segment>& segments) {
    std::vector<FusedLine> out;
    for (const auto& seg : segments)
        for (const auto& line : seg.lines) {
            if (line.continuation && !out.empty()) {
                out.back().text += line.text;
                continue;
            }
            out.push_back(line);
        }
    return out;
}

std::vector<Segment> fuse_video(const VideoRecord& video, const SegmentParams& params,
                                const Tokenizer& tokenizer, const SourceSet& sources) {
    return segment(video.video_id, serialize(video, sources), params, tokenizer);
}

} // namespace vcr
