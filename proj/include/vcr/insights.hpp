#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace vcr {

// Declaration order is the tie-break order for insights starting at the same time.
enum class Source : std::uint8_t { ASR = 0, OCR = 1, CAPTION = 2 };

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view name);

struct InsightRecord {
    Source source = Source::ASR;
    std::string text;
    double start_s = 0.0;
    double end_s = 0.0;
    double confidence = 1.0;

    bool operator==(const InsightRecord&) const = default;
};

struct VideoRecord {
    std::string video_id;
    std::string title;
    std::string author;
    std::optional<std::string> event_date;
    std::optional<std::uint64_t> views;
    std::optional<std::uint64_t> likes;
    std::vector<std::string> topics; // set semantics, kept in first-seen order
    std::optional<std::string> description;
    std::optional<std::string> thumbnail_url;
    std::optional<std::string> player_url;
    std::vector<InsightRecord> insights;

    bool operator==(const VideoRecord&) const = default;
};

struct TopicCount {
    std::string name;
    std::size_t count = 0;

    bool operator==(const TopicCount&) const = default;
};

struct Archive {
    std::vector<VideoRecord> videos;
    std::vector<TopicCount> ontology; // sorted by name

    const VideoRecord* find(std::string_view video_id) const;

    bool operator==(const Archive&) const = default;
};

// Collapses newlines/tabs (and runs of them) into single spaces and trims.
std::string normalize_text(std::string_view text);

// Stable sort by (start_s, source, input order).
void sort_insights(std::vector<InsightRecord>& insights);

// Recomputes ontology counts from the videos' topic sets.
std::vector<TopicCount> compute_ontology(const std::vector<VideoRecord>& videos);

// Parses, normalizes and validates one video object. `where` prefixes error
// messages ("file:line").
VideoRecord parse_video(const nlohmann::json& object, const std::string& where);
nlohmann::json to_json(const VideoRecord& video, bool include_insights = true);
nlohmann::json to_json(const InsightRecord& insight);

// Accepts a directory of per-video *.json files, a JSONL file (one video per
// line) or an archive snapshot written by save_archive ({"videos": [...]}).
Archive load_archive(const std::filesystem::path& path);

// Builds a validated archive from already-parsed videos (normalizes, sorts,
// checks id uniqueness and time invariants).
Archive make_archive(std::vector<VideoRecord> videos);

void save_archive(const Archive& archive, const std::filesystem::path& path);
void save_archive_jsonl(const Archive& archive, const std::filesystem::path& path);

// Drops topics carried by fewer than min_count videos from the ontology and
// from every video. Videos are never removed.
Archive filter_ontology(const Archive& archive, std::size_t min_count);

} // namespace vcr
