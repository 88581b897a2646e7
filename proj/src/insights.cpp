#include "vcr/insights.hpp"

#include "vcr/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace vcr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Source source) {
    switch (source) {
    case Source::ASR: return "ASR";
    case Source::OCR: return "OCR";
    case Source::CAPTION: return "CAPTION";
    }
    return "?";
}

std::optional<Source> parse_source(std::string_view name) {
    if (name == "ASR") return Source::ASR;
    if (name == "OCR") return Source::OCR;
    if (name == "CAPTION") return Source::CAPTION;
    return std::nullopt;
}

const VideoRecord* Archive::find(std::string_view video_id) const {
    for (const auto& v : videos)
        if (v.video_id == video_id) return &v;
    return nullptr;
}

std::string normalize_text(std::string_view text) {
    auto is_break = [](char c) { return c == '\n' || c == '\r' || c == '\t' || c == '\v' || c == '\f'; };
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != ' ' && !is_break(text[i])) {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t j = i;
        bool has_break = false;
        while (j < text.size() && (text[j] == ' ' || is_break(text[j]))) has_break |= is_break(text[j++]);
        if (has_break)
            out.push_back(' ');
        else
            out.append(text.substr(i, j - i));
        i = j;
    }
    auto first = out.find_first_not_of(' ');
    if (first == std::string::npos) return {};
    auto last = out.find_last_not_of(' ');
    return out.substr(first, last - first + 1);
}

void sort_insights(std::vector<InsightRecord>& insights) {
    std::stable_sort(insights.begin(), insights.end(),
                     [](const InsightRecord& a, const InsightRecord& b) {
                         if (a.start_s != b.start_s) return a.start_s < b.start_s;
                         return a.source < b.source;
                     });
}

std::vector<TopicCount> compute_ontology(const std::vector<VideoRecord>& videos) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : videos)
        for (const auto& t : v.topics) ++counts[t];
    std::vector<TopicCount> out;
    out.reserve(counts.size());
    for (auto& [name, count] : counts) out.push_back({name, count});
    return out;
}

namespace {

template <typename T>
std::optional<T> optional_field(const json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end() || it->is_null()) return std::nullopt;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": field '" + key + "': " + e.what());
    }
}

std::optional<std::uint64_t> count_field(const json& object, const char* key,
                                         const std::string& where) {
    auto it = object.find(key);
    if (it == object.end() || it->is_null()) return std::nullopt;
    if (it->is_number_unsigned()) return it->get<std::uint64_t>();
    if (it->is_number_integer())
        throw ValidationError(where + ": field '" + key + "' must be >= 0");
    throw ParseError(where + ": field '" + key + "' must be an integer count");
}

InsightRecord parse_insight(const json& object, const std::string& where) {
    if (!object.is_object()) throw ParseError(where + ": insight must be an object");
    InsightRecord rec;
    auto source_name = optional_field<std::string>(object, "source", where);
    if (!source_name) throw ParseError(where + ": insight missing 'source'");
    auto source = parse_source(*source_name);
    if (!source) throw ParseError(where + ": unknown insight source '" + *source_name + "'");
    rec.source = *source;
    rec.text = normalize_text(optional_field<std::string>(object, "text", where).value_or(""));
    auto start = optional_field<double>(object, "start_s", where);
    if (!start) throw ParseError(where + ": insight missing 'start_s'");
    rec.start_s = *start;
    rec.end_s = optional_field<double>(object, "end_s", where).value_or(rec.start_s);
    rec.confidence = optional_field<double>(object, "confidence", where).value_or(1.0);
    return rec;
}

void validate_insight(const InsightRecord& rec, const std::string& where) {
    if (!std::isfinite(rec.start_s) || !std::isfinite(rec.end_s))
        throw ValidationError(where + ": non-finite insight time");
    if (rec.start_s < 0.0) throw ValidationError(where + ": negative start_s");
    if (rec.end_s < rec.start_s) throw ValidationError(where + ": end_s < start_s");
    if (!(rec.confidence >= 0.0 && rec.confidence <= 1.0))
        throw ValidationError(where + ": confidence outside [0,1]");
}

struct Located {
    VideoRecord video;
    std::string where;
};

// Normalizes and validates in place; empty-text insights are dropped.
void finalize_video(VideoRecord& video, const std::string& where) {
    if (video.video_id.empty()) throw ValidationError(where + ": empty video_id");
    std::vector<std::string> unique_topics;
    std::unordered_set<std::string> seen;
    for (auto& t : video.topics)
        if (!t.empty() && seen.insert(t).second) unique_topics.push_back(std::move(t));
    video.topics = std::move(unique_topics);

    std::vector<InsightRecord> kept;
    kept.reserve(video.insights.size());
    for (auto& rec : video.insights) {
        rec.text = normalize_text(rec.text);
        validate_insight(rec, where + " (video " + video.video_id + ")");
        if (rec.text.empty()) {
            spdlog::warn("{}: dropping empty {} insight at {}s in video {}", where,
                         to_string(rec.source), rec.start_s, video.video_id);
            continue;
        }
        kept.push_back(std::move(rec));
    }
    video.insights = std::move(kept);
    sort_insights(video.insights);
}

Archive assemble(std::vector<Located> items) {
    std::unordered_map<std::string, std::string> first_seen;
    Archive archive;
    archive.videos.reserve(items.size());
    for (auto& item : items) {
        finalize_video(item.video, item.where);
        auto [it, inserted] = first_seen.emplace(item.video.video_id, item.where);
        if (!inserted)
            throw ValidationError(item.where + ": duplicate video_id \"" + item.video.video_id +
                                  "\" (first seen at " + it->second + ")");
        archive.videos.push_back(std::move(item.video));
    }
    archive.ontology = compute_ontology(archive.videos);
    return archive;
}

json parse_json_text(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(where + ": malformed JSON: " + e.what());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

VideoRecord parse_video(const json& object, const std::string& where) {
    if (!object.is_object()) throw ParseError(where + ": video entry must be a JSON object");
    VideoRecord v;
    auto id = optional_field<std::string>(object, "video_id", where);
    if (!id) throw ParseError(where + ": missing 'video_id'");
    v.video_id = *id;
    v.title = optional_field<std::string>(object, "title", where).value_or("");
    v.author = optional_field<std::string>(object, "author", where).value_or("");
    v.event_date = optional_field<std::string>(object, "event_date", where);
    v.views = count_field(object, "views", where);
    v.likes = count_field(object, "likes", where);
    v.topics = optional_field<std::vector<std::string>>(object, "topics", where).value_or(
        std::vector<std::string>{});
    v.description = optional_field<std::string>(object, "description", where);
    v.thumbnail_url = optional_field<std::string>(object, "thumbnail_url", where);
    v.player_url = optional_field<std::string>(object, "player_url", where);
    if (auto it = object.find("insights"); it != object.end() && !it->is_null()) {
        if (!it->is_array()) throw ParseError(where + ": 'insights' must be an array");
        std::size_t i = 0;
        for (const auto& item : *it)
            v.insights.push_back(parse_insight(item, where + " insight #" + std::to_string(i++)));
    }
    finalize_video(v, where);
    return v;
}

json to_json(const InsightRecord& insight) {
    return json{{"source", to_string(insight.source)},
                {"text", insight.text},
                {"start_s", insight.start_s},
                {"end_s", insight.end_s},
                {"confidence", insight.confidence}};
}

json to_json(const VideoRecord& video, bool include_insights) {
    json out = json::object();
    out["video_id"] = video.video_id;
    out["title"] = video.title;
    out["author"] = video.author;
    out["event_date"] = video.event_date ? json(*video.event_date) : json(nullptr);
    out["views"] = video.views ? json(*video.views) : json(nullptr);
    out["likes"] = video.likes ? json(*video.likes) : json(nullptr);
    out["topics"] = video.topics;
    out["description"] = video.description ? json(*video.description) : json(nullptr);
    if (video.thumbnail_url) out["thumbnail_url"] = *video.thumbnail_url;
    if (video.player_url) out["player_url"] = *video.player_url;
    if (include_insights) {
        json arr = json::array();
        for (const auto& rec : video.insights) arr.push_back(to_json(rec));
        out["insights"] = std::move(arr);
    }
    return out;
}

Archive make_archive(std::vector<VideoRecord> videos) {
    std::vector<Located> items;
    items.reserve(videos.size());
    for (std::size_t i = 0; i < videos.size(); ++i)
        items.push_back({std::move(videos[i]), "video #" + std::to_string(i)});
    return assemble(std::move(items));
}

Archive load_archive(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw Error("archive path does not exist: " + path.string());

    std::vector<Located> items;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::string where = file.string();
            items.push_back({parse_video(parse_json_text(read_file(file), where), where), where});
        }
        return assemble(std::move(items));
    }

    const std::string content = read_file(path);
    auto first = content.find_first_not_of(" \t\r\n");
    if (path.extension() == ".json" && first != std::string::npos && content[first] == '{') {
        // Whole-file snapshot. A single-video file is accepted too.
        json doc = parse_json_text(content, path.string());
        if (doc.contains("videos")) {
            if (!doc["videos"].is_array())
                throw ParseError(path.string() + ": 'videos' must be an array");
            std::size_t i = 0;
            for (const auto& item : doc["videos"]) {
                std::string where = path.string() + " videos[" + std::to_string(i++) + "]";
                items.push_back({parse_video(item, where), where});
            }
        } else {
            items.push_back({parse_video(doc, path.string()), path.string()});
        }
        return assemble(std::move(items));
    }

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        ++line_no;
        std::string line = content.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string where = path.string() + ":" + std::to_string(line_no);
        items.push_back({parse_video(parse_json_text(line, where), where), where});
    }
    return assemble(std::move(items));
}

void save_archive(const Archive& archive, const fs::path& path) {
    json doc = json::object();
    json videos = json::array();
    for (const auto& v : archive.videos) videos.push_back(to_json(v));
    json ontology = json::array();
    for (const auto& t : archive.ontology) ontology.push_back({{"name", t.name}, {"count", t.count}});
    doc["ontology"] = std::move(ontology);
    doc["videos"] = std::move(videos);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

void save_archive_jsonl(const Archive& archive, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& v : archive.videos) out << to_json(v).dump() << '\n';
}

Archive filter_ontology(const Archive& archive, std::size_t min_count) {
    if (min_count < 1) throw PreconditionError("filter_ontology: min_count must be >= 1");
    std::unordered_set<std::string> keep;
    Archive out;
    for (const auto& t : archive.ontology)
        if (t.count >= min_count) {
            keep.insert(t.name);
            out.ontology.push_back(t);
        }
    out.videos = archive.videos;
    for (auto& v : out.videos)
        std::erase_if(v.topics, [&](const std::string& t) { return !keep.contains(t); });
    return out;
}

} // namespace vcr
