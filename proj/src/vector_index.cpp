#include "vcr/vector_index.hpp"

#include "binary_io.hpp"

#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

namespace vcr {

using nlohmann::json;

IndexMatrix::IndexMatrix(std::string provider_id, std::size_t dimension)
    : provider_id_(std::move(provider_id)), dimension_(dimension) {}

std::span<const float> IndexMatrix::row(std::size_t r) const {
    return std::span<const float>(data_).subspan(r * dimension_, dimension_);
}

std::vector<std::string> IndexMatrix::video_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& ref : sidecar_)
        if (seen.insert(ref.video_id).second) out.push_back(ref.video_id);
    return out;
}

IndexMatrix IndexMatrix::from_parts(std::string provider_id, std::size_t dimension, std::vector<float> data,
                                    std::vector<SegmentRef> sidecar, std::vector<TopicCount> ontology) {
    if (data.size() != sidecar.size() * dimension)
        throw DimensionMismatch("index: data size does not match sidecar rows x dimension");
    IndexMatrix index(std::move(provider_id), dimension);
    index.data_ = std::move(data);
    index.sidecar_ = std::move(sidecar);
    index.ontology_ = std::move(ontology);
    return index;
}

void IndexMatrix::add(const SegmentRef& ref, const EmbeddingVector& vector) {
    if (vector.dimension() != dimension_)
        throw DimensionMismatch("index: vector dimension " + std::to_string(vector.dimension()) +
                                " != index dimension " + std::to_string(dimension_));
    if (vector.provider_id != provider_id_)
        throw DimensionMismatch("index: vector from provider '" + vector.provider_id +
                                "' added to index of provider '" + provider_id_ + "'");
    double norm = 0.0;
    for (float v : vector.values) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    for (float v : vector.values)
        data_.push_back(norm > 0.0 ? static_cast<float>(static_cast<double>(v) / norm) : 0.0f);
    sidecar_.push_back(ref);
}

IndexMatrix build_index(const std::vector<std::pair<Segment, EmbeddingVector>>& segments) {
    if (segments.empty()) return IndexMatrix{};
    const auto& first = segments.front().second;
    IndexMatrix index(first.provider_id, first.dimension());
    std::set<std::pair<std::string, std::uint32_t>> seen;
    for (const auto& [seg, vec] : segments) {
        if (!seen.emplace(seg.video_id, seg.segment_idx).second)
            throw ValidationError("index: duplicate segment (" + seg.video_id + ", " +
                                  std::to_string(seg.segment_idx) + ")");
        index.add({seg.video_id, seg.segment_idx, seg.start_s, seg.end_s}, vec);
    }
    return index;
}

std::vector<double> score_all(const IndexMatrix& index, const EmbeddingVector& query) {
    if (index.size() > 0 && query.dimension() != index.dimension())
        throw DimensionMismatch("search: query dimension " + std::to_string(query.dimension()) +
                                " != index dimension " + std::to_string(index.dimension()));
    std::vector<double> scores(index.size(), 0.0);
    double qnorm = 0.0;
    for (float v : query.values) qnorm += static_cast<double>(v) * v;
    qnorm = std::sqrt(qnorm);
    if (qnorm == 0.0) return scores;

    const std::size_t m = index.dimension();
    const float* data = index.data().data();
    for (std::size_t r = 0; r < index.size(); ++r) {
        const float* row = data + r * m;
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += static_cast<double>(row[j]) * query.values[j];
        scores[r] = std::clamp(dot / qnorm, -1.0, 1.0);
    }
    return scores;
}

std::vector<SearchHit> search_topk(const IndexMatrix& index, const EmbeddingVector& query, std::size_t k) {
    if (k < 1) throw PreconditionError("search_topk: k must be >= 1");
    auto scores = score_all(index, query);
    std::vector<std::size_t> rows(scores.size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    const std::size_t take = std::min(k, rows.size());
    std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& ref = index.sidecar()[rows[i]];
        hits.push_back({rows[i], ref.video_id, ref.segment_idx, scores[rows[i]]});
    }
    return hits;
}

std::vector<VideoHit> search_videos(const IndexMatrix& index, const EmbeddingVector& query, std::size_t k,
                                    VideoAggregation aggregation) {
    if (k < 1) throw PreconditionError("search_videos: k must be >= 1");
    auto scores = score_all(index, query);

    struct Acc {
        VideoHit hit;
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<Acc> acc;
    for (std::size_t r = 0; r < scores.size(); ++r) {
        const auto& ref = index.sidecar()[r];
        auto [it, inserted] = slot.emplace(ref.video_id, acc.size());
        if (inserted) acc.push_back({{ref.video_id, scores[r], ref.segment_idx, r}, 0.0, 0});
        auto& a = acc[it->second];
        if (scores[r] > a.hit.score) a.hit = {ref.video_id, scores[r], ref.segment_idx, r};
        a.sum += scores[r];
        ++a.count;
    }
    std::vector<VideoHit> videos;
    videos.reserve(acc.size());
    for (auto& a : acc) {
        if (aggregation == VideoAggregation::Mean) a.hit.score = a.sum / static_cast<double>(a.count);
        videos.push_back(std::move(a.hit));
    }
    const std::size_t take = std::min(k, videos.size());
    std::partial_sort(videos.begin(), videos.begin() + static_cast<std::ptrdiff_t>(take), videos.end(),
                      [](const VideoHit& a, const VideoHit& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.video_id < b.video_id;
                      });
    videos.resize(take);
    return videos;
}

namespace {

std::uint32_t crc32_of(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

json sidecar_json(const IndexMatrix& index) {
    json rows = json::array();
    for (const auto& ref : index.sidecar())
        rows.push_back({{"video_id", ref.video_id},
                        {"segment_idx", ref.segment_idx},
                        {"start_s", ref.start_s},
                        {"end_s", ref.end_s}});
    json ontology = json::array();
    for (const auto& t : index.ontology()) ontology.push_back({{"name", t.name}, {"count", t.count}});
    return {{"provider_id", index.provider_id()}, {"segments", std::move(rows)}, {"ontology", std::move(ontology)}};
}

IndexError corrupt(const std::string& what) { return {IndexError::Kind::Corrupt, "corrupt index: " + what}; }

} // namespace

std::string serialize_index(const IndexMatrix& index) {
    std::string out(kIndexMagic, 4);
    detail::put_u32(out, kIndexVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(index.size()));
    detail::put_u32(out, static_cast<std::uint32_t>(index.dimension()));
    out.reserve(out.size() + index.data().size() * 4);
    for (float f : index.data()) detail::put_f32(out, f);
    std::string sidecar = sidecar_json(index).dump();
    detail::put_u32(out, static_cast<std::uint32_t>(sidecar.size()));
    out += sidecar;
    detail::put_u32(out, crc32_of(out));
    return out;
}

IndexMatrix deserialize_index(std::string_view bytes) {
    if (bytes.size() < 4 || !std::equal(kIndexMagic, kIndexMagic + 4, bytes.begin()))
        throw IndexError(IndexError::Kind::Version, "not an index file: expected magic \"VCR1\"");
    if (bytes.size() < 16) throw corrupt("truncated header");
    std::uint32_t version = detail::get_u32(bytes, 4);
    if (version != kIndexVersion)
        throw IndexError(IndexError::Kind::Version,
                         "unsupported index version " + std::to_string(version) + " (expected \"VCR1\" v1)");
    const std::uint64_t n = detail::get_u32(bytes, 8);
    const std::uint64_t m = detail::get_u32(bytes, 12);
    if (m != 0 && n > bytes.size() / 4 / m) throw corrupt("truncated matrix");
    const std::uint64_t matrix_end = 16 + n * m * 4;
    if (bytes.size() < matrix_end + 4) throw corrupt("truncated matrix");
    const std::uint64_t sidecar_len = detail::get_u32(bytes, matrix_end);
    const std::uint64_t crc_at = matrix_end + 4 + sidecar_len;
    if (bytes.size() < crc_at + 4) throw corrupt("truncated sidecar");
    if (bytes.size() != crc_at + 4) throw corrupt("trailing bytes after checksum");
    if (detail::get_u32(bytes, crc_at) != crc32_of(bytes.substr(0, crc_at)))
        throw IndexError(IndexError::Kind::Checksum, "index checksum mismatch");

    json side;
    try {
        side = json::parse(bytes.substr(matrix_end + 4, sidecar_len));
        auto provider_id = side.at("provider_id").get<std::string>();
        const auto& rows = side.at("segments");
        if (rows.size() != n) throw corrupt("sidecar has " + std::to_string(rows.size()) + " rows, header says " +
                                            std::to_string(n));
        std::vector<TopicCount> ontology;
        for (const auto& t : side.value("ontology", json::array()))
            ontology.push_back({t.at("name").get<std::string>(), t.at("count").get<std::size_t>()});
        std::vector<float> data(n * m);
        for (std::uint64_t i = 0; i < n * m; ++i) data[i] = detail::get_f32(bytes, 16 + 4 * i);
        std::vector<SegmentRef> refs;
        refs.reserve(n);
        for (const auto& r : rows)
            refs.push_back({r.at("video_id").get<std::string>(), r.at("segment_idx").get<std::uint32_t>(),
                            r.at("start_s").get<double>(), r.at("end_s").get<double>()});
        // Rows were normalized when written and are restored verbatim.
        return IndexMatrix::from_parts(std::move(provider_id), m, std::move(data), std::move(refs),
                                       std::move(ontology));
    } catch (const json::exception& e) {
        throw corrupt(std::string("bad sidecar: ") + e.what());
    }
}

void save_index(const IndexMatrix& index, const std::filesystem::path& path) {
    std::string bytes = serialize_index(index);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IndexError(IndexError::Kind::Io, "cannot write index " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IndexError(IndexError::Kind::Io, "short write to " + path.string());
}

IndexMatrix load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexError(IndexError::Kind::Io, "cannot open index " + path.string());
    std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_index(bytes);
}

} // namespace vcr
