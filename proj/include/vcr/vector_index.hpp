#pragma once

#include "vcr/embedding.hpp"
#include "vcr/fusion.hpp"
#include "vcr/insights.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vcr {

class IndexError : public Error {
public:
    enum class Kind { Io, Corrupt, Version, Checksum };

    IndexError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct SegmentRef {
    std::string video_id;
    std::uint32_t segment_idx = 0;
    double start_s = 0.0;
    double end_s = 0.0;

    bool operator==(const SegmentRef&) const = default;
};

struct SearchHit {
    std::size_t row = 0;
    std::string video_id;
    std::uint32_t segment_idx = 0;
    double score = 0.0;

    bool operator==(const SearchHit&) const = default;
};

struct VideoHit {
    std::string video_id;
    double score = 0.0;
    std::uint32_t best_segment_idx = 0;
    std::size_t best_row = 0;

    bool operator==(const VideoHit&) const = default;
};

enum class VideoAggregation { Max, Mean };

// N x M row-major matrix of L2-normalized segment embeddings plus a sidecar
// describing which segment each row came from. Immutable once built, so
// concurrent searches are safe.
class IndexMatrix {
public:
    IndexMatrix() = default;
    IndexMatrix(std::string provider_id, std::size_t dimension);

    // Rows are taken as stored (already normalized).
    static IndexMatrix from_parts(std::string provider_id, std::size_t dimension, std::vector<float> data,
                                  std::vector<SegmentRef> sidecar, std::vector<TopicCount> ontology);

    std::size_t size() const { return sidecar_.size(); }
    std::size_t dimension() const { return dimension_; }
    const std::string& provider_id() const { return provider_id_; }
    const std::vector<SegmentRef>& sidecar() const { return sidecar_; }
    std::span<const float> row(std::size_t r) const;
    const std::vector<float>& data() const { return data_; }

    // Ontology carried along so downstream stages (map, service) need only the index file.
    const std::vector<TopicCount>& ontology() const { return ontology_; }
    void set_ontology(std::vector<TopicCount> ontology) { ontology_ = std::move(ontology); }

    // Video ids in first-appearance row order.
    std::vector<std::string> video_ids() const;

    // Normalizes and appends. Zero vectors are stored as zero rows.
    void add(const SegmentRef& ref, const EmbeddingVector& vector);

    bool operator==(const IndexMatrix&) const = default;

private:
    std::string provider_id_;
    std::size_t dimension_ = 0;
    std::vector<float> data_;
    std::vector<SegmentRef> sidecar_;
    std::vector<TopicCount> ontology_;
};

IndexMatrix build_index(const std::vector<std::pair<Segment, EmbeddingVector>>& segments);

// Exact cosine scores of the query against every row, in row order.
std::vector<double> score_all(const IndexMatrix& index, const EmbeddingVector& query);

// min(k, N) hits sorted by (score desc, row asc).
std::vector<SearchHit> search_topk(const IndexMatrix& index, const EmbeddingVector& query, std::size_t k);

// Per-video score is the max (or mean) of that video's segment scores; top k
// videos sorted by (score desc, video_id asc).
std::vector<VideoHit> search_videos(const IndexMatrix& index, const EmbeddingVector& query, std::size_t k,
                                    VideoAggregation aggregation = VideoAggregation::Max);

// File layout: "VCR1", u32 version=1, u32 N, u32 M, N*M f32 rows, u32 sidecar
// length + JSON sidecar, u32 CRC32 of every preceding byte. Little-endian.
inline constexpr char kIndexMagic[4] = {'V', 'C', 'R', '1'};
inline constexpr std::uint32_t kIndexVersion = 1;

std::string serialize_index(const IndexMatrix& index);
IndexMatrix deserialize_index(std::string_view bytes);
void save_index(const IndexMatrix& index, const std::filesystem::path& path);
IndexMatrix load_index(const std::filesystem::path& path);

} // namespace vcr
