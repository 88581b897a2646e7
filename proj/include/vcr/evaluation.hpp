#pragma once

#include "vcr/embedding.hpp"
#include "vcr/insights.hpp"
#include "vcr/vector_index.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace vcr {

struct EvalQuery {
    std::string query_id;
    std::string query_text;
    std::string correct_video_id;
};

using QuerySet = std::vector<EvalQuery>;

// JSONL: {"query_id","query_text","correct_video_id"} per line; ids unique.
QuerySet load_queries(const std::filesystem::path& path);
void save_queries(const QuerySet& queries, const std::filesystem::path& path);

// rank 0 means "not found"; it contributes 0. Throws on an empty list.
double mrr(std::span<const std::size_t> ranks);

// Fraction of ranks in [1, k]. Throws on an empty list or k == 0.
double recall_at_k(std::span<const std::size_t> ranks, std::size_t k);

struct EvalReport {
    std::size_t Q = 0;
    double mrr = 0.0;
    std::optional<double> mean_rank; // over found queries only
    std::map<std::size_t, double> recall_at;
    std::vector<std::string> query_ids;
    std::vector<std::size_t> ranks;
    std::vector<std::string> skipped; // queries excluded (unknown correct video)
};

// {"Q","mrr","mean_rank","recall_at":{"1":..},"ranks":[..],"skipped":[..]}
nlohmann::json report_to_json(const EvalReport& report);

struct EvalOptions {
    std::size_t jobs = 1;
    std::size_t rank_cutoff = 0; // 0: rank over every video
    VideoAggregation aggregation = VideoAggregation::Max;
};

// Embeds each query with embed_pooled, ranks all videos and records the
// 1-based position of the correct one.
EvalReport run_eval(const IndexMatrix& index, const QuerySet& queries, EmbeddingProvider& provider,
                    const std::vector<std::size_t>& k_list, const EvalOptions& options = {});

// Q x V query-vs-video scores (per-video max over segments), columns in the
// index's video order.
struct ScoreMatrix {
    std::vector<std::string> query_ids;
    std::vector<std::string> video_ids;
    std::vector<double> scores; // row-major

    double at(std::size_t q, std::size_t v) const { return scores[q * video_ids.size() + v]; }
};

ScoreMatrix score_matrix(const IndexMatrix& index, const QuerySet& queries, EmbeddingProvider& provider,
                         std::size_t jobs = 1);

void write_matrix_csv(const ScoreMatrix& matrix, const std::filesystem::path& path);

// Grayscale, each row min-max normalized (constant rows render mid-gray).
void write_heatmap_png(const ScoreMatrix& matrix, const std::filesystem::path& path);

// Writes the CSV and, when png_path is given, the heatmap.
ScoreMatrix correlation_matrix(const IndexMatrix& index, const QuerySet& queries, EmbeddingProvider& provider,
                               const std::filesystem::path& csv_path,
                               const std::optional<std::filesystem::path>& png_path = std::nullopt,
                               std::size_t jobs = 1);

enum class Fold : std::uint8_t { TRAIN = 0, VALIDATION = 1, TEST = 2 };
std::string_view to_string(Fold fold);

struct SplitRatios {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;

    std::array<double, 3> as_array() const { return {train, validation, test}; }
};

struct SplitAssignment {
    std::vector<Fold> folds; // parallel to archive.videos
    SplitRatios ratios;
    std::uint64_t seed = 0;

    std::array<std::size_t, 3> sizes() const;
};

// Integer fold sizes summing to n (largest remainder, ties in fold order).
std::array<std::size_t, 3> fold_targets(std::size_t n, const SplitRatios& ratios);

// Iterative stratification over the archive's ontology labels. Fold sizes
// equal fold_targets exactly; the seed only shuffles the example visit order.
SplitAssignment stratified_split(const Archive& archive, const SplitRatios& ratios = {}, std::uint64_t seed = 0);

} // namespace vcr
