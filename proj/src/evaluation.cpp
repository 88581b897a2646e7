#include "vcr/evaluation.hpp"

#include "vcr/parallel.hpp"

#include <png.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <unordered_map>
#include <unordered_set>

namespace vcr {

namespace fs = std::filesystem;
using nlohmann::json;

QuerySet load_queries(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open query set " + path.string());
    QuerySet out;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            json doc = json::parse(line);
            EvalQuery q{doc.at("query_id").get<std::string>(), doc.at("query_text").get<std::string>(),
                        doc.at("correct_video_id").get<std::string>()};
            if (!ids.insert(q.query_id).second)
                throw ValidationError(where + ": duplicate query_id \"" + q.query_id + "\"");
            out.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    if (out.empty()) throw ValidationError(path.string() + ": query set is empty");
    return out;
}

void save_queries(const QuerySet& queries, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& q : queries)
        out << json{{"query_id", q.query_id}, {"query_text", q.query_text}, {"correct_video_id", q.correct_video_id}}
                   .dump()
            << '\n';
}

double mrr(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw PreconditionError("mrr: empty rank list");
    double sum = 0.0;
    for (auto r : ranks)
        if (r > 0) sum += 1.0 / static_cast<double>(r);
    return sum / static_cast<double>(ranks.size());
}

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k) {
    if (ranks.empty()) throw PreconditionError("recall_at_k: empty rank list");
    if (k < 1) throw PreconditionError("recall_at_k: k must be >= 1");
    auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r >= 1 && r <= k; });
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

json report_to_json(const EvalReport& report) {
    json recall = json::object();
    for (auto [k, v] : report.recall_at) recall[std::to_string(k)] = v;
    return {{"Q", report.Q},
            {"mrr", report.mrr},
            {"mean_rank", report.mean_rank ? json(*report.mean_rank) : json(nullptr)},
            {"recall_at", std::move(recall)},
            {"ranks", report.ranks},
            {"skipped", report.skipped}};
}

namespace {

void check_provider(const IndexMatrix& index, EmbeddingProvider& provider) {
    if (index.size() > 0 && index.provider_id() != provider.profile().provider_id)
        throw ProviderMismatch("index built with '" + index.provider_id() + "' but evaluating with '" +
                               provider.profile().provider_id + "'");
}

} // namespace

EvalReport run_eval(const IndexMatrix& index, const QuerySet& queries, EmbeddingProvider& provider,
                    const std::vector<std::size_t>& k_list, const EvalOptions& options) {
    check_provider(index, provider);
    const auto video_ids = index.video_ids();
    const std::unordered_set<std::string> known(video_ids.begin(), video_ids.end());

    std::vector<const EvalQuery*> active;
    EvalReport report;
    for (const auto& q : queries) {
        if (!known.contains(q.correct_video_id)) {
            spdlog::warn("query {}: correct video '{}' is not in the index; skipped", q.query_id, q.correct_video_id);
            report.skipped.push_back(q.query_id);
            continue;
        }
        active.push_back(&q);
    }
    if (active.empty()) throw ValidationError("run_eval: no evaluable queries");

    std::vector<std::size_t> ranks(active.size(), 0);
    parallel_for(active.size(), options.jobs, [&](std::size_t i) {
        auto embedding = embed_pooled(provider, active[i]->query_text);
        auto hits = search_videos(index, embedding, std::max<std::size_t>(video_ids.size(), 1), options.aggregation);
        for (std::size_t pos = 0; pos < hits.size(); ++pos)
            if (hits[pos].video_id == active[i]->correct_video_id) {
                ranks[i] = pos + 1;
                break;
            }
        if (options.rank_cutoff > 0 && ranks[i] > options.rank_cutoff) ranks[i] = 0;
    });

    report.Q = active.size();
    report.ranks = ranks;
    for (const auto* q : active) report.query_ids.push_back(q->query_id);
    report.mrr = mrr(ranks);
    double sum = 0.0;
    std::size_t found = 0;
    for (auto r : ranks)
        if (r > 0) {
            sum += static_cast<double>(r);
            ++found;
        }
    if (found > 0) report.mean_rank = sum / static_cast<double>(found);
    for (auto k : k_list) report.recall_at[k] = recall_at_k(ranks, k);
    return report;
}

ScoreMatrix score_matrix(const IndexMatrix& index, const QuerySet& queries, EmbeddingProvider& provider,
                         std::size_t jobs) {
    if (queries.empty()) throw PreconditionError("correlation matrix: empty query set");
    check_provider(index, provider);
    ScoreMatrix m;
    m.video_ids = index.video_ids();
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t v = 0; v < m.video_ids.size(); ++v) column.emplace(m.video_ids[v], v);
    for (const auto& q : queries) m.query_ids.push_back(q.query_id);
    m.scores.assign(queries.size() * m.video_ids.size(), -1.0);

    const std::size_t V = m.video_ids.size();
    parallel_for(queries.size(), jobs, [&](std::size_t q) {
        auto scores = score_all(index, embed_pooled(provider, queries[q].query_text));
        double* row = &m.scores[q * V];
        for (std::size_t r = 0; r < scores.size(); ++r) {
            auto v = column.at(index.sidecar()[r].video_id);
            row[v] = std::max(row[v], scores[r]);
        }
    });
    return m;
}

void write_matrix_csv(const ScoreMatrix& matrix, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "query_id";
    for (const auto& v : matrix.video_ids) out << ',' << v;
    out << '\n';
    char buf[32];
    for (std::size_t q = 0; q < matrix.query_ids.size(); ++q) {
        out << matrix.query_ids[q];
        for (std::size_t v = 0; v < matrix.video_ids.size(); ++v) {
            std::snprintf(buf, sizeof buf, "%.9f", matrix.at(q, v));
            out << ',' << buf;
        }
        out << '\n';
    }
}

void write_heatmap_png(const ScoreMatrix& matrix, const fs::path& path) {
    const auto height = static_cast<png_uint_32>(matrix.query_ids.size());
    const auto width = static_cast<png_uint_32>(matrix.video_ids.size());
    if (height == 0 || width == 0) throw PreconditionError("heatmap: empty matrix");

    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!file) throw Error("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialization failed");
    }
    std::vector<png_byte> row(width);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng failed writing " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (png_uint_32 q = 0; q < height; ++q) {
        double lo = matrix.at(q, 0), hi = lo;
        for (png_uint_32 v = 0; v < width; ++v) {
            lo = std::min(lo, matrix.at(q, v));
            hi = std::max(hi, matrix.at(q, v));
        }
        for (png_uint_32 v = 0; v < width; ++v) {
            double t = hi > lo ? (matrix.at(q, v) - lo) / (hi - lo) : 0.5;
            row[v] = static_cast<png_byte>(std::lround(t * 255.0));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ScoreMatrix correlation_matrix(const IndexMatrix& index, const QuerySet& queries, EmbeddingProvider& provider,
                               const fs::path& csv_path, const std::optional<fs::path>& png_path,
                               std::size_t jobs) {
    auto m = score_matrix(index, queries, provider, jobs);
    write_matrix_csv(m, csv_path);
    if (png_path) write_heatmap_png(m, *png_path);
    return m;
}

} // namespace vcr
