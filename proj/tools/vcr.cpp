// vcr: offline pipeline driver (ingest, consolidate, index, map, search,
// eval) and the HTTP service.

#include "vcr/config.hpp"
#include "vcr/evaluation.hpp"
#include "vcr/fusion.hpp"
#include "vcr/insights.hpp"
#include "vcr/ocr_consolidation.hpp"
#include "vcr/parallel.hpp"
#include "vcr/query_generation.hpp"
#include "vcr/service.hpp"
#include "vcr/topics_map.hpp"
#include "vcr/vector_index.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        auto end = csv.find(',', pos);
        if (end == std::string::npos) end = csv.size();
        std::string item = csv.substr(pos, end - pos);
        auto first = item.find_first_not_of(" \t");
        if (first != std::string::npos) {
            auto last = item.find_last_not_of(" \t");
            out.push_back(item.substr(first, last - first + 1));
        }
        pos = end + 1;
    }
    return out;
}

std::vector<std::size_t> parse_k_list(const std::string& csv) {
    std::vector<std::size_t> out;
    for (const auto& item : split_csv(csv)) {
        std::size_t used = 0;
        unsigned long k = 0;
        try {
            k = std::stoul(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || k == 0) throw vcr::ValidationError("invalid k value '" + item + "'");
        out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty()) throw vcr::ValidationError("empty k list");
    return out;
}

struct IngestArgs {
    std::string archive;
    std::size_t min_topic_count = 10;
    std::string out;
};

int run_ingest(const IngestArgs& a) {
    auto archive = vcr::load_archive(a.archive);
    auto filtered = vcr::filter_ontology(archive, a.min_topic_count);
    vcr::save_archive(filtered, a.out);
    spdlog::info("ingested {} videos; ontology {} -> {} topics (min count {})", filtered.videos.size(),
                 archive.ontology.size(), filtered.ontology.size(), a.min_topic_count);
    return 0;
}

struct ConsolidateArgs {
    std::string in;
    std::string out;
    double dist_threshold = 0.3;
    double gap_s = 5.0;
};

int run_consolidate(const ConsolidateArgs& a) {
    auto archive = vcr::load_archive(a.in);
    std::size_t before = 0, after = 0;
    for (auto& v : archive.videos) {
        auto count_ocr = [](const vcr::VideoRecord& video) {
            return std::count_if(video.insights.begin(), video.insights.end(),
                                 [](const auto& r) { return r.source == vcr::Source::OCR; });
        };
        before += static_cast<std::size_t>(count_ocr(v));
        v = vcr::ocr::consolidate_video(std::move(v), {a.dist_threshold, a.gap_s});
        after += static_cast<std::size_t>(count_ocr(v));
    }
    vcr::save_archive_jsonl(archive, a.out);
    spdlog::info("consolidated {} OCR records into {}", before, after);
    return 0;
}

struct IndexArgs {
    std::string archive;
    std::string provider = "mock";
    std::size_t dimension = 1536;
    std::string tokenizer = "default";
    std::size_t budget_tokens = 4096;
    double time_gap_s = 30.0;
    std::size_t min_topic_count = 10;
    std::string sources = "asr,ocr,caption";
    bool no_consolidate = false;
    double ocr_dist_threshold = 0.3;
    double ocr_gap_s = 5.0;
    std::size_t jobs = vcr::default_jobs();
    std::string cache_dir;
    std::string out;
};

int run_index(const IndexArgs& a) {
    auto archive = vcr::filter_ontology(vcr::load_archive(a.archive), a.min_topic_count);
    vcr::ProviderSettings settings;
    settings.kind = a.provider;
    settings.dimension = a.dimension;
    settings.tokenizer_profile = a.tokenizer;
    if (!a.cache_dir.empty()) settings.cache_dir = a.cache_dir;
    auto provider = vcr::make_provider(settings);
    const auto sources = vcr::SourceSet::parse(a.sources);
    const vcr::SegmentParams seg_params{a.budget_tokens, a.time_gap_s};

    std::vector<vcr::Segment> segments;
    for (const auto& v : archive.videos) {
        const auto video = a.no_consolidate ? v : vcr::ocr::consolidate_video(v, {a.ocr_dist_threshold, a.ocr_gap_s});
        for (auto& s : vcr::fuse_video(video, seg_params, provider->tokenizer(), sources))
            segments.push_back(std::move(s));
    }

    std::vector<vcr::EmbeddingVector> vectors(segments.size());
    vcr::parallel_for(segments.size(), a.jobs,
                      [&](std::size_t i) { vectors[i] = vcr::embed_pooled(*provider, segments[i].render()); });

    vcr::IndexMatrix index(provider->profile().provider_id, provider->profile().dimension);
    for (std::size_t i = 0; i < segments.size(); ++i)
        index.add({segments[i].video_id, segments[i].segment_idx, segments[i].start_s, segments[i].end_s}, vectors[i]);
    index.set_ontology(archive.ontology);
    vcr::save_index(index, a.out);
    spdlog::info("indexed {} segments from {} videos (N={}, M={}, provider {})", segments.size(),
                 archive.videos.size(), index.size(), index.dimension(), index.provider_id());
    return 0;
}

struct MapArgs {
    std::string index;
    std::uint64_t seed = 42;
    std::size_t iterations = 1000;
    double perplexity = 0.0;
    std::string out;
};

int run_map(const MapArgs& a) {
    auto index = vcr::load_index(a.index);
    if (index.ontology().empty()) throw vcr::ValidationError("index carries no ontology; nothing to map");
    auto provider = vcr::provider_for_index(index.provider_id());
    vcr::MapParams params;
    params.seed = a.seed;
    params.iterations = a.iterations;
    if (a.perplexity > 0.0) params.perplexity = a.perplexity;
    auto map = vcr::build_map(index.ontology(), *provider, params);
    vcr::save_map(map, a.out);
    spdlog::info("mapped {} topics (seed {})", map.nodes.size(), a.seed);
    return 0;
}

struct SearchArgs {
    std::string index;
    std::string topics;
    std::string terms;
    std::size_t k = 5;
    std::string archive;
    std::string domain_label = std::string(vcr::kDefaultDomainLabel);
};

int run_search(const SearchArgs& a) {
    auto index = vcr::load_index(a.index);
    auto provider = vcr::provider_for_index(index.provider_id());
    vcr::Archive archive;
    if (!a.archive.empty()) archive = vcr::load_archive(a.archive);
    vcr::TopicSelection selection{split_csv(a.topics), split_csv(a.terms)};
    if (selection.empty()) throw vcr::ValidationError("select at least one topic (--topics) or term (--terms)");

    auto llm = vcr::make_llm_client({});
    auto query = vcr::generate_query(selection, *provider, llm.get(), a.domain_label);
    auto hits = vcr::search_videos(index, query.embedding, a.k);

    std::printf("query_source\t%s\n", std::string(vcr::to_string(query.source)).c_str());
    std::printf("query_text\t%s\n", query.query_text.c_str());
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const auto& ref = index.sidecar()[hits[i].best_row];
        const auto* video = archive.find(hits[i].video_id);
        std::printf("%zu\t%s\t%.6f\t%u\t%.3f-%.3f\t%s\n", i + 1, hits[i].video_id.c_str(), hits[i].score,
                    hits[i].best_segment_idx, ref.start_s, ref.end_s, video ? video->title.c_str() : "");
    }
    return 0;
}

struct EvalArgs {
    std::string index;
    std::string queries;
    std::string k = "1,3,5,10";
    std::string report;
    std::string heatmap;
    std::size_t cutoff = 0;
    std::size_t jobs = vcr::default_jobs();
};

int run_eval(const EvalArgs& a) {
    auto index = vcr::load_index(a.index);
    auto provider = vcr::provider_for_index(index.provider_id());
    auto queries = vcr::load_queries(a.queries);
    auto k_list = parse_k_list(a.k);
    vcr::EvalOptions options;
    options.jobs = a.jobs;
    options.rank_cutoff = a.cutoff;
    auto report = vcr::run_eval(index, queries, *provider, k_list, options);
    {
        std::ofstream out(a.report, std::ios::binary | std::ios::trunc);
        if (!out) throw vcr::Error("cannot write " + a.report);
        out << vcr::report_to_json(report).dump(1) << '\n';
    }
    if (!a.heatmap.empty()) {
        fs::path png = a.heatmap;
        fs::path csv = png;
        csv.replace_extension(".csv");
        vcr::correlation_matrix(index, queries, *provider, csv, png, a.jobs);
    }
    std::printf("Q=%zu MRR=%.6f", report.Q, report.mrr);
    for (auto [k, v] : report.recall_at) std::printf(" R@%zu=%.4f", k, v);
    std::printf("\n");
    if (!report.skipped.empty()) spdlog::warn("{} warning(s): queries skipped", report.skipped.size());
    return 0;
}

int run_serve(const std::string& config_path) {
    auto config = config_path.empty() ? vcr::ServiceConfig{} : vcr::load_service_config(config_path);
    if (config_path.empty()) vcr::apply_env_overrides(config);

    // SIGINT/SIGTERM are consumed by a waiter thread instead of an async handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    httplib::Server server;
    vcr::Service service;
    service.mount(server, config.static_dir);

    std::thread loader([&] {
        try {
            service.load(vcr::load_service_state(config));
            spdlog::info("index loaded from {}", config.index_path.string());
        } catch (const std::exception& e) {
            spdlog::error("failed to load service state: {}", e.what());
            server.stop();
        }
    });
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        if (sig != 0) spdlog::info("signal {} received; shutting down", sig);
        server.stop();
    });

    spdlog::info("listening on {}:{}", config.host, config.port);
    bool ok = server.listen(config.host, config.port);
    loader.join();
    // Wake the waiter if the server stopped for another reason.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return ok && service.loaded() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("vcr"));

    CLI::App app{"Video archive retrieval pipeline"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate an archive and filter rare topics");
    ingest_cmd->add_option("--archive", ingest.archive, "Directory of video JSON files or a JSONL file")->required();
    ingest_cmd->add_option("--min-topic-count", ingest.min_topic_count, "Drop topics with fewer videos")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    ingest_cmd->add_option("--out", ingest.out, "Archive snapshot to write (JSON)")->required();

    ConsolidateArgs consolidate;
    auto* consolidate_cmd = app.add_subcommand("consolidate-ocr", "Merge noisy per-frame OCR into consensus texts");
    consolidate_cmd->add_option("--in", consolidate.in, "Input archive")->required();
    consolidate_cmd->add_option("--out", consolidate.out, "Output JSONL")->required();
    consolidate_cmd->add_option("--dist-threshold", consolidate.dist_threshold)->capture_default_str();
    consolidate_cmd->add_option("--gap-s", consolidate.gap_s)->capture_default_str();

    IndexArgs index;
    auto* index_cmd = app.add_subcommand("index", "Fuse, segment, embed and index an archive");
    index_cmd->add_option("--archive", index.archive)->required();
    index_cmd->add_option("--provider", index.provider)->capture_default_str()->check(CLI::IsMember({"mock", "remote"}));
    index_cmd->add_option("--dimension", index.dimension, "Embedding dimension")->capture_default_str();
    index_cmd->add_option("--tokenizer", index.tokenizer)->capture_default_str();
    index_cmd->add_option("--budget-tokens", index.budget_tokens)->capture_default_str()->check(CLI::PositiveNumber);
    index_cmd->add_option("--time-gap-s", index.time_gap_s)->capture_default_str();
    index_cmd->add_option("--min-topic-count", index.min_topic_count)->capture_default_str()->check(CLI::PositiveNumber);
    index_cmd->add_option("--sources", index.sources, "Modalities to fuse")->capture_default_str();
    index_cmd->add_flag("--no-consolidate-ocr", index.no_consolidate);
    index_cmd->add_option("--ocr-dist-threshold", index.ocr_dist_threshold)->capture_default_str();
    index_cmd->add_option("--ocr-gap-s", index.ocr_gap_s)->capture_default_str();
    index_cmd->add_option("--jobs", index.jobs)->capture_default_str()->check(CLI::PositiveNumber);
    index_cmd->add_option("--cache-dir", index.cache_dir, "Embedding cache directory");
    index_cmd->add_option("--out", index.out)->required();

    MapArgs map;
    auto* map_cmd = app.add_subcommand("map", "Project the ontology onto the Topics-Map");
    map_cmd->add_option("--index", map.index)->required()->check(CLI::ExistingFile);
    map_cmd->add_option("--seed", map.seed)->capture_default_str();
    map_cmd->add_option("--iterations", map.iterations)->capture_default_str();
    map_cmd->add_option("--perplexity", map.perplexity, "Default: min(30, (n-1)/3)");
    map_cmd->add_option("--out", map.out)->required();

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Search the index from a topic selection");
    search_cmd->add_option("--index", search.index)->required()->check(CLI::ExistingFile);
    search_cmd->add_option("--topics", search.topics, "Comma-separated ontology topics");
    search_cmd->add_option("--terms", search.terms, "Comma-separated custom terms");
    search_cmd->add_option("-k", search.k)->capture_default_str()->check(CLI::PositiveNumber);
    search_cmd->add_option("--archive", search.archive, "Archive for titles");
    search_cmd->add_option("--domain-label", search.domain_label)->capture_default_str();

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "MRR / Recall@k over a query set");
    eval_cmd->add_option("--index", eval.index)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--queries", eval.queries)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--k", eval.k)->capture_default_str();
    eval_cmd->add_option("--report", eval.report)->required();
    eval_cmd->add_option("--heatmap", eval.heatmap, "PNG heatmap (a CSV is written next to it)");
    eval_cmd->add_option("--cutoff", eval.cutoff, "Count ranks beyond this as not found (0 = off)");
    eval_cmd->add_option("--jobs", eval.jobs)->capture_default_str()->check(CLI::PositiveNumber);

    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--config", config_path, "JSON config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest_cmd) return run_ingest(ingest);
        if (*consolidate_cmd) return run_consolidate(consolidate);
        if (*index_cmd) return run_index(index);
        if (*map_cmd) return run_map(map);
        if (*search_cmd) return run_search(search);
        if (*eval_cmd) return run_eval(eval);
        if (*serve_cmd) return run_serve(config_path);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
