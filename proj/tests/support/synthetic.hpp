#pragma once

#include "vcr/evaluation.hpp"
#include "vcr/insights.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace vcr::testing {

// Word unique per (group, index): "w<group>x<index>".
std::string word(std::size_t group, std::size_t index);

InsightRecord insight(Source source, std::string text, double start_s, double end_s = -1.0);

VideoRecord make_video(std::string id, std::vector<std::string> topics = {},
                       std::vector<InsightRecord> insights = {});

// Each video gets `words_per_video` words no other video uses, spoken in ASR
// lines of `words_per_line`.
struct DisjointCorpus {
    Archive archive;
    std::vector<std::vector<std::string>> vocab; // parallel to videos
};
DisjointCorpus disjoint_corpus(std::size_t videos, std::size_t words_per_video, std::size_t words_per_line,
                               std::uint64_t seed);

// Queries built from random subsets of each video's own vocabulary.
QuerySet self_queries(const DisjointCorpus& corpus, std::size_t words_per_query, std::uint64_t seed);

// Videos in groups share their ASR vocabulary; each video's OCR words are its own.
// Queries draw half their words from each channel.
struct MultimodalCorpus {
    Archive archive;
    QuerySet queries;
};
MultimodalCorpus multimodal_corpus(std::size_t groups, std::size_t per_group, std::uint64_t seed);

// Random insights across all three sources, with punctuation, unicode, long
// lines and simultaneous starts.
VideoRecord random_video(const std::string& id, std::mt19937_64& rng);

// Replaces each character with a different uppercase letter or digit with
// probability `rate`.
std::string corrupt(const std::string& text, double rate, std::mt19937_64& rng);

// n videos, labels "L00".."L<labels-1>", each video carrying 1-3 labels drawn
// with skewed frequencies.
Archive labeled_archive(std::size_t videos, std::size_t labels, std::uint64_t seed);

// Points drawn around `clusters` centers spaced `separation` apart.
struct GaussianBlobs {
    std::vector<std::vector<double>> points;
    std::vector<int> labels;
};
GaussianBlobs gaussian_blobs(std::size_t clusters, std::size_t per_cluster, std::size_t dim, double separation,
                             std::uint64_t seed);

// Writes each video to dir/<id>.json.
void write_archive_dir(const Archive& archive, const std::filesystem::path& dir);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "vcr-test");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Runs a shell command; stdout is captured into `out` when given. Returns the exit status.
int run_command(const std::string& command, std::string* out = nullptr);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

} // namespace vcr::testing
