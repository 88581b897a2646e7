#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace vcr {

struct TsneParams {
    std::optional<double> perplexity; // default_perplexity(n) when unset
    std::size_t iterations = 1000;
    std::optional<double> learning_rate; // n / exaggeration when unset
    std::uint64_t seed = 42;
    double exaggeration = 12.0;
    std::size_t exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch_iter = 250;
    double init_sigma = 1e-4;
    std::size_t kl_every = 50;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct TsneResult {
    std::vector<Point2> positions;
    // (iteration, KL(P||Q)) sampled every kl_every iterations once
    // exaggeration has ended.
    std::vector<std::pair<std::size_t, double>> kl_trace;
};

// min(30, (n - 1) / 3)
double default_perplexity(std::size_t n);

// Row-conditional Gaussian affinities p(j|i), each row's bandwidth bisected
// until its entropy matches log(perplexity) within 1e-5 (at most 50 steps).
// `sq_dist` is the n x n squared-distance matrix, row-major.
std::vector<double> conditional_affinities(const std::vector<double>& sq_dist, std::size_t n, double perplexity);

// Exact t-SNE into 2D. Requires n >= 4 and 0 < perplexity <= (n - 1) / 3.
// Plain momentum descent; the velocity is reset when exaggeration ends.
// Deterministic for a given seed.
TsneResult project_tsne(const std::vector<std::vector<double>>& vectors, const TsneParams& params = {});

} // namespace vcr
