#include "vcr/tsne.hpp"

#include "vcr/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace vcr {

double default_perplexity(std::size_t n) {
    return std::min(30.0, (static_cast<double>(n) - 1.0) / 3.0);
}

std::vector<double> conditional_affinities(const std::vector<double>& sq_dist, std::size_t n, double perplexity) {
    constexpr double kTolerance = 1e-5;
    constexpr int kMaxSteps = 50;
    const double target = std::log(perplexity);
    std::vector<double> p(n * n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double lo = -std::numeric_limits<double>::max();
        double hi = std::numeric_limits<double>::max();
        const double* d = &sq_dist[i * n];
        double* row = &p[i * n];
        for (int step = 0; step < kMaxSteps; ++step) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = j == i ? 0.0 : std::exp(-beta * d[j]);
                sum += row[j];
            }
            if (sum == 0.0) sum = DBL_MIN;
            double weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j) weighted += d[j] * row[j];
            double entropy = std::log(sum) + beta * weighted / sum;
            for (std::size_t j = 0; j < n; ++j) row[j] /= sum;

            double diff = entropy - target;
            if (std::abs(diff) < kTolerance) break;
            if (diff > 0) {
                lo = beta;
                beta = hi == std::numeric_limits<double>::max() ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = lo == -std::numeric_limits<double>::max() ? beta / 2.0 : (beta + lo) / 2.0;
            }
        }
    }
    return p;
}

namespace {

double kl_divergence(const std::vector<double>& p, const std::vector<Point2>& y) {
    const std::size_t n = y.size();
    double sum_q = 0.0;
    std::vector<double> num(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double dx = y[i].x - y[j].x, dy = y[i].y - y[j].y;
            num[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
            sum_q += num[i * n + j];
        }
    double kl = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
        if (p[k] <= 0.0) continue;
        double q = std::max(num[k] / sum_q, DBL_MIN);
        kl += p[k] * std::log((p[k] + FLT_MIN) / (q + FLT_MIN));
    }
    return kl;
}

} // namespace

TsneResult project_tsne(const std::vector<std::vector<double>>& vectors, const TsneParams& params) {
    const std::size_t n = vectors.size();
    if (n < 4) throw PreconditionError("t-SNE needs at least 4 points, got " + std::to_string(n));
    const double perplexity = params.perplexity.value_or(default_perplexity(n));
    if (!(perplexity > 0.0) || perplexity > (static_cast<double>(n) - 1.0) / 3.0)
        throw PreconditionError("t-SNE perplexity " + std::to_string(perplexity) +
                                " must be in (0, (n - 1) / 3] for n = " + std::to_string(n));
    const std::size_t dim = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != dim) throw DimensionMismatch("t-SNE input vectors differ in dimension");

    std::vector<double> sq_dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                double d = vectors[i][k] - vectors[j][k];
                s += d * d;
            }
            sq_dist[i * n + j] = sq_dist[j * n + i] = s;
        }

    // Symmetrize and normalize to a joint distribution.
    std::vector<double> p = conditional_affinities(sq_dist, n, perplexity);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = p[i * n + j] + p[j * n + i];
            p[i * n + j] = p[j * n + i] = s;
            total += 2.0 * s;
        }
    for (auto& v : p) v /= total;

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> gauss(0.0, params.init_sigma);
    const double eta = params.learning_rate.value_or(static_cast<double>(n) / params.exaggeration);
    std::vector<Point2> y(n), update(n);
    for (auto& pt : y) {
        pt.x = gauss(rng);
        pt.y = gauss(rng);
    }

    TsneResult result;
    std::vector<double> num(n * n);
    std::vector<Point2> grad(n);
    for (std::size_t iter = 0; iter < params.iterations; ++iter) {
        const double exaggeration = iter < params.exaggeration_iters ? params.exaggeration : 1.0;
        const double momentum = iter < params.momentum_switch_iter ? params.initial_momentum : params.final_momentum;
        if (iter == params.exaggeration_iters) std::fill(update.begin(), update.end(), Point2{});

        double sum_q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = y[i].x - y[j].x, dy = y[i].y - y[j].y;
                double w = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = num[j * n + i] = w;
                sum_q += 2.0 * w;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                double w = num[i * n + j];
                double mult = (exaggeration * p[i * n + j] - w / sum_q) * w;
                gx += mult * (y[i].x - y[j].x);
                gy += mult * (y[i].y - y[j].y);
            }
            grad[i] = {4.0 * gx, 4.0 * gy};
        }

        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            update[i].x = momentum * update[i].x - eta * grad[i].x;
            update[i].y = momentum * update[i].y - eta * grad[i].y;
            y[i].x += update[i].x;
            y[i].y += update[i].y;
            mx += y[i].x;
            my += y[i].y;
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (auto& pt : y) {
            pt.x -= mx;
            pt.y -= my;
        }

        const std::size_t done = iter + 1;
        if (params.kl_every > 0 && done >= params.exaggeration_iters && done % params.kl_every == 0)
            result.kl_trace.emplace_back(done, kl_divergence(p, y));
    }
    result.positions = std::move(y);
    return result;
}

} // namespace vcr
