#include "vcr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace vcr {

std::string_view to_string(Fold fold) {
    switch (fold) {
    case Fold::TRAIN: return "TRAIN";
    case Fold::VALIDATION: return "VALIDATION";
    case Fold::TEST: return "TEST";
    }
    return "?";
}

std::array<std::size_t, 3> SplitAssignment::sizes() const {
    std::array<std::size_t, 3> out{};
    for (auto f : folds) ++out[static_cast<std::size_t>(f)];
    return out;
}

namespace {

void check_ratios(const SplitRatios& ratios) {
    auto r = ratios.as_array();
    for (double x : r)
        if (!(x > 0.0)) throw PreconditionError("split ratios must be positive");
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw PreconditionError("split ratios must sum to 1");
}

} // namespace

std::array<std::size_t, 3> fold_targets(std::size_t n, const SplitRatios& ratios) {
    auto r = ratios.as_array();
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t f = 0; f < 3; ++f) {
        double exact = r[f] * static_cast<double>(n);
        sizes[f] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        remainder[f] = exact - static_cast<double>(sizes[f]);
        assigned += sizes[f];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[order[i % 3]];
    return sizes;
}

SplitAssignment stratified_split(const Archive& archive, const SplitRatios& ratios, std::uint64_t seed) {
    if (archive.videos.empty()) throw PreconditionError("stratified_split: empty archive");
    check_ratios(ratios);
    const std::size_t n = archive.videos.size();
    const auto r = ratios.as_array();

    std::unordered_map<std::string, std::size_t> label_index;
    for (const auto& t : archive.ontology) label_index.emplace(t.name, label_index.size());
    const std::size_t L = label_index.size();
    std::vector<std::vector<std::size_t>> labels(n);
    std::vector<std::size_t> remaining(L, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& t : archive.videos[i].topics)
            if (auto it = label_index.find(t); it != label_index.end()) {
                labels[i].push_back(it->second);
                ++remaining[it->second];
            }

    std::vector<std::array<double, 3>> demand(L);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t f = 0; f < 3; ++f) demand[l][f] = r[f] * static_cast<double>(remaining[l]);
    auto targets = fold_targets(n, ratios);
    std::array<double, 3> capacity{};
    for (std::size_t f = 0; f < 3; ++f) capacity[f] = static_cast<double>(targets[f]);

    std::vector<std::size_t> visit(n);
    std::iota(visit.begin(), visit.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(visit.begin(), visit.end(), rng);

    constexpr std::size_t kUnassigned = 3;
    std::vector<std::size_t> fold(n, kUnassigned);
    auto assign = [&](std::size_t i, std::size_t f) {
        fold[i] = f;
        capacity[f] -= 1.0;
        for (auto l : labels[i]) {
            demand[l][f] -= 1.0;
            --remaining[l];
        }
    };

    while (true) {
        std::size_t label = L;
        for (std::size_t l = 0; l < L; ++l)
            if (remaining[l] > 0 && (label == L || remaining[l] < remaining[label])) label = l;
        if (label == L) break;
        for (auto i : visit) {
            if (fold[i] != kUnassigned) continue;
            if (std::find(labels[i].begin(), labels[i].end(), label) == labels[i].end()) continue;
            std::size_t best = 3;
            for (std::size_t f = 0; f < 3; ++f) {
                if (capacity[f] <= 0.0) continue;
                if (best == 3 || demand[label][f] > demand[label][best] ||
                    (demand[label][f] == demand[label][best] && capacity[f] > capacity[best]))
                    best = f;
            }
            assign(i, best);
        }
    }
    for (auto i : visit) {
        if (fold[i] != kUnassigned) continue;
        std::size_t best = 0;
        for (std::size_t f = 1; f < 3; ++f)
            if (capacity[f] > capacity[best]) best = f;
        assign(i, best);
    }

    SplitAssignment out;
    out.ratios = ratios;
    out.seed = seed;
    out.folds.reserve(n);
    for (auto f : fold) out.folds.push_back(static_cast<Fold>(f));
    return out;
}

} // namespace vcr
