#include "vcr/embedding.hpp"

#include <cmath>
#include <string>

namespace vcr {

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    h ^= seed;
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

std::string mock_provider_id(std::size_t dimension) { return "mock-" + std::to_string(dimension); }

bool is_mock_provider_id(std::string_view provider_id) { return provider_id.starts_with("mock-"); }

MockProvider::MockProvider(std::size_t dimension, std::shared_ptr<const Tokenizer> tokenizer,
                           std::size_t window_tokens, std::size_t max_input_tokens)
    : tokenizer_(tokenizer ? std::move(tokenizer) : make_tokenizer("default")) {
    if (dimension < 1) throw PreconditionError("mock provider: dimension must be >= 1");
    if (window_tokens < 1) throw PreconditionError("mock provider: window_tokens must be >= 1");
    profile_.provider_id = mock_provider_id(dimension);
    if (tokenizer_->name() != "default") profile_.provider_id += "-" + tokenizer_->name();
    profile_.dimension = dimension;
    profile_.window_tokens = window_tokens;
    profile_.max_input_tokens = max_input_tokens;
}

std::size_t MockProvider::bucket(std::string_view lowered_token) const {
    return static_cast<std::size_t>(stable_hash64(lowered_token) % profile_.dimension);
}

EmbeddingVector MockProvider::embed(std::string_view text) {
    std::string lowered(text);
    for (auto& c : lowered)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    auto tokens = tokenizer_->tokenize(lowered);
    if (tokens.size() > profile_.max_input_tokens)
        throw PreconditionError("embed: input of " + std::to_string(tokens.size()) +
                                " tokens exceeds max_input_tokens " +
                                std::to_string(profile_.max_input_tokens));
    EmbeddingVector out{std::vector<float>(profile_.dimension, 0.0f), profile_.provider_id};
    std::string_view view(lowered);
    for (const auto& t : tokens) out.values[bucket(view.substr(t.begin, t.end - t.begin))] += 1.0f;
    return out;
}

std::vector<std::string> pooling_windows(const Tokenizer& tokenizer, std::string_view text,
                                         std::size_t window_tokens) {
    if (window_tokens < 1) throw PreconditionError("pooling window must be >= 1 token");
    auto tokens = tokenizer.tokenize(text);
    if (tokens.size() <= window_tokens) return {std::string(text)};
    std::vector<std::string> windows;
    for (std::size_t first = 0; first < tokens.size(); first += window_tokens) {
        std::size_t last = std::min(first + window_tokens, tokens.size()) - 1;
        windows.emplace_back(text.substr(tokens[first].begin, tokens[last].end - tokens[first].begin));
    }
    return windows;
}

EmbeddingVector embed_pooled(EmbeddingProvider& provider, std::string_view text) {
    const auto& profile = provider.profile();
    auto windows = pooling_windows(provider.tokenizer(), text, profile.window_tokens);
    if (windows.size() == 1) return provider.embed(windows.front());

    auto vectors = provider.embed_batch(windows);
    std::vector<double> sum(profile.dimension, 0.0);
    for (const auto& v : vectors) {
        if (v.dimension() != profile.dimension)
            throw DimensionMismatch("embed_pooled: provider returned dimension " +
                                    std::to_string(v.dimension()));
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v.values[i];
    }
    EmbeddingVector out{std::vector<float>(profile.dimension), profile.provider_id};
    const double n = static_cast<double>(vectors.size());
    for (std::size_t i = 0; i < sum.size(); ++i) out.values[i] = static_cast<float>(sum[i] / n);
    return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw DimensionMismatch("cosine: dimensions " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine(std::span<const float>(a.values), std::span<const float>(b.values));
}

} // namespace vcr
