#pragma once

#include "vcr/error.hpp"
#include "vcr/tokenizer.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vcr {

struct EmbeddingVector {
    std::vector<float> values;
    std::string provider_id;

    std::size_t dimension() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

struct ProviderProfile {
    std::string provider_id;
    std::size_t dimension = 0;
    std::size_t max_input_tokens = 8191;
    std::size_t window_tokens = 512;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual const ProviderProfile& profile() const = 0;
    virtual const Tokenizer& tokenizer() const { return default_tokenizer(); }

    // Input must fit max_input_tokens; longer texts go through embed_pooled.
    virtual EmbeddingVector embed(std::string_view text) = 0;
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);
};

// Seed mixed into every token hash of the mock provider. Changing it changes
// every mock vector, so it is part of the mock's provider id.
inline constexpr std::uint64_t kMockHashSeed = 0x5643523153454544ull; // "VCR1SEED"

// FNV-1a 64 over the bytes, xor the seed, then a splitmix64 finalizer.
std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed = kMockHashSeed);

// Hashed bag of tokens: ASCII-lowercase the text, tokenize with the active
// profile, add 1 at stable_hash64(token) % M for every token. The raw count
// vector is returned; cosine does the normalization.
class MockProvider final : public EmbeddingProvider {
public:
    explicit MockProvider(std::size_t dimension = 1536,
                          std::shared_ptr<const Tokenizer> tokenizer = nullptr,
                          std::size_t window_tokens = 512, std::size_t max_input_tokens = 8191);

    const ProviderProfile& profile() const override { return profile_; }
    const Tokenizer& tokenizer() const override { return *tokenizer_; }
    EmbeddingVector embed(std::string_view text) override;

    std::size_t bucket(std::string_view lowered_token) const;

private:
    ProviderProfile profile_;
    std::shared_ptr<const Tokenizer> tokenizer_;
};

// Splits the text into consecutive non-overlapping windows of window_tokens,
// embeds each and returns the component-wise mean. A text that fits in one
// window is embedded directly.
EmbeddingVector embed_pooled(EmbeddingProvider& provider, std::string_view text);

// Window texts as used by embed_pooled (exposed for tests and diagnostics).
std::vector<std::string> pooling_windows(const Tokenizer& tokenizer, std::string_view text,
                                         std::size_t window_tokens);

// dot(a,b) / (|a||b|), or 0 when either norm is zero. Throws DimensionMismatch.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Provider ids look like "mock-<M>" or "remote:<model>".
bool is_mock_provider_id(std::string_view provider_id);
std::string mock_provider_id(std::size_t dimension);

} // namespace vcr
