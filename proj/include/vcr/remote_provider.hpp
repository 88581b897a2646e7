#pragma once

#include "vcr/embedding.hpp"

#include <array>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <semaphore>

namespace vcr {

// Transport, auth or protocol failure talking to an embedding/LLM service.
class RemoteError : public Error {
public:
    RemoteError(const std::string& what, int status, int attempts, bool retryable)
        : Error(what), status_(status), attempts_(attempts), retryable_(retryable) {}

    int status() const { return status_; } // HTTP status, or -1 for transport errors
    int attempts() const { return attempts_; }
    bool retryable() const { return retryable_; }

private:
    int status_;
    int attempts_;
    bool retryable_;
};

struct HttpEndpoint {
    std::string scheme_host_port; // "http://localhost:8080"
    std::string path;             // "/v1/embeddings"

    static HttpEndpoint parse(std::string_view url);
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{8000};
};

// POSTs {"input": [...], "model": id} and reads {"data": [{"embedding": [...]}]}.
// Returns `body` on 2xx; retries transport errors, 429 and 5xx with
// exponential backoff; other statuses fail immediately.
std::string post_json_with_retry(const HttpEndpoint& endpoint, const std::string& token,
                                 const std::string& body, const RetryPolicy& retry,
                                 std::chrono::seconds timeout);

struct RemoteConfig {
    std::string endpoint;                   // VCR_EMBED_ENDPOINT
    std::string token;                      // VCR_EMBED_TOKEN
    std::string model = "text-embedding-ada-002";
    std::size_t dimension = 1536;
    std::size_t max_input_tokens = 8191;
    std::size_t window_tokens = 512;
    std::size_t batch_size = 64;
    std::ptrdiff_t max_in_flight = 4;
    RetryPolicy retry;
    std::chrono::seconds timeout{60};

    // Fills endpoint/token from the environment where unset.
    static RemoteConfig from_env();
};

class RemoteProvider final : public EmbeddingProvider {
public:
    explicit RemoteProvider(RemoteConfig config);

    const ProviderProfile& profile() const override { return profile_; }
    EmbeddingVector embed(std::string_view text) override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::vector<EmbeddingVector> request(const std::vector<std::string>& texts);

    RemoteConfig config_;
    HttpEndpoint endpoint_;
    ProviderProfile profile_;
    std::counting_semaphore<1024> in_flight_;
};

// Content-addressed vector store: one file per (provider_id, text) holding a
// JSON header line {"provider_id","dimension"} followed by little-endian f32s.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path dir);

    std::optional<EmbeddingVector> get(const std::string& provider_id, std::string_view text) const;
    void put(std::string_view text, const EmbeddingVector& vector);

    std::filesystem::path path_for(const std::string& provider_id, std::string_view text) const;

private:
    std::mutex& stripe(const std::string& key) const;

    std::filesystem::path dir_;
    mutable std::array<std::mutex, 64> stripes_;
};

// Serves hits from the cache and forwards misses to the wrapped provider.
class CachingProvider final : public EmbeddingProvider {
public:
    CachingProvider(std::shared_ptr<EmbeddingProvider> inner, std::shared_ptr<EmbeddingCache> cache);

    const ProviderProfile& profile() const override { return inner_->profile(); }
    const Tokenizer& tokenizer() const override { return inner_->tokenizer(); }
    EmbeddingVector embed(std::string_view text) override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::shared_ptr<EmbeddingCache> cache_;
};

// SHA-256 hex digest.
std::string sha256_hex(std::string_view data);

} // namespace vcr
