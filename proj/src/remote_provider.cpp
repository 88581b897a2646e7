#include "vcr/remote_provider.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

namespace vcr {

using nlohmann::json;

HttpEndpoint HttpEndpoint::parse(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw Error("endpoint URL lacks a scheme: " + std::string(url));
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::string post_json_with_retry(const HttpEndpoint& endpoint, const std::string& token,
                                 const std::string& body, const RetryPolicy& retry,
                                 std::chrono::seconds timeout) {
    httplib::Client client(endpoint.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    auto backoff = retry.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        auto res = client.Post(endpoint.path, headers, body, "application/json");
        int status = res ? res->status : -1;
        if (res && status >= 200 && status < 300) return res->body;

        bool retryable = !res || status == 429 || status >= 500;
        std::string what = res ? "HTTP " + std::to_string(status) + " from " + endpoint.scheme_host_port +
                                     endpoint.path
                               : "transport error (" + httplib::to_string(res.error()) + ") reaching " +
                                     endpoint.scheme_host_port + endpoint.path;
        if (!retryable || attempt >= retry.max_attempts)
            throw RemoteError(what + " after " + std::to_string(attempt) + " attempt(s)", status, attempt,
                              retryable);
        spdlog::warn("{}; retrying in {} ms", what, backoff.count());
        std::this_thread::sleep_for(backoff);
        backoff = std::min(retry.max_backoff, std::chrono::milliseconds(static_cast<long long>(
                                                  static_cast<double>(backoff.count()) * retry.multiplier)));
    }
}

RemoteConfig RemoteConfig::from_env() {
    RemoteConfig config;
    if (const char* e = std::getenv("VCR_EMBED_ENDPOINT")) config.endpoint = e;
    if (const char* t = std::getenv("VCR_EMBED_TOKEN")) config.token = t;
    return config;
}

RemoteProvider::RemoteProvider(RemoteConfig config)
    : config_(std::move(config)), in_flight_(std::max<std::ptrdiff_t>(1, config_.max_in_flight)) {
    if (config_.endpoint.empty())
        throw Error("remote embedding provider needs an endpoint (VCR_EMBED_ENDPOINT)");
    endpoint_ = HttpEndpoint::parse(config_.endpoint);
    profile_.provider_id = "remote:" + config_.model;
    profile_.dimension = config_.dimension;
    profile_.max_input_tokens = config_.max_input_tokens;
    profile_.window_tokens = config_.window_tokens;
    if (config_.batch_size < 1) config_.batch_size = 1;
}

EmbeddingVector RemoteProvider::embed(std::string_view text) {
    return embed_batch({std::string(text)}).front();
}

std::vector<EmbeddingVector> RemoteProvider::embed_batch(const std::vector<std::string>& texts) {
    for (const auto& t : texts)
        if (auto n = tokenizer().count(t); n > profile_.max_input_tokens)
            throw PreconditionError("embed: input of " + std::to_string(n) +
                                    " tokens exceeds max_input_tokens " +
                                    std::to_string(profile_.max_input_tokens));
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t first = 0; first < texts.size(); first += config_.batch_size) {
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(first),
                                       texts.begin() + static_cast<std::ptrdiff_t>(
                                                           std::min(first + config_.batch_size, texts.size())));
        for (auto& v : request(batch)) out.push_back(std::move(v));
    }
    return out;
}

std::vector<EmbeddingVector> RemoteProvider::request(const std::vector<std::string>& texts) {
    std::string body = json{{"input", texts}, {"model", config_.model}}.dump();
    std::string response;
    {
        in_flight_.acquire();
        struct Release {
            std::counting_semaphore<1024>& s;
            ~Release() { s.release(); }
        } release{in_flight_};
        response = post_json_with_retry(endpoint_, config_.token, body, config_.retry, config_.timeout);
    }

    json doc;
    try {
        doc = json::parse(response);
    } catch (const json::parse_error& e) {
        throw RemoteError(std::string("malformed embedding response: ") + e.what(), 200, 1, false);
    }
    if (!doc.contains("data") || !doc["data"].is_array() || doc["data"].size() != texts.size())
        throw RemoteError("embedding response lacks one 'data' entry per input", 200, 1, false);

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& item : doc["data"]) {
        EmbeddingVector v;
        v.provider_id = profile_.provider_id;
        try {
            v.values = item.at("embedding").get<std::vector<float>>();
        } catch (const json::exception& e) {
            throw RemoteError(std::string("bad embedding entry: ") + e.what(), 200, 1, false);
        }
        if (v.values.size() != profile_.dimension)
            throw DimensionMismatch("remote provider returned dimension " + std::to_string(v.values.size()) +
                                    ", expected " + std::to_string(profile_.dimension));
        out.push_back(std::move(v));
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

} // namespace vcr
