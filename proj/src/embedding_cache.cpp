#include "vcr/remote_provider.hpp"

#include "binary_io.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace vcr {

namespace fs = std::filesystem;
using nlohmann::json;

EmbeddingCache::EmbeddingCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path EmbeddingCache::path_for(const std::string& provider_id, std::string_view text) const {
    std::string key = provider_id;
    key.push_back('\0');
    key.append(text);
    std::string digest = sha256_hex(key);
    return dir_ / digest.substr(0, 2) / (digest + ".vec");
}

std::mutex& EmbeddingCache::stripe(const std::string& key) const {
    return stripes_[std::hash<std::string>{}(key) % stripes_.size()];
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& provider_id,
                                                   std::string_view text) const {
    auto path = path_for(provider_id, text);
    std::lock_guard lock(stripe(path.string()));
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    auto newline = content.find('\n');
    try {
        if (newline == std::string::npos) throw std::runtime_error("missing header");
        json header = json::parse(content.substr(0, newline));
        auto dim = header.at("dimension").get<std::size_t>();
        if (header.at("provider_id").get<std::string>() != provider_id)
            throw std::runtime_error("provider mismatch");
        if (content.size() - newline - 1 != dim * 4) throw std::runtime_error("truncated payload");
        EmbeddingVector v{std::vector<float>(dim), provider_id};
        for (std::size_t i = 0; i < dim; ++i) v.values[i] = detail::get_f32(content, newline + 1 + 4 * i);
        return v;
    } catch (const std::exception& e) {
        spdlog::warn("ignoring corrupt cache entry {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

void EmbeddingCache::put(std::string_view text, const EmbeddingVector& vector) {
    auto path = path_for(vector.provider_id, text);
    std::string payload =
        json{{"provider_id", vector.provider_id}, {"dimension", vector.dimension()}}.dump();
    payload.push_back('\n');
    for (float f : vector.values) detail::put_f32(payload, f);

    std::lock_guard lock(stripe(path.string()));
    fs::create_directories(path.parent_path());
    std::ostringstream tmp_name;
    tmp_name << path.filename().string() << ".tmp." << std::this_thread::get_id();
    auto tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write cache entry " + tmp.string());
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    }
    fs::rename(tmp, path);
}

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                 std::shared_ptr<EmbeddingCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

EmbeddingVector CachingProvider::embed(std::string_view text) {
    return embed_batch({std::string(text)}).front();
}

std::vector<EmbeddingVector> CachingProvider::embed_batch(const std::vector<std::string>& texts) {
    const auto& id = inner_->profile().provider_id;
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> misses;
    std::vector<std::size_t> miss_index;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (auto hit = cache_->get(id, texts[i])) {
            out[i] = std::move(*hit);
        } else {
            misses.push_back(texts[i]);
            miss_index.push_back(i);
        }
    }
    if (!misses.empty()) {
        auto fresh = inner_->embed_batch(misses);
        for (std::size_t m = 0; m < fresh.size(); ++m) {
            cache_->put(misses[m], fresh[m]);
            out[miss_index[m]] = std::move(fresh[m]);
        }
    }
    return out;
}

} // namespace vcr
