#include "vcr/query_generation.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <unordered_set>

namespace vcr {

using nlohmann::json;

std::vector<std::string> TopicSelection::all() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto* list : {&ontology_topics, &custom_terms})
        for (const auto& t : *list)
            if (!t.empty() && seen.insert(t).second) out.push_back(t);
    return out;
}

std::string_view to_string(QuerySource source) { return source == QuerySource::LLM ? "LLM" : "TEMPLATE"; }

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

} // namespace

std::string build_prompt(const TopicSelection& selection, std::string_view domain_label) {
    auto topics = selection.all();
    if (topics.empty()) throw PreconditionError("build_prompt: empty topic selection");
    return "Write a full description for this " + std::string(domain_label) +
           " which discusses the following topics " + join(topics, ", ") + ".";
}

std::string template_query(const TopicSelection& selection) {
    auto topics = selection.all();
    if (topics.empty()) throw PreconditionError("template_query: empty topic selection");
    std::vector<std::string> themes;
    themes.reserve(topics.size());
    for (const auto& t : topics) themes.push_back("the theme of " + t);
    return "This talk discusses " + join(topics, ", ") + ". It explores " + join(themes, ", ") + ".";
}

LlmConfig LlmConfig::from_env() {
    LlmConfig config;
    if (const char* e = std::getenv("VCR_LLM_ENDPOINT")) config.endpoint = e;
    if (const char* t = std::getenv("VCR_LLM_TOKEN")) config.token = t;
    return config;
}

HttpLlmClient::HttpLlmClient(LlmConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw Error("LLM client needs an endpoint (VCR_LLM_ENDPOINT)");
    endpoint_ = HttpEndpoint::parse(config_.endpoint);
}

std::string HttpLlmClient::complete(const std::string& prompt) {
    json body{{"model", config_.model}, {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    std::string response = post_json_with_retry(endpoint_, config_.token, body.dump(), config_.retry, config_.timeout);
    try {
        return json::parse(response).at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw RemoteError(std::string("malformed chat completion: ") + e.what(), 200, 1, false);
    }
}

CachedLlmClient::CachedLlmClient(std::shared_ptr<LlmClient> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string CachedLlmClient::complete(const std::string& prompt) {
    const std::string key = sha256_hex(inner_->model() + '\0' + "params=endpoint-defaults" + '\0' + prompt);
    const auto path = dir_ / (key + ".json");
    {
        std::lock_guard lock(mutex_);
        std::ifstream in(path);
        if (in) {
            try {
                return json::parse(in).at("completion").get<std::string>();
            } catch (const json::exception& e) {
                spdlog::warn("ignoring corrupt LLM cache entry {}: {}", path.string(), e.what());
            }
        }
    }
    std::string completion = inner_->complete(prompt);
    std::lock_guard lock(mutex_);
    std::ofstream out(path, std::ios::trunc);
    out << json{{"model", inner_->model()}, {"prompt", prompt}, {"completion", completion}}.dump(1) << '\n';
    return completion;
}

GeneratedQuery generate_query(const TopicSelection& selection, EmbeddingProvider& provider, LlmClient* llm,
                              std::string_view domain_label) {
    GeneratedQuery q;
    q.prompt = build_prompt(selection, domain_label);
    if (llm) {
        try {
            std::string text = llm->complete(q.prompt);
            if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
                q.query_text = std::move(text);
                q.source = QuerySource::LLM;
            } else {
                spdlog::warn("LLM returned an empty completion; using the template query");
            }
        } catch (const std::exception& e) {
            spdlog::warn("LLM unavailable ({}); using the template query", e.what());
        }
    }
    if (q.source != QuerySource::LLM) {
        q.query_text = template_query(selection);
        q.source = QuerySource::TEMPLATE;
    }
    q.embedding = embed_pooled(provider, q.query_text);
    return q;
}

} // namespace vcr
