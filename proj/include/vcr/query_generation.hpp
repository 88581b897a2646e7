#pragma once

#include "vcr/embedding.hpp"
#include "vcr/remote_provider.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace vcr {

struct TopicSelection {
    std::vector<std::string> ontology_topics;
    std::vector<std::string> custom_terms;

    // Ontology topics then custom terms, duplicates removed, order kept.
    std::vector<std::string> all() const;
    bool empty() const { return all().empty(); }
};

enum class QuerySource { LLM, TEMPLATE };
std::string_view to_string(QuerySource source);

struct GeneratedQuery {
    std::string prompt;
    std::string query_text;
    QuerySource source = QuerySource::TEMPLATE;
    EmbeddingVector embedding;
};

inline constexpr std::string_view kDefaultDomainLabel = "TED talk";

// "Write a full description for this <domain_label> which discusses the
// following topics <t1>, <t2>, ...". Throws PreconditionError on an empty selection.
std::string build_prompt(const TopicSelection& selection, std::string_view domain_label = kDefaultDomainLabel);

// Offline stand-in for the LLM paragraph; repeats every topic verbatim.
std::string template_query(const TopicSelection& selection);

class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string model() const = 0;
    virtual std::string complete(const std::string& prompt) = 0;
};

struct LlmConfig {
    std::string endpoint; // VCR_LLM_ENDPOINT
    std::string token;    // VCR_LLM_TOKEN
    std::string model = "gpt-4";
    RetryPolicy retry{2, std::chrono::milliseconds(250), 2.0, std::chrono::milliseconds(1000)};
    std::chrono::seconds timeout{30};

    static LlmConfig from_env();
};

// Chat-completion wire contract: POST {"model", "messages":[{"role":"user","content":prompt}]}
// and return choices[0].message.content.
class HttpLlmClient final : public LlmClient {
public:
    explicit HttpLlmClient(LlmConfig config);
    std::string model() const override { return config_.model; }
    std::string complete(const std::string& prompt) override;

private:
    LlmConfig config_;
    HttpEndpoint endpoint_;
};

// Replays completions keyed by (model, prompt). Decoding parameters are the
// endpoint's defaults and are recorded in the key as such.
class CachedLlmClient final : public LlmClient {
public:
    CachedLlmClient(std::shared_ptr<LlmClient> inner, std::filesystem::path dir);
    std::string model() const override { return inner_->model(); }
    std::string complete(const std::string& prompt) override;

private:
    std::shared_ptr<LlmClient> inner_;
    std::filesystem::path dir_;
    std::mutex mutex_;
};

// Uses the LLM when one is given and it answers; any failure (or an empty
// answer) falls back to template_query with a warning. The query text is
// embedded with embed_pooled.
GeneratedQuery generate_query(const TopicSelection& selection, EmbeddingProvider& provider,
                              LlmClient* llm = nullptr, std::string_view domain_label = kDefaultDomainLabel);

} // namespace vcr
