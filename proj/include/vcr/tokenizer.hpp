#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace vcr {

// Byte range [begin, end) of one token within the tokenized text.
struct Token {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Token budgets everywhere are expressed in tokens of the active profile.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<Token> tokenize(std::string_view text) const = 0;
    virtual std::string name() const = 0;

    std::size_t count(std::string_view text) const { return tokenize(text).size(); }
};

// Whitespace-delimited words, with every run of ASCII punctuation inside a
// word split off as its own token: "hello, world!" -> hello , world !
class DefaultTokenizer final : public Tokenizer {
public:
    std::vector<Token> tokenize(std::string_view text) const override;
    std::string name() const override { return "default"; }
};

// Plain whitespace split.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<Token> tokenize(std::string_view text) const override;
    std::string name() const override { return "whitespace"; }
};

// "default" or "whitespace"; throws on anything else.
std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view profile);

const Tokenizer& default_tokenizer();

std::size_t count_tokens(std::string_view text);

} // namespace vcr
