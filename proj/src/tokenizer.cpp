#include "vcr/tokenizer.hpp"

#include "vcr/error.hpp"

namespace vcr {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

bool is_punct(char c) {
    auto u = static_cast<unsigned char>(c);
    return u < 0x80 && ((u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) ||
                        (u >= 0x5B && u <= 0x60) || (u >= 0x7B && u <= 0x7E));
}

} // namespace

std::vector<Token> DefaultTokenizer::tokenize(std::string_view text) const {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        const bool punct = is_punct(text[i]);
        std::size_t j = i + 1;
        while (j < text.size() && !is_space(text[j]) && is_punct(text[j]) == punct) ++j;
        out.push_back({i, j});
        i = j;
    }
    return out;
}

std::vector<Token> WhitespaceTokenizer::tokenize(std::string_view text) const {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() && !is_space(text[j])) ++j;
        out.push_back({i, j});
        i = j;
    }
    return out;
}

std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view profile) {
    if (profile.empty() || profile == "default") return std::make_shared<DefaultTokenizer>();
    if (profile == "whitespace") return std::make_shared<WhitespaceTokenizer>();
    throw Error("unknown tokenizer profile '" + std::string(profile) + "'");
}

const Tokenizer& default_tokenizer() {
    static const DefaultTokenizer instance;
    return instance;
}

std::size_t count_tokens(std::string_view text) { return default_tokenizer().count(text); }

} // namespace vcr
