#include "aviator/triviality.hpp"

namespace aviator {

namespace {

std::vector<Token> comment_tokens(const TokenSequence& seq) {
    std::vector<Token> out;
    for (const Token& t : seq.tokens) {
        if (t.kind == TokenKind::Comment) out.push_back(t);
    }
    return out;
}

}  // namespace

TrivialityResult is_trivial_change(std::string_view benign, std::string_view candidate,
                                   Dialect dialect) {
    if (benign == candidate) return {true, "identical"};

    const TokenSequence a = tokenize(benign, dialect);
    const TokenSequence b = tokenize(candidate, dialect);
    if (!same_lexemes(substantive_tokens(a), substantive_tokens(b))) {
        return {false, "substantive"};
    }
    if (!same_lexemes(comment_tokens(a), comment_tokens(b))) {
        return {true, "comments"};
    }
    return {true, "whitespace"};
}

}  // namespace aviator
