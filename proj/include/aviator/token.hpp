#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace aviator {

enum class TokenKind {
    Keyword,
    Identifier,
    Literal,
    Operator,
    Punctuation,
    Comment,
    Whitespace,
    Preprocessor,
    Other,
};

const char* to_string(TokenKind kind);
TokenKind token_kind_from_string(std::string_view name);

struct Token {
    TokenKind kind = TokenKind::Other;
    std::string text;  // exact source slice, never empty
    int line = 1;      // 1-based
    int column = 1;    // 1-based, counted in bytes

    bool same_lexeme(const Token& other) const {
        return kind == other.kind && text == other.text;
    }
};

enum class Dialect { C, Cpp };

const char* to_string(Dialect dialect);
Dialect dialect_from_string(std::string_view name);

struct TokenSequence {
    std::vector<Token> tokens;
    std::string source_hash;  // fnv1a64 hex of the source text

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
};

struct SourceFunction {
    std::string id;
    std::string code;
    Dialect dialect = Dialect::Cpp;
    std::string cwe_target;  // e.g. "CWE-787"; empty when unset
    std::string origin;      // corpus tag
};

// Lexes into a covering token stream: concatenating the token texts
// reproduces the input byte for byte. Unrecognizable byte runs become
// Other tokens; the lexer never fails.
TokenSequence tokenize(std::string_view code, Dialect dialect = Dialect::Cpp);

std::string detokenize(const TokenSequence& seq);

bool is_keyword(std::string_view word, Dialect dialect = Dialect::Cpp);

// Tokens that carry meaning for change comparison (whitespace and
// comments dropped).
std::vector<Token> substantive_tokens(const TokenSequence& seq);

bool same_lexemes(const std::vector<Token>& a, const std::vector<Token>& b);

}  // namespace aviator
