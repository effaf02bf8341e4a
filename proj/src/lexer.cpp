#include "aviator/token.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "aviator/digest.hpp"
#include "aviator/errors.hpp"

namespace aviator {

const char* to_string(TokenKind kind) {
    switch (kind) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Literal: return "literal";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Comment: return "comment";
    case TokenKind::Whitespace: return "whitespace";
    case TokenKind::Preprocessor: return "preprocessor";
    case TokenKind::Other: return "other";
    }
    return "other";
}

TokenKind token_kind_from_string(std::string_view name) {
    if (name == "keyword") return TokenKind::Keyword;
    if (name == "identifier") return TokenKind::Identifier;
    if (name == "literal") return TokenKind::Literal;
    if (name == "operator") return TokenKind::Operator;
    if (name == "punctuation") return TokenKind::Punctuation;
    if (name == "comment") return TokenKind::Comment;
    if (name == "whitespace") return TokenKind::Whitespace;
    if (name == "preprocessor") return TokenKind::Preprocessor;
    if (name == "other") return TokenKind::Other;
    throw DomainError("unknown token kind: " + std::string(name));
}

const char* to_string(Dialect dialect) {
    return dialect == Dialect::C ? "c" : "cpp";
}

Dialect dialect_from_string(std::string_view name) {
    if (name == "c") return Dialect::C;
    if (name == "cpp" || name == "c++" || name == "cxx") return Dialect::Cpp;
    throw DomainError("unknown dialect: " + std::string(name));
}

namespace {

const std::unordered_set<std::string_view>& c_keywords() {
    static const std::unordered_set<std::string_view> kw = {
        "auto", "break", "case", "char", "const", "continue", "default", "do",
        "double", "else", "enum", "extern", "float", "for", "goto", "if",
        "inline", "int", "long", "register", "restrict", "return", "short",
        "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
        "unsigned", "void", "volatile", "while",
        "_Alignas", "_Alignof", "_Atomic", "_Bool", "_Complex", "_Generic",
        "_Imaginary", "_Noreturn", "_Static_assert", "_Thread_local",
    };
    return kw;
}

const std::unordered_set<std::string_view>& cpp_keywords() {
    static const std::unordered_set<std::string_view> kw = [] {
        std::unordered_set<std::string_view> s = {
            "auto", "break", "case", "char", "const", "continue", "default",
            "do", "double", "else", "enum", "extern", "float", "for", "goto",
            "if", "inline", "int", "long", "register", "return", "short",
            "signed", "sizeof", "static", "struct", "switch", "typedef",
            "union", "unsigned", "void", "volatile", "while",
            // C++17 additions in common use
            "alignas", "alignof", "and", "and_eq", "asm", "bitand", "bitor",
            "bool", "catch", "char16_t", "char32_t", "class", "compl",
            "const_cast", "constexpr", "decltype", "delete", "dynamic_cast",
            "explicit", "export", "false", "friend", "mutable", "namespace",
            "new", "noexcept", "not", "not_eq", "nullptr", "operator", "or",
            "or_eq", "private", "protected", "public", "reinterpret_cast",
            "static_assert", "static_cast", "template", "this",
            "thread_local", "throw", "true", "try", "typeid", "typename",
            "using", "virtual", "wchar_t", "xor", "xor_eq",
        };
        return s;
    }();
    return kw;
}

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Multi-char operators, longest first for maximal munch.
const std::array<std::string_view, 22>& multi_ops() {
    static const std::array<std::string_view, 22> ops = {
        "<<=", ">>=", "...", "->*", "<=>",
        "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
        "&&", "||", "+=", "-=", "*=", "/=", "%=",
    };
    return ops;
}

const std::array<std::string_view, 4>& multi_ops_tail() {
    static const std::array<std::string_view, 4> ops = {"&=", "^=", "|=", "##"};
    return ops;
}

bool is_single_op(char c) {
    switch (c) {
    case '+': case '-': case '*': case '/': case '%': case '=': case '<':
    case '>': case '!': case '&': case '|': case '^': case '~': case '?':
    case ':': case '.': case '#':
        return true;
    default:
        return false;
    }
}

bool is_punct(char c) {
    switch (c) {
    case '(': case ')': case '{': case '}': case '[': case ']':
    case ';': case ',':
        return true;
    default:
        return false;
    }
}

struct Lexer {
    std::string_view src;
    Dialect dialect;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;
    bool line_fresh = true;  // nothing substantive yet on the current line
    std::vector<Token> out;

    char at(std::size_t i) const { return i < src.size() ? src[i] : '\0'; }
    char cur() const { return at(pos); }
    bool done() const { return pos >= src.size(); }

    void emit(TokenKind kind, std::size_t begin, std::size_t end, int tline, int tcol) {
        Token t;
        t.kind = kind;
        t.text = std::string(src.substr(begin, end - begin));
        t.line = tline;
        t.column = tcol;
        bool has_newline = t.text.find('\n') != std::string::npos;
        out.push_back(std::move(t));
        if (kind == TokenKind::Whitespace) {
            if (has_newline) line_fresh = true;
        } else if (kind != TokenKind::Comment) {
            line_fresh = false;
        }
    }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos < src.size(); ++i) {
            if (src[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++pos;
        }
    }

    void lex_whitespace() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        while (!done() && is_space_char(cur())) advance(1);
        emit(TokenKind::Whitespace, begin, pos, tl, tc);
    }

    void lex_line_comment() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        advance(2);
        while (!done()) {
            if (cur() == '\\') {
                // line splice continues the comment
                if (at(pos + 1) == '\n') { advance(2); continue; }
                if (at(pos + 1) == '\r' && at(pos + 2) == '\n') { advance(3); continue; }
            }
            if (cur() == '\n') break;
            advance(1);
        }
        emit(TokenKind::Comment, begin, pos, tl, tc);
    }

    void lex_block_comment() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        advance(2);
        while (!done()) {
            if (cur() == '*' && at(pos + 1) == '/') {
                advance(2);
                break;
            }
            advance(1);
        }
        emit(TokenKind::Comment, begin, pos, tl, tc);
    }

    void lex_directive() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        while (!done()) {
            if (cur() == '\\') {
                if (at(pos + 1) == '\n') { advance(2); continue; }
                if (at(pos + 1) == '\r' && at(pos + 2) == '\n') { advance(3); continue; }
            }
            if (cur() == '\n') break;
            advance(1);
        }
        emit(TokenKind::Preprocessor, begin, pos, tl, tc);
    }

    // Consumes a quoted literal starting at the quote character. Stops at an
    // unescaped terminator, an unescaped newline, or end of input so that a
    // stray quote cannot swallow the rest of the file.
    void consume_quoted(char quote) {
        advance(1);
        while (!done()) {
            char c = cur();
            if (c == '\\') {
                advance(at(pos + 1) != '\0' ? 2 : 1);
                continue;
            }
            if (c == quote) {
                advance(1);
                break;
            }
            if (c == '\n') break;
            advance(1);
        }
    }

    // Raw string body: R"delim( ... )delim". Caller consumed the prefix and
    // we sit on the opening quote.
    void consume_raw_string() {
        advance(1);  // opening quote
        std::size_t delim_begin = pos;
        while (!done() && cur() != '(' && cur() != '\n') advance(1);
        std::string closer = ")" + std::string(src.substr(delim_begin, pos - delim_begin)) + "\"";
        if (done() || cur() != '(') return;  // malformed; lexed as-is
        advance(1);
        std::size_t found = src.find(closer, pos);
        if (found == std::string_view::npos) {
            advance(src.size() - pos);
        } else {
            advance(found + closer.size() - pos);
        }
    }

    void lex_ident_or_literal_prefix() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        while (!done() && is_ident_char(cur())) advance(1);
        std::string_view word = src.substr(begin, pos - begin);

        bool raw_ok = dialect == Dialect::Cpp;
        bool raw_prefix = raw_ok &&
            (word == "R" || word == "LR" || word == "uR" || word == "UR" || word == "u8R");
        bool str_prefix = word == "L" || word == "u" || word == "U" || word == "u8";

        if (raw_prefix && cur() == '"') {
            consume_raw_string();
            emit(TokenKind::Literal, begin, pos, tl, tc);
            return;
        }
        if (str_prefix && (cur() == '"' || cur() == '\'')) {
            consume_quoted(cur());
            emit(TokenKind::Literal, begin, pos, tl, tc);
            return;
        }
        bool kw = dialect == Dialect::C ? c_keywords().count(word) > 0
                                        : cpp_keywords().count(word) > 0;
        emit(kw ? TokenKind::Keyword : TokenKind::Identifier, begin, pos, tl, tc);
    }

    // Preprocessing-number shape: maximal munch over digits, letters, dots,
    // digit separators, and exponent signs.
    void lex_number() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        advance(1);
        while (!done()) {
            char c = cur();
            char prev = src[pos - 1];
            if ((c == '+' || c == '-') &&
                (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P')) {
                advance(1);
                continue;
            }
            if (is_ident_char(c) || c == '.') {
                advance(1);
                continue;
            }
            if (c == '\'' && dialect == Dialect::Cpp && is_ident_char(at(pos + 1))) {
                advance(1);  // digit separator
                continue;
            }
            break;
        }
        emit(TokenKind::Literal, begin, pos, tl, tc);
    }

    void lex_operator_or_punct() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        if (is_punct(cur())) {
            advance(1);
            emit(TokenKind::Punctuation, begin, pos, tl, tc);
            return;
        }
        std::string_view rest = src.substr(pos);
        for (auto op : multi_ops()) {
            if (rest.substr(0, op.size()) == op) {
                advance(op.size());
                emit(TokenKind::Operator, begin, pos, tl, tc);
                return;
            }
        }
        for (auto op : multi_ops_tail()) {
            if (rest.substr(0, op.size()) == op) {
                advance(op.size());
                emit(TokenKind::Operator, begin, pos, tl, tc);
                return;
            }
        }
        advance(1);
        emit(TokenKind::Operator, begin, pos, tl, tc);
    }

    void lex_other_run() {
        std::size_t begin = pos;
        int tl = line, tc = col;
        while (!done()) {
            char c = cur();
            bool known = is_space_char(c) || is_ident_start(c) || is_digit(c) ||
                         is_single_op(c) || is_punct(c) || c == '"' || c == '\'';
            if (known) break;
            advance(1);
        }
        emit(TokenKind::Other, begin, pos, tl, tc);
    }

    void run() {
        while (!done()) {
            char c = cur();
            if (is_space_char(c)) {
                lex_whitespace();
            } else if (c == '/' && at(pos + 1) == '/') {
                lex_line_comment();
            } else if (c == '/' && at(pos + 1) == '*') {
                lex_block_comment();
            } else if (c == '#' && line_fresh) {
                lex_directive();
            } else if (c == '"' || c == '\'') {
                std::size_t begin = pos;
                int tl = line, tc = col;
                consume_quoted(c);
                emit(TokenKind::Literal, begin, pos, tl, tc);
            } else if (is_ident_start(c)) {
                lex_ident_or_literal_prefix();
            } else if (is_digit(c) || (c == '.' && is_digit(at(pos + 1)))) {
                lex_number();
            } else if (is_single_op(c) || is_punct(c)) {
                lex_operator_or_punct();
            } else {
                lex_other_run();
            }
        }
    }
};

}  // namespace

TokenSequence tokenize(std::string_view code, Dialect dialect) {
    Lexer lx;
    lx.src = code;
    lx.dialect = dialect;
    lx.run();
    TokenSequence seq;
    seq.tokens = std::move(lx.out);
    seq.source_hash = digest_hex(code);
    return seq;
}

std::string detokenize(const TokenSequence& seq) {
    std::string out;
    std::size_t total = 0;
    for (const Token& t : seq.tokens) total += t.text.size();
    out.reserve(total);
    for (const Token& t : seq.tokens) out += t.text;
    return out;
}

bool is_keyword(std::string_view word, Dialect dialect) {
    return dialect == Dialect::C ? c_keywords().count(word) > 0
                                 : cpp_keywords().count(word) > 0;
}

std::vector<Token> substantive_tokens(const TokenSequence& seq) {
    std::vector<Token> out;
    out.reserve(seq.tokens.size());
    for (const Token& t : seq.tokens) {
        if (t.kind == TokenKind::Whitespace || t.kind == TokenKind::Comment) continue;
        out.push_back(t);
    }
    return out;
}

bool same_lexemes(const std::vector<Token>& a, const std::vector<Token>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].same_lexeme(b[i])) return false;
    }
    return true;
}

}  // namespace aviator
