#include "doctest.h"

#include <random>
#include <string>
#include <vector>

#include "aviator/token.hpp"
#include "aviator/triviality.hpp"

using namespace aviator;

namespace {

void check_round_trip(const std::string& src, Dialect d = Dialect::Cpp) {
    TokenSequence seq = tokenize(src, d);
    CHECK(detokenize(seq) == src);
    // coverage: spans tile the input with no gaps or overlaps
    std::size_t total = 0;
    for (const Token& t : seq.tokens) {
        CHECK(!t.text.empty());
        total += t.text.size();
    }
    CHECK(total == src.size());
    // order matches source order
    for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
        const Token& prev = seq.tokens[i - 1];
        const Token& cur = seq.tokens[i];
        bool ordered = cur.line > prev.line || (cur.line == prev.line && cur.column > prev.column);
        CHECK(ordered);
    }
}

// Random C-ish snippet generator for round-trip property tests.
std::string random_snippet(std::mt19937& rng) {
    static const std::vector<std::string> pieces = {
        "int", " ", "x", "y2", "_tmp", "0", "42", "0x1fULL", "3.14e-2f", "\n",
        "\t", "+", "-", "*", "/", "=", "==", "<=", "->", "::", ";", ",", "(",
        ")", "{", "}", "[", "]", "\"str\\\"ing\"", "'c'", "'\\n'",
        "// line comment\n", "/* block */", "#define M(a) ((a)+1)\n",
        "struct", "while", "return", "\r\n", "u8\"text\"", "...", "<<=",
        "\xC3\xA9", "@", "$",
    };
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::uniform_int_distribution<int> len(0, 40);
    std::string out;
    int n = len(rng);
    for (int i = 0; i < n; ++i) out += pieces[pick(rng)];
    return out;
}

}  // namespace

TEST_CASE("tokenize: empty input") {
    TokenSequence seq = tokenize("");
    CHECK(seq.empty());
    CHECK(detokenize(seq).empty());
}

TEST_CASE("tokenize: int x = 0;") {
    TokenSequence seq = tokenize("int x = 0;");
    REQUIRE(seq.size() == 8);
    auto expect = [&](std::size_t i, TokenKind k, const char* text) {
        CHECK(seq.tokens[i].kind == k);
        CHECK(seq.tokens[i].text == text);
    };
    expect(0, TokenKind::Keyword, "int");
    expect(1, TokenKind::Whitespace, " ");
    expect(2, TokenKind::Identifier, "x");
    expect(3, TokenKind::Whitespace, " ");
    expect(4, TokenKind::Operator, "=");
    expect(5, TokenKind::Whitespace, " ");
    expect(6, TokenKind::Literal, "0");
    expect(7, TokenKind::Punctuation, ";");
    check_round_trip("int x = 0;");
}

TEST_CASE("tokenize: comment then identifier") {
    TokenSequence seq = tokenize("/*c*/x");
    REQUIRE(seq.size() == 2);
    CHECK(seq.tokens[0].kind == TokenKind::Comment);
    CHECK(seq.tokens[0].text == "/*c*/");
    CHECK(seq.tokens[1].kind == TokenKind::Identifier);
    CHECK(seq.tokens[1].text == "x");
}

TEST_CASE("tokenize: preprocessor directive is one whole-line token") {
    TokenSequence seq = tokenize("#include <stdio.h>\nint main;");
    REQUIRE(seq.size() >= 2);
    CHECK(seq.tokens[0].kind == TokenKind::Preprocessor);
    CHECK(seq.tokens[0].text == "#include <stdio.h>");
    CHECK(seq.tokens[1].kind == TokenKind::Whitespace);
    check_round_trip("#include <stdio.h>\nint main;");
}

TEST_CASE("tokenize: directive with line continuation") {
    std::string src = "#define ADD(a, b) \\\n  ((a) + (b))\nint x;";
    TokenSequence seq = tokenize(src);
    CHECK(seq.tokens[0].kind == TokenKind::Preprocessor);
    CHECK(seq.tokens[0].text == "#define ADD(a, b) \\\n  ((a) + (b))");
    check_round_trip(src);
}

TEST_CASE("tokenize: hash not at line start is not a directive") {
    TokenSequence seq = tokenize("a # b");
    REQUIRE(seq.size() == 5);
    CHECK(seq.tokens[2].kind == TokenKind::Operator);
    CHECK(seq.tokens[2].text == "#");
}

TEST_CASE("tokenize: string and char literals with escapes") {
    check_round_trip(R"(char* s = "hi\n\"there\""; char c = '\'';)");
    TokenSequence seq = tokenize(R"("a\"b")");
    REQUIRE(seq.size() == 1);
    CHECK(seq.tokens[0].kind == TokenKind::Literal);
}

TEST_CASE("tokenize: raw string literal round-trips in C++ mode") {
    std::string src = "auto s = R\"xy(line1\nline2 \"quoted\")xy\";";
    TokenSequence seq = tokenize(src, Dialect::Cpp);
    check_round_trip(src, Dialect::Cpp);
    bool found = false;
    for (const Token& t : seq.tokens) {
        if (t.kind == TokenKind::Literal && t.text.rfind("R\"xy(", 0) == 0) found = true;
    }
    CHECK(found);
}

TEST_CASE("tokenize: unterminated constructs still round-trip") {
    check_round_trip("/* never closed");
    check_round_trip("\"open string");
    check_round_trip("'x");
    check_round_trip("int a = \"broken\nint b;");
}

TEST_CASE("tokenize: unrecognized bytes become other tokens") {
    std::string src = "a @@ b \xFF\xFE c";
    TokenSequence seq = tokenize(src);
    check_round_trip(src);
    int other = 0;
    for (const Token& t : seq.tokens) {
        if (t.kind == TokenKind::Other) ++other;
    }
    CHECK(other == 2);  // "@@" run and the 0xFF 0xFE run
}

TEST_CASE("tokenize: maximal munch operators") {
    TokenSequence seq = tokenize("a<<=b");
    REQUIRE(seq.size() == 3);
    CHECK(seq.tokens[1].text == "<<=");
    seq = tokenize("x--->y");
    // '--' then '->' by maximal munch
    REQUIRE(seq.size() == 4);
    CHECK(seq.tokens[1].text == "--");
    CHECK(seq.tokens[2].text == "->");
}

TEST_CASE("tokenize: numeric literals munch maximally") {
    TokenSequence seq = tokenize("x = 1.5e+10f + 0x1p-3;");
    std::vector<std::string> literals;
    for (const Token& t : seq.tokens) {
        if (t.kind == TokenKind::Literal) literals.push_back(t.text);
    }
    REQUIRE(literals.size() == 2);
    CHECK(literals[0] == "1.5e+10f");
    CHECK(literals[1] == "0x1p-3");
}

TEST_CASE("keyword sets differ per dialect") {
    CHECK(is_keyword("restrict", Dialect::C));
    CHECK_FALSE(is_keyword("restrict", Dialect::Cpp));
    CHECK(is_keyword("class", Dialect::Cpp));
    CHECK_FALSE(is_keyword("class", Dialect::C));
    TokenSequence c_seq = tokenize("class x;", Dialect::C);
    CHECK(c_seq.tokens[0].kind == TokenKind::Identifier);
    TokenSequence cpp_seq = tokenize("class x;", Dialect::Cpp);
    CHECK(cpp_seq.tokens[0].kind == TokenKind::Keyword);
}

TEST_CASE("round-trip property on randomized snippets") {
    std::mt19937 rng(20260810);
    for (int i = 0; i < 100; ++i) {
        std::string src = random_snippet(rng);
        TokenSequence seq = tokenize(src);
        CHECK(detokenize(seq) == src);
    }
}

TEST_CASE("is_trivial_change: whitespace-only suffix") {
    std::string s = "int f(void) { return 1; }";
    auto r = is_trivial_change(s, s + "  \n");
    CHECK(r.trivial);
    CHECK(r.reason == "whitespace");
}

TEST_CASE("is_trivial_change: comment added") {
    auto r = is_trivial_change("int x=0;", "int x=0; // note");
    CHECK(r.trivial);
    CHECK(r.reason == "comments");
}

TEST_CASE("is_trivial_change: operator flip is substantive") {
    auto r = is_trivial_change("a = b + c;", "a = b - c;");
    CHECK_FALSE(r.trivial);
    CHECK(r.reason == "substantive");
}

TEST_CASE("is_trivial_change: reflexive and symmetric") {
    std::string a = "int f() { return 0; }";
    std::string b = "int  f() { return 0;  }\n";
    auto aa = is_trivial_change(a, a);
    CHECK(aa.trivial);
    CHECK(aa.reason == "identical");
    CHECK(is_trivial_change(a, b).trivial == is_trivial_change(b, a).trivial);
    std::string c = "int f() { return 1; }";
    CHECK(is_trivial_change(a, c).trivial == is_trivial_change(c, a).trivial);
}
