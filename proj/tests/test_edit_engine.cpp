#include "doctest.h"

#include <random>
#include <string>
#include <vector>

#include "aviator/edit_script.hpp"
#include "aviator/errors.hpp"
#include "aviator/token.hpp"

using namespace aviator;

namespace {

Token ident(const std::string& text) {
    Token t;
    t.kind = TokenKind::Identifier;
    t.text = text;
    return t;
}

TokenSequence seq_of(std::initializer_list<std::string> texts) {
    TokenSequence s;
    for (const auto& t : texts) s.tokens.push_back(ident(t));
    return s;
}

std::vector<std::string> texts_of(const TokenSequence& s) {
    std::vector<std::string> out;
    for (const Token& t : s.tokens) out.push_back(t.text);
    return out;
}

// Random sequences over a small alphabet so LCS has real overlaps.
TokenSequence random_seq(std::mt19937& rng, int min_len = 0, int max_len = 24) {
    static const char* alphabet[] = {"a", "b", "c", "d", "x", "y"};
    std::uniform_int_distribution<int> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, 5);
    TokenSequence s;
    int n = len(rng);
    for (int i = 0; i < n; ++i) s.tokens.push_back(ident(alphabet[pick(rng)]));
    return s;
}

bool lexeme_equal(const TokenSequence& a, const TokenSequence& b) {
    return same_lexemes(a.tokens, b.tokens);
}

}  // namespace

TEST_CASE("apply: empty script is identity") {
    TokenSequence s = tokenize("int x = 0;");
    EditScript script;
    script.target_length = s.size();
    TokenSequence out = apply_edit_script(s, script);
    CHECK(lexeme_equal(out, s));
    CHECK(detokenize(out) == detokenize(s));
}

TEST_CASE("apply: delete at position 1") {
    TokenSequence s = seq_of({"a", "b", "c"});
    EditScript script;
    script.target_length = 3;
    script.edits.push_back({1, EditAction::Delete, {}});
    TokenSequence out = apply_edit_script(s, script);
    CHECK(texts_of(out) == std::vector<std::string>{"a", "c"});
}

TEST_CASE("apply: replace at position 2 with two tokens") {
    TokenSequence s = seq_of({"a", "b", "c"});
    EditScript script;
    script.target_length = 3;
    script.edits.push_back({2, EditAction::Replace, {ident("x"), ident("y")}});
    TokenSequence out = apply_edit_script(s, script);
    CHECK(texts_of(out) == std::vector<std::string>{"a", "b", "x", "y"});
}

TEST_CASE("apply: insert before and after") {
    TokenSequence s = seq_of({"a", "b"});
    EditScript before;
    before.target_length = 2;
    before.edits.push_back({0, EditAction::InsertBefore, {ident("z")}});
    CHECK(texts_of(apply_edit_script(s, before)) == std::vector<std::string>{"z", "a", "b"});

    EditScript after;
    after.target_length = 2;
    after.edits.push_back({0, EditAction::InsertAfter, {ident("z")}});
    CHECK(texts_of(apply_edit_script(s, after)) == std::vector<std::string>{"a", "z", "b"});
}

TEST_CASE("apply: errors") {
    TokenSequence s = seq_of({"a", "b", "c"});
    EditScript wrong_len;
    wrong_len.target_length = 2;
    CHECK_THROWS_AS(apply_edit_script(s, wrong_len), DomainError);

    EditScript dup;
    dup.target_length = 3;
    dup.edits.push_back({1, EditAction::Delete, {}});
    dup.edits.push_back({1, EditAction::Delete, {}});
    CHECK_THROWS_AS(apply_edit_script(s, dup), DomainError);

    EditScript unsorted;
    unsorted.target_length = 3;
    unsorted.edits.push_back({2, EditAction::Delete, {}});
    unsorted.edits.push_back({0, EditAction::Delete, {}});
    CHECK_THROWS_AS(apply_edit_script(s, unsorted), DomainError);

    EditScript bad_payload;
    bad_payload.target_length = 3;
    bad_payload.edits.push_back({0, EditAction::Delete, {ident("x")}});
    CHECK_THROWS_AS(apply_edit_script(s, bad_payload), DomainError);

    EditScript empty_replace;
    empty_replace.target_length = 3;
    empty_replace.edits.push_back({0, EditAction::Replace, {}});
    CHECK_THROWS_AS(apply_edit_script(s, empty_replace), DomainError);
}

TEST_CASE("derive: identity gives empty script") {
    TokenSequence s = seq_of({"a", "b", "c"});
    EditScript script = derive_edit_script(s, s);
    CHECK(script.edits.empty());
    CHECK(edit_count(script) == 0);
}

TEST_CASE("derive: single deletion") {
    TokenSequence a = seq_of({"a", "b", "c"});
    TokenSequence b = seq_of({"a", "c"});
    EditScript script = derive_edit_script(a, b);
    REQUIRE(script.edits.size() == 1);
    CHECK(script.edits[0].position == 1);
    CHECK(script.edits[0].action == EditAction::Delete);
    CHECK(lexeme_equal(apply_edit_script(a, script), b));
}

TEST_CASE("derive: insertion canonicalizes to insert-after the anchor") {
    TokenSequence a = seq_of({"a", "b"});
    TokenSequence b = seq_of({"a", "x", "b"});
    EditScript script = derive_edit_script(a, b);
    REQUIRE(script.edits.size() == 1);
    CHECK(script.edits[0].position == 0);
    CHECK(script.edits[0].action == EditAction::InsertAfter);
    CHECK(lexeme_equal(apply_edit_script(a, script), b));

    // insertion at the very start uses insert-before position 0
    TokenSequence c = seq_of({"x", "a", "b"});
    EditScript front = derive_edit_script(a, c);
    REQUIRE(front.edits.size() == 1);
    CHECK(front.edits[0].position == 0);
    CHECK(front.edits[0].action == EditAction::InsertBefore);
    CHECK(lexeme_equal(apply_edit_script(a, front), c));
}

TEST_CASE("derive: single-token replacement has edit count 1") {
    TokenSequence a = seq_of({"a", "b", "c"});
    TokenSequence b = seq_of({"a", "x", "c"});
    EditScript script = derive_edit_script(a, b);
    CHECK(edit_count(script) == 1);
    CHECK(script.edits[0].action == EditAction::Replace);
    CHECK(lexeme_equal(apply_edit_script(a, script), b));
}

TEST_CASE("derive: three disjoint replacements give edit count 3") {
    TokenSequence a = seq_of({"a", "b", "c", "d", "e"});
    TokenSequence b = seq_of({"x", "b", "y", "d", "z"});
    EditScript script = derive_edit_script(a, b);
    CHECK(edit_count(script) == 3);
    CHECK(lexeme_equal(apply_edit_script(a, script), b));
}

TEST_CASE("derive: multi-token changed run anchors one replace") {
    TokenSequence a = seq_of({"a", "b", "c", "d"});
    TokenSequence b = seq_of({"a", "x", "d"});
    EditScript script = derive_edit_script(a, b);
    // replace at 1 with <x>, delete at 2
    REQUIRE(script.edits.size() == 2);
    CHECK(script.edits[0].action == EditAction::Replace);
    CHECK(script.edits[0].position == 1);
    CHECK(script.edits[1].action == EditAction::Delete);
    CHECK(script.edits[1].position == 2);
    CHECK(lexeme_equal(apply_edit_script(a, script), b));
}

TEST_CASE("derive: insertion into empty sequence") {
    TokenSequence a;
    TokenSequence b = seq_of({"x", "y"});
    EditScript script = derive_edit_script(a, b);
    REQUIRE(script.edits.size() == 1);
    CHECK(script.edits[0].action == EditAction::InsertBefore);
    CHECK(lexeme_equal(apply_edit_script(a, script), b));
}

TEST_CASE("derive/apply round-trip on random pairs") {
    std::mt19937 rng(20260810);
    for (int i = 0; i < 300; ++i) {
        TokenSequence a = random_seq(rng);
        TokenSequence b = random_seq(rng);
        EditScript script = derive_edit_script(a, b);
        CHECK(lexeme_equal(apply_edit_script(a, script), b));
    }
}

TEST_CASE("apply preserves relative order of untouched tokens") {
    std::mt19937 rng(99);
    for (int i = 0; i < 100; ++i) {
        TokenSequence a = random_seq(rng, 4, 16);
        TokenSequence b = random_seq(rng, 4, 16);
        EditScript script = derive_edit_script(a, b);
        // positions not named in the script appear in the output in order
        std::vector<std::size_t> edited;
        for (const EditOp& op : script.edits) edited.push_back(op.position);
        std::vector<std::string> untouched;
        for (std::size_t p = 0; p < a.size(); ++p) {
            bool hit = false;
            for (std::size_t e : edited) {
                if (e == p) hit = true;
            }
            // insert ops keep the anchored token in the output
            for (const EditOp& op : script.edits) {
                if (op.position == p && (op.action == EditAction::InsertBefore ||
                                         op.action == EditAction::InsertAfter)) {
                    hit = false;
                }
            }
            if (!hit) untouched.push_back(a.tokens[p].text);
        }
        TokenSequence out = apply_edit_script(a, script);
        // untouched tokens must appear as a subsequence of the output
        std::size_t j = 0;
        for (const Token& t : out.tokens) {
            if (j < untouched.size() && t.text == untouched[j]) ++j;
        }
        CHECK(j == untouched.size());
    }
}

TEST_CASE("inject packages the applied script with its edit count") {
    TokenSequence benign = tokenize("int f() { return a <= n; }");
    TokenSequence vulnerable = tokenize("int f() { return a < n; }");
    EditScript script = derive_edit_script(benign, vulnerable);
    InjectionResult result = inject(benign, script);
    CHECK(result.edit_count == script.edits.size());
    CHECK(lexeme_equal(result.vulnerable, vulnerable));
    CHECK(detokenize(result.vulnerable) == detokenize(vulnerable));
}

TEST_CASE("edit script JSON round trip uses the documented schema") {
    TokenSequence a = tokenize("int x = 0;");
    TokenSequence b = tokenize("int x = 1;");
    EditScript script = derive_edit_script(a, b);
    Json j = edit_script_to_json(script);
    CHECK(j.contains("target_length"));
    CHECK(j.contains("edits"));
    REQUIRE(!j["edits"].empty());
    CHECK(j["edits"][0].contains("pos"));
    CHECK(j["edits"][0].contains("action"));
    CHECK(j["edits"][0].contains("payload"));
    CHECK(j["edits"][0]["payload"][0].contains("kind"));
    CHECK(j["edits"][0]["payload"][0].contains("text"));

    EditScript back = edit_script_from_json(j);
    CHECK(back.target_length == script.target_length);
    REQUIRE(back.edits.size() == script.edits.size());
    CHECK(lexeme_equal(apply_edit_script(a, back), b));
}

TEST_CASE("check_functional_shape") {
    TokenSequence fn = tokenize("int f(int a) { if (a > 0) { return a; } return 0; }");
    ShapeReport self = check_functional_shape(fn, fn);
    CHECK(self.balanced_delimiters);
    CHECK(self.nonempty);
    CHECK(self.trivial);

    TokenSequence dropped = tokenize("int f(int a) { if (a > 0) { return a; } return 0; ");
    ShapeReport bad = check_functional_shape(fn, dropped);
    CHECK_FALSE(bad.balanced_delimiters);

    TokenSequence flipped = tokenize("int f(int a) { if (a < 0) { return a; } return 0; }");
    ShapeReport flip = check_functional_shape(fn, flipped);
    CHECK(flip.balanced_delimiters);
    CHECK(flip.nonempty);
    CHECK_FALSE(flip.trivial);

    TokenSequence empty = tokenize("  \n// only a comment\n");
    CHECK_FALSE(check_functional_shape(fn, empty).nonempty);

    TokenSequence inverted = tokenize(")(");
    CHECK_FALSE(check_functional_shape(fn, inverted).balanced_delimiters);
}
