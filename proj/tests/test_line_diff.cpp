#include "doctest.h"

#include <random>
#include <string>

#include "aviator/line_diff.hpp"

using namespace aviator;

namespace {

void check_partition(std::string_view benign, std::string_view candidate) {
    LineDiff d = line_diff(benign, candidate);
    int a = 0, b = 0;
    for (const DiffHunk& h : d.hunks) {
        CHECK(h.benign.begin == a);
        CHECK(h.candidate.begin == b);
        CHECK(h.benign.end >= h.benign.begin);
        CHECK(h.candidate.end >= h.candidate.begin);
        a = h.benign.end;
        b = h.candidate.end;
    }
    CHECK(a == d.benign_line_count);
    CHECK(b == d.candidate_line_count);
    CHECK(apply_line_diff(benign, d) == candidate);
}

}  // namespace

TEST_CASE("split_lines keeps terminators") {
    auto l = split_lines("a\nb");
    REQUIRE(l.size() == 2);
    CHECK(l[0] == "a\n");
    CHECK(l[1] == "b");
    CHECK(split_lines("a\n").size() == 1);
    CHECK(split_lines("").empty());
}

TEST_CASE("line_diff: identical input is one unchanged hunk") {
    std::string x = "a\nb\nc\n";
    LineDiff d = line_diff(x, x);
    REQUIRE(d.hunks.size() == 1);
    CHECK(d.hunks[0].kind == HunkKind::Unchanged);
    CHECK(d.hunks[0].benign.begin == 0);
    CHECK(d.hunks[0].benign.end == 3);
    check_partition(x, x);
}

TEST_CASE("line_diff: middle line replaced") {
    std::string benign = "a\nb\nc\n";
    std::string cand = "a\nB\nc\n";
    LineDiff d = line_diff(benign, cand);
    REQUIRE(d.hunks.size() == 3);
    CHECK(d.hunks[0].kind == HunkKind::Unchanged);
    CHECK(d.hunks[1].kind == HunkKind::Changed);
    CHECK(d.hunks[1].benign.begin == 1);
    CHECK(d.hunks[1].benign.end == 2);
    CHECK(d.hunks[1].candidate.begin == 1);
    CHECK(d.hunks[1].candidate.end == 2);
    CHECK(d.hunks[2].kind == HunkKind::Unchanged);
    check_partition(benign, cand);
}

TEST_CASE("line_diff: empty benign to two lines is one added hunk") {
    LineDiff d = line_diff("", "x\ny\n");
    REQUIRE(d.hunks.size() == 1);
    CHECK(d.hunks[0].kind == HunkKind::Added);
    CHECK(d.hunks[0].candidate.length() == 2);
    check_partition("", "x\ny\n");
}

TEST_CASE("line_diff: deletion only") {
    LineDiff d = line_diff("a\nb\nc\n", "a\nc\n");
    REQUIRE(d.hunks.size() == 3);
    CHECK(d.hunks[1].kind == HunkKind::Removed);
    CHECK(d.hunks[1].candidate.length() == 0);
    check_partition("a\nb\nc\n", "a\nc\n");
}

TEST_CASE("line_diff: unchanged hunks hold byte-identical lines") {
    // trailing-newline differences make the last lines distinct
    std::string benign = "a\nb";
    std::string cand = "a\nb\n";
    LineDiff d = line_diff(benign, cand);
    for (const DiffHunk& h : d.hunks) {
        if (h.kind != HunkKind::Unchanged) continue;
        auto alines = split_lines(benign);
        auto blines = split_lines(cand);
        for (int i = 0; i < h.benign.length(); ++i) {
            CHECK(alines[static_cast<std::size_t>(h.benign.begin + i)] ==
                  blines[static_cast<std::size_t>(h.candidate.begin + i)]);
        }
    }
    check_partition(benign, cand);
}

TEST_CASE("line_diff replay on random line mutations") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> nlines(0, 12);
    std::uniform_int_distribution<int> letter(0, 3);
    auto make_text = [&] {
        std::string t;
        int n = nlines(rng);
        for (int i = 0; i < n; ++i) {
            t += std::string(1, static_cast<char>('a' + letter(rng)));
            t += "\n";
        }
        if (nlines(rng) % 3 == 0 && !t.empty()) t.pop_back();  // sometimes no final newline
        return t;
    };
    for (int iter = 0; iter < 200; ++iter) {
        std::string a = make_text();
        std::string b = make_text();
        check_partition(a, b);
    }
}
