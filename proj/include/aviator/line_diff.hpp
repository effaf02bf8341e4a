#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aviator {

enum class HunkKind { Unchanged, Changed, Added, Removed };

const char* to_string(HunkKind kind);

// 0-based, half-open [begin, end). Empty ranges mark the insertion point
// on the side that contributes no lines.
struct LineRange {
    int begin = 0;
    int end = 0;

    int length() const { return end - begin; }
};

struct DiffHunk {
    HunkKind kind = HunkKind::Unchanged;
    LineRange benign;
    LineRange candidate;
    // Candidate-side content for Added/Changed hunks; replay pulls
    // Unchanged content from the benign text.
    std::vector<std::string> lines;
};

struct LineDiff {
    std::vector<DiffHunk> hunks;
    int benign_line_count = 0;
    int candidate_line_count = 0;
};

// Splits into lines that keep their terminators, so concatenation is the
// identity. "a\nb" -> {"a\n", "b"}; "a\n" -> {"a\n"}; "" -> {}.
std::vector<std::string> split_lines(std::string_view text);

// LCS over exact line strings; ties resolved by preferring earlier matches.
LineDiff line_diff(std::string_view benign, std::string_view candidate);

// Reconstructs the candidate text from the benign text plus hunks,
// byte-exactly.
std::string apply_line_diff(std::string_view benign, const LineDiff& diff);

// Candidate text with "+ " markers on added/changed lines and "  " on
// unchanged ones; removed hunks contribute nothing.
std::string render_marked_candidate(const LineDiff& diff, std::string_view candidate);

}  // namespace aviator
