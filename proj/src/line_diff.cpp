#include "aviator/line_diff.hpp"

#include <algorithm>

#include "aviator/errors.hpp"

namespace aviator {

const char* to_string(HunkKind kind) {
    switch (kind) {
    case HunkKind::Unchanged: return "unchanged";
    case HunkKind::Changed: return "changed";
    case HunkKind::Added: return "added";
    case HunkKind::Removed: return "removed";
    }
    return "unchanged";
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start + 1));
        start = nl + 1;
    }
    return lines;
}

namespace {

// Match/advance steps of an LCS walk. dp indexed over suffixes; walking
// forward and preferring matches when they preserve the optimum keeps the
// earliest-match tie-break deterministic.
struct Step {
    bool matched;
    // matched: consumed one line from each side; otherwise exactly one of
    // from_benign/from_candidate is true.
    bool from_benign;
};

std::vector<Step> lcs_walk(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (a[i] == b[j]) {
                dp[i][j] = dp[i + 1][j + 1] + 1;
            } else {
                dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
            }
        }
    }
    std::vector<Step> steps;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i] == b[j] && dp[i][j] == dp[i + 1][j + 1] + 1) {
            steps.push_back({true, false});
            ++i;
            ++j;
        } else if (dp[i + 1][j] >= dp[i][j + 1]) {
            steps.push_back({false, true});
            ++i;
        } else {
            steps.push_back({false, false});
            ++j;
        }
    }
    while (i < n) { steps.push_back({false, true}); ++i; }
    while (j < m) { steps.push_back({false, false}); ++j; }
    return steps;
}

}  // namespace

LineDiff line_diff(std::string_view benign, std::string_view candidate) {
    const std::vector<std::string> a = split_lines(benign);
    const std::vector<std::string> b = split_lines(candidate);
    LineDiff diff;
    diff.benign_line_count = static_cast<int>(a.size());
    diff.candidate_line_count = static_cast<int>(b.size());

    const std::vector<Step> steps = lcs_walk(a, b);

    int ai = 0, bi = 0;
    std::size_t s = 0;
    while (s < steps.size()) {
        if (steps[s].matched) {
            DiffHunk h;
            h.kind = HunkKind::Unchanged;
            h.benign.begin = ai;
            h.candidate.begin = bi;
            while (s < steps.size() && steps[s].matched) {
                ++ai;
                ++bi;
                ++s;
            }
            h.benign.end = ai;
            h.candidate.end = bi;
            diff.hunks.push_back(std::move(h));
            continue;
        }
        DiffHunk h;
        h.benign.begin = ai;
        h.candidate.begin = bi;
        while (s < steps.size() && !steps[s].matched) {
            if (steps[s].from_benign) ++ai; else ++bi;
            ++s;
        }
        h.benign.end = ai;
        h.candidate.end = bi;
        if (h.benign.length() > 0 && h.candidate.length() > 0) {
            h.kind = HunkKind::Changed;
        } else if (h.candidate.length() > 0) {
            h.kind = HunkKind::Added;
        } else {
            h.kind = HunkKind::Removed;
        }
        for (int k = h.candidate.begin; k < h.candidate.end; ++k) {
            h.lines.push_back(b[static_cast<std::size_t>(k)]);
        }
        diff.hunks.push_back(std::move(h));
    }
    return diff;
}

std::string render_marked_candidate(const LineDiff& diff, std::string_view candidate) {
    const std::vector<std::string> lines = split_lines(candidate);
    std::string out;
    for (const DiffHunk& h : diff.hunks) {
        const char* marker;
        switch (h.kind) {
        case HunkKind::Unchanged: marker = "  "; break;
        case HunkKind::Changed:
        case HunkKind::Added: marker = "+ "; break;
        case HunkKind::Removed: continue;
        }
        for (int i = h.candidate.begin; i < h.candidate.end; ++i) {
            const std::string& line = lines[static_cast<std::size_t>(i)];
            out += marker;
            out += line;
            if (line.empty() || line.back() != '\n') out += "\n";
        }
    }
    return out;
}

std::string apply_line_diff(std::string_view benign, const LineDiff& diff) {
    const std::vector<std::string> a = split_lines(benign);
    if (static_cast<int>(a.size()) != diff.benign_line_count) {
        throw DomainError("apply_line_diff: benign text has " + std::to_string(a.size()) +
                          " lines, diff expects " + std::to_string(diff.benign_line_count));
    }
    std::string out;
    for (const DiffHunk& h : diff.hunks) {
        switch (h.kind) {
        case HunkKind::Unchanged:
            for (int k = h.benign.begin; k < h.benign.end; ++k) {
                out += a[static_cast<std::size_t>(k)];
            }
            break;
        case HunkKind::Removed:
            break;
        case HunkKind::Changed:
        case HunkKind::Added:
            for (const std::string& l : h.lines) out += l;
            break;
        }
    }
    return out;
}

}  // namespace aviator
