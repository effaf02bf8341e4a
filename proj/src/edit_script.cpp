#include "aviator/edit_script.hpp"

#include <algorithm>
#include <string>

#include "aviator/digest.hpp"
#include "aviator/errors.hpp"

namespace aviator {

const char* to_string(EditAction action) {
    switch (action) {
    case EditAction::InsertBefore: return "insert_before";
    case EditAction::InsertAfter: return "insert_after";
    case EditAction::Delete: return "delete";
    case EditAction::Replace: return "replace";
    }
    return "replace";
}

EditAction edit_action_from_string(std::string_view name) {
    if (name == "insert_before") return EditAction::InsertBefore;
    if (name == "insert_after") return EditAction::InsertAfter;
    if (name == "delete") return EditAction::Delete;
    if (name == "replace") return EditAction::Replace;
    throw DomainError("unknown edit action: " + std::string(name));
}

void validate_edit_script(const EditScript& script) {
    std::size_t prev = 0;
    bool first = true;
    for (const EditOp& op : script.edits) {
        if (!first) {
            if (op.position == prev) {
                throw DomainError("edit script has duplicate position " +
                                  std::to_string(op.position));
            }
            if (op.position < prev) {
                throw DomainError("edit script positions not sorted");
            }
        }
        // Insertion into an empty sequence is the one allowed out-of-range
        // case: insert-before position 0 with target_length 0.
        bool empty_insert = script.target_length == 0 && op.position == 0 &&
                            op.action == EditAction::InsertBefore;
        if (op.position >= script.target_length && !empty_insert) {
            throw DomainError("edit position " + std::to_string(op.position) +
                              " out of range for target length " +
                              std::to_string(script.target_length));
        }
        if (op.action == EditAction::Delete && !op.payload.empty()) {
            throw DomainError("delete op must carry an empty payload");
        }
        if (op.action != EditAction::Delete && op.payload.empty()) {
            throw DomainError("non-delete op must carry a non-empty payload");
        }
        prev = op.position;
        first = false;
    }
}

namespace {

// Recomputes line/column from the concatenated text so the output sequence
// keeps its ordering invariant.
TokenSequence relayout(std::vector<Token> tokens) {
    int line = 1;
    int col = 1;
    std::string text;
    for (Token& t : tokens) {
        t.line = line;
        t.column = col;
        for (char c : t.text) {
            if (c == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        text += t.text;
    }
    TokenSequence seq;
    seq.tokens = std::move(tokens);
    seq.source_hash = digest_hex(text);
    return seq;
}

}  // namespace

TokenSequence apply_edit_script(const TokenSequence& benign, const EditScript& script) {
    if (script.target_length != benign.size()) {
        throw DomainError("edit script targets length " + std::to_string(script.target_length) +
                          " but sequence has " + std::to_string(benign.size()) + " tokens");
    }
    validate_edit_script(script);

    std::vector<Token> out;
    std::size_t ei = 0;
    if (benign.empty()) {
        if (!script.edits.empty()) {
            for (const Token& t : script.edits.front().payload) out.push_back(t);
        }
        return relayout(std::move(out));
    }
    for (std::size_t pos = 0; pos < benign.size(); ++pos) {
        const Token& here = benign.tokens[pos];
        if (ei < script.edits.size() && script.edits[ei].position == pos) {
            const EditOp& op = script.edits[ei];
            switch (op.action) {
            case EditAction::InsertBefore:
                for (const Token& t : op.payload) out.push_back(t);
                out.push_back(here);
                break;
            case EditAction::InsertAfter:
                out.push_back(here);
                for (const Token& t : op.payload) out.push_back(t);
                break;
            case EditAction::Delete:
                break;
            case EditAction::Replace:
                for (const Token& t : op.payload) out.push_back(t);
                break;
            }
            ++ei;
        } else {
            out.push_back(here);
        }
    }
    return relayout(std::move(out));
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> lcs_anchors(const std::vector<Token>& a,
                                                             const std::vector<Token>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (a[i].same_lexeme(b[j])) {
                dp[i][j] = dp[i + 1][j + 1] + 1;
            } else {
                dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
            }
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> anchors;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i].same_lexeme(b[j]) && dp[i][j] == dp[i + 1][j + 1] + 1) {
            anchors.emplace_back(i, j);
            ++i;
            ++j;
        } else if (dp[i + 1][j] >= dp[i][j + 1]) {
            ++i;
        } else {
            ++j;
        }
    }
    return anchors;
}

}  // namespace

EditScript derive_edit_script(const TokenSequence& benign, const TokenSequence& vulnerable) {
    EditScript script;
    script.target_length = benign.size();

    const std::vector<Token>& a = benign.tokens;
    const std::vector<Token>& b = vulnerable.tokens;
    auto anchors = lcs_anchors(a, b);

    auto emit_gap = [&](std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
        if (a0 == a1 && b0 == b1) return;
        if (a0 == a1) {
            // pure insertion
            EditOp op;
            op.payload.assign(b.begin() + static_cast<std::ptrdiff_t>(b0),
                              b.begin() + static_cast<std::ptrdiff_t>(b1));
            if (a0 == 0) {
                op.position = 0;
                op.action = EditAction::InsertBefore;
            } else {
                op.position = a0 - 1;
                op.action = EditAction::InsertAfter;
            }
            script.edits.push_back(std::move(op));
            return;
        }
        if (b0 == b1) {
            for (std::size_t p = a0; p < a1; ++p) {
                script.edits.push_back({p, EditAction::Delete, {}});
            }
            return;
        }
        // changed run: one replace anchored at the first position, deletes
        // for the rest
        EditOp rep;
        rep.position = a0;
        rep.action = EditAction::Replace;
        rep.payload.assign(b.begin() + static_cast<std::ptrdiff_t>(b0),
                           b.begin() + static_cast<std::ptrdiff_t>(b1));
        script.edits.push_back(std::move(rep));
        for (std::size_t p = a0 + 1; p < a1; ++p) {
            script.edits.push_back({p, EditAction::Delete, {}});
        }
    };

    std::size_t ai = 0, bi = 0;
    for (auto [am, bm] : anchors) {
        emit_gap(ai, am, bi, bm);
        ai = am + 1;
        bi = bm + 1;
    }
    emit_gap(ai, a.size(), bi, b.size());

    // Insertions on both sides of the first token collide at position 0
    // (insert-before 0 plus insert-after 0); fold them into one replace.
    if (script.edits.size() >= 2 && script.edits[0].position == 0 &&
        script.edits[1].position == 0 &&
        script.edits[0].action == EditAction::InsertBefore &&
        script.edits[1].action == EditAction::InsertAfter) {
        EditOp merged;
        merged.position = 0;
        merged.action = EditAction::Replace;
        merged.payload = script.edits[0].payload;
        merged.payload.push_back(a[0]);
        merged.payload.insert(merged.payload.end(), script.edits[1].payload.begin(),
                              script.edits[1].payload.end());
        script.edits.erase(script.edits.begin(), script.edits.begin() + 2);
        script.edits.insert(script.edits.begin(), std::move(merged));
    }

    validate_edit_script(script);
    return script;
}

std::size_t edit_count(const EditScript& script) { return script.edits.size(); }

InjectionResult inject(const TokenSequence& benign, const EditScript& script) {
    InjectionResult result;
    result.vulnerable = apply_edit_script(benign, script);
    result.script = script;
    result.edit_count = edit_count(script);
    return result;
}

ShapeReport check_functional_shape(const TokenSequence& benign, const TokenSequence& vulnerable) {
    ShapeReport report;

    int paren = 0, brace = 0, bracket = 0;
    bool negative = false;
    bool has_substance = false;
    for (const Token& t : vulnerable.tokens) {
        if (t.kind != TokenKind::Whitespace && t.kind != TokenKind::Comment) {
            has_substance = true;
        }
        if (t.kind != TokenKind::Punctuation || t.text.size() != 1) continue;
        switch (t.text[0]) {
        case '(': ++paren; break;
        case ')': --paren; break;
        case '{': ++brace; break;
        case '}': --brace; break;
        case '[': ++bracket; break;
        case ']': --bracket; break;
        default: break;
        }
        if (paren < 0 || brace < 0 || bracket < 0) negative = true;
    }
    report.balanced_delimiters = paren == 0 && brace == 0 && bracket == 0 && !negative;
    report.nonempty = has_substance;
    report.trivial = same_lexemes(substantive_tokens(benign), substantive_tokens(vulnerable));
    return report;
}

Json edit_script_to_json(const EditScript& script) {
    Json edits = Json::array();
    for (const EditOp& op : script.edits) {
        Json payload = Json::array();
        for (const Token& t : op.payload) {
            payload.push_back({{"kind", to_string(t.kind)}, {"text", t.text}});
        }
        edits.push_back({{"pos", op.position},
                         {"action", to_string(op.action)},
                         {"payload", std::move(payload)}});
    }
    return Json{{"target_length", script.target_length}, {"edits", std::move(edits)}};
}

EditScript edit_script_from_json(const Json& j) {
    EditScript script;
    script.target_length = j.at("target_length").get<std::size_t>();
    for (const Json& e : j.at("edits")) {
        EditOp op;
        op.position = e.at("pos").get<std::size_t>();
        op.action = edit_action_from_string(e.at("action").get<std::string>());
        for (const Json& p : e.at("payload")) {
            Token t;
            t.kind = token_kind_from_string(p.at("kind").get<std::string>());
            t.text = p.at("text").get<std::string>();
            if (t.text.empty()) throw DomainError("edit payload token with empty text");
            op.payload.push_back(std::move(t));
        }
        script.edits.push_back(std::move(op));
    }
    validate_edit_script(script);
    return script;
}

}  // namespace aviator
