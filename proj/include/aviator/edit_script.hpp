#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "aviator/token.hpp"

namespace aviator {

using Json = nlohmann::ordered_json;

enum class EditAction { InsertBefore, InsertAfter, Delete, Replace };

const char* to_string(EditAction action);
EditAction edit_action_from_string(std::string_view name);

struct EditOp {
    std::size_t position = 0;  // 0-based index into the benign token sequence
    EditAction action = EditAction::Replace;
    std::vector<Token> payload;  // empty iff action == Delete
};

struct EditScript {
    std::vector<EditOp> edits;      // sorted by position, one op per position
    std::size_t target_length = 0;  // benign token count at creation
};

struct InjectionResult {
    TokenSequence vulnerable;
    EditScript script;
    std::size_t edit_count = 0;
};

// Applies the script and packages the outcome; the one entry point that
// realizes the injection operator end to end.
InjectionResult inject(const TokenSequence& benign, const EditScript& script);

// Checks ordering, uniqueness, position bounds, and payload/action
// consistency. Throws DomainError.
void validate_edit_script(const EditScript& script);

// Flattens the per-position transforms over the benign sequence. Pass-through
// positions keep their tokens; line/column of the output are recomputed from
// the concatenated text.
TokenSequence apply_edit_script(const TokenSequence& benign, const EditScript& script);

// LCS-anchored alignment over (kind, text). A maximal changed run becomes one
// Replace carrying the whole replacement payload at its first position plus
// Deletes for the remaining run positions; pure insertions canonicalize to
// insert-after the preceding anchored token (insert-before 0 at the start).
EditScript derive_edit_script(const TokenSequence& benign, const TokenSequence& vulnerable);

std::size_t edit_count(const EditScript& script);

struct ShapeReport {
    bool balanced_delimiters = false;
    bool nonempty = false;
    bool trivial = false;
};

ShapeReport check_functional_shape(const TokenSequence& benign, const TokenSequence& vulnerable);

Json edit_script_to_json(const EditScript& script);
EditScript edit_script_from_json(const Json& j);

}  // namespace aviator
