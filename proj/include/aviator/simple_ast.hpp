#pragma once

#include <map>
#include <string>
#include <vector>

#include "aviator/token.hpp"

namespace aviator::ast {

// Tolerant statement/expression tree used for similarity scoring. Not a
// compiler front end: it recovers from anything and never rejects input.
// Identifier and literal leaves are abstracted to "id"/"lit" in subtree
// serialization; the concrete name is kept for def-use extraction.
struct Node {
    std::string label;
    std::string name;  // identifier text, only for label == "id"
    std::vector<Node> children;

    bool leaf() const { return children.empty(); }
};

struct ParseResult {
    Node root;             // label "unit"
    bool degenerate = false;  // non-empty input yielded no statements
};

// Parses substantive tokens (whitespace/comment/preprocessor tokens are
// skipped by the caller via parse_code, or must already be absent).
ParseResult parse_tokens(const std::vector<Token>& tokens);

ParseResult parse_code(std::string_view code, Dialect dialect = Dialect::Cpp);

std::string serialize(const Node& node);

// Multiset of serialized subtrees with height >= 2 (every node that has at
// least one child), root included.
std::map<std::string, int> subtree_multiset(const Node& root);

// Multiset of def-use edges keyed by "name@defOrdinal": a use of a variable
// reached by its k-th definition (in walk order) contributes one edge.
std::map<std::string, int> def_use_edges(const Node& root);

}  // namespace aviator::ast
