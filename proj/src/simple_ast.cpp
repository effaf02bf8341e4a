#include "aviator/simple_ast.hpp"

#include <algorithm>
#include <unordered_set>

namespace aviator::ast {

namespace {

bool is_type_keyword(const Token& t) {
    if (t.kind != TokenKind::Keyword) return false;
    static const std::unordered_set<std::string_view> types = {
        "void", "char", "short", "int", "long", "float", "double", "signed",
        "unsigned", "bool", "_Bool", "auto", "const", "volatile", "static",
        "extern", "register", "inline", "restrict", "struct", "union", "enum",
        "char16_t", "char32_t", "wchar_t", "constexpr", "_Atomic",
    };
    return types.count(t.text) > 0;
}

int binary_precedence(const std::string& op) {
    if (op == "||" || op == "or") return 1;
    if (op == "&&" || op == "and") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
}

bool is_assign_op(const std::string& op) {
    return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" ||
           op == "%=" || op == "&=" || op == "|=" || op == "^=" || op == "<<=" ||
           op == ">>=";
}

struct Parser {
    const std::vector<Token>& t;
    std::size_t i = 0;
    int statements_parsed = 0;
    int depth = 0;
    static constexpr int kMaxDepth = 200;

    explicit Parser(const std::vector<Token>& toks) : t(toks) {}

    bool done() const { return i >= t.size(); }
    const Token& cur() const { return t[i]; }
    const Token* peek(std::size_t k = 0) const {
        return i + k < t.size() ? &t[i + k] : nullptr;
    }
    bool at(const char* text) const { return !done() && cur().text == text; }
    bool at_kind(TokenKind k) const { return !done() && cur().kind == k; }

    Node take_leaf(const char* label_override = nullptr) {
        Node n;
        const Token& tok = cur();
        if (label_override) {
            n.label = label_override;
        } else if (tok.kind == TokenKind::Identifier) {
            n.label = "id";
            n.name = tok.text;
        } else if (tok.kind == TokenKind::Literal) {
            n.label = "lit";
        } else {
            n.label = tok.text;
        }
        ++i;
        return n;
    }

    bool eat(const char* text) {
        if (at(text)) {
            ++i;
            return true;
        }
        return false;
    }

    struct DepthGuard {
        Parser& p;
        bool ok;
        explicit DepthGuard(Parser& parser) : p(parser), ok(++p.depth <= kMaxDepth) {}
        ~DepthGuard() { --p.depth; }
    };

    Node parse_unit() {
        Node unit;
        unit.label = "unit";
        while (!done()) {
            std::size_t before = i;
            unit.children.push_back(parse_external());
            if (i == before) ++i;  // safety against stalls
        }
        return unit;
    }

    // Bounded lookahead for "specifiers name ( ... ) {" at top level.
    bool looks_like_function() const {
        std::size_t j = i;
        int seen = 0;
        bool saw_name = false;
        while (j < t.size() && seen < 40) {
            const Token& tok = t[j];
            if (tok.text == ";" || tok.text == "}" || tok.text == "=") return false;
            if (tok.text == "(") {
                if (!saw_name) return false;
                int nest = 1;
                ++j;
                while (j < t.size() && nest > 0) {
                    if (t[j].text == "(") ++nest;
                    if (t[j].text == ")") --nest;
                    ++j;
                }
                return j < t.size() && t[j].text == "{";
            }
            if (tok.kind == TokenKind::Identifier) saw_name = true;
            else if (!is_type_keyword(tok) && tok.text != "*" && tok.text != "&") return false;
            ++j;
            ++seen;
        }
        return false;
    }

    Node parse_external() {
        if (looks_like_function()) return parse_function();
        return parse_statement();
    }

    Node parse_function() {
        Node fn;
        fn.label = "func";
        // specifiers and pointer decorations up to the name that owns '('
        while (!done()) {
            const Token* next = peek(1);
            if (cur().kind == TokenKind::Identifier && next && next->text == "(") break;
            fn.children.push_back(take_leaf());
        }
        if (done()) return fn;
        fn.children.push_back(take_leaf());  // function name
        Node params;
        params.label = "params";
        eat("(");
        while (!done() && !at(")")) {
            Node p;
            p.label = "param";
            while (!done() && !at(",") && !at(")")) {
                p.children.push_back(take_leaf());
            }
            if (!p.children.empty()) params.children.push_back(std::move(p));
            eat(",");
        }
        eat(")");
        fn.children.push_back(std::move(params));
        if (at("{")) fn.children.push_back(parse_block());
        return fn;
    }

    Node parse_block() {
        Node block;
        block.label = "block";
        eat("{");
        while (!done() && !at("}")) {
            std::size_t before = i;
            block.children.push_back(parse_statement());
            if (i == before) ++i;
        }
        eat("}");
        ++statements_parsed;
        return block;
    }

    bool starts_decl() const {
        if (done()) return false;
        const Token& tok = cur();
        if (is_type_keyword(tok)) return true;
        // "Name ident" at statement start reads as a declaration
        const Token* next = peek(1);
        return tok.kind == TokenKind::Identifier && next &&
               next->kind == TokenKind::Identifier;
    }

    Node parse_statement() {
        DepthGuard guard(*this);
        if (!guard.ok || done()) {
            Node n;
            n.label = "stray";
            if (!done()) ++i;
            return n;
        }
        if (at("{")) return parse_block();
        if (at(";")) {
            ++i;
            ++statements_parsed;
            Node n;
            n.label = "empty";
            return n;
        }
        if (at_kind(TokenKind::Keyword)) {
            const std::string& kw = cur().text;
            if (kw == "if") return parse_if();
            if (kw == "while") return parse_while();
            if (kw == "do") return parse_do();
            if (kw == "for") return parse_for();
            if (kw == "switch") return parse_switch();
            if (kw == "return") return parse_return();
            if (kw == "break" || kw == "continue") {
                Node n;
                n.label = kw;
                ++i;
                eat(";");
                ++statements_parsed;
                return n;
            }
            if (kw == "goto") {
                Node n;
                n.label = "goto";
                ++i;
                if (at_kind(TokenKind::Identifier)) n.children.push_back(take_leaf());
                eat(";");
                ++statements_parsed;
                return n;
            }
            if (kw == "case") {
                Node n;
                n.label = "case";
                ++i;
                n.children.push_back(parse_expr());
                eat(":");
                ++statements_parsed;
                return n;
            }
            if (kw == "default") {
                Node n;
                n.label = "default";
                ++i;
                eat(":");
                ++statements_parsed;
                return n;
            }
        }
        // label:
        if (at_kind(TokenKind::Identifier) && peek(1) && peek(1)->text == ":" &&
            (!peek(2) || peek(2)->text != ":")) {
            Node n;
            n.label = "label";
            n.children.push_back(take_leaf());
            eat(":");
            ++statements_parsed;
            return n;
        }
        if (at(")") || at("}") || at("]")) {
            Node n;
            n.label = "stray";
            ++i;
            return n;
        }
        if (starts_decl()) return parse_decl();
        Node stmt;
        stmt.label = "stmt";
        stmt.children.push_back(parse_expr());
        eat(";");
        ++statements_parsed;
        return stmt;
    }

    Node parse_paren_condition() {
        Node cond;
        cond.label = "cond";
        if (eat("(")) {
            if (!at(")")) cond.children.push_back(parse_expr());
            eat(")");
        }
        return cond;
    }

    Node parse_if() {
        Node n;
        n.label = "if";
        ++i;
        n.children.push_back(parse_paren_condition());
        n.children.push_back(parse_statement());
        if (at("else")) {
            ++i;
            n.children.push_back(parse_statement());
        }
        ++statements_parsed;
        return n;
    }

    Node parse_while() {
        Node n;
        n.label = "while";
        ++i;
        n.children.push_back(parse_paren_condition());
        n.children.push_back(parse_statement());
        ++statements_parsed;
        return n;
    }

    Node parse_do() {
        Node n;
        n.label = "do";
        ++i;
        n.children.push_back(parse_statement());
        if (eat("while")) n.children.push_back(parse_paren_condition());
        eat(";");
        ++statements_parsed;
        return n;
    }

    Node parse_for() {
        Node n;
        n.label = "for";
        ++i;
        eat("(");
        Node init;
        init.label = "for-init";
        if (!at(";")) {
            if (starts_decl()) {
                init.children.push_back(parse_decl_no_semi());
            } else {
                init.children.push_back(parse_expr());
            }
        }
        eat(";");
        n.children.push_back(std::move(init));
        Node cond;
        cond.label = "for-cond";
        if (!at(";")) cond.children.push_back(parse_expr());
        eat(";");
        n.children.push_back(std::move(cond));
        Node step;
        step.label = "for-step";
        if (!at(")")) step.children.push_back(parse_expr());
        eat(")");
        n.children.push_back(std::move(step));
        n.children.push_back(parse_statement());
        ++statements_parsed;
        return n;
    }

    Node parse_switch() {
        Node n;
        n.label = "switch";
        ++i;
        n.children.push_back(parse_paren_condition());
        n.children.push_back(parse_statement());
        ++statements_parsed;
        return n;
    }

    Node parse_return() {
        Node n;
        n.label = "ret";
        ++i;
        if (!at(";") && !done() && !at("}")) n.children.push_back(parse_expr());
        eat(";");
        ++statements_parsed;
        return n;
    }

    Node parse_decl() {
        Node n = parse_decl_no_semi();
        eat(";");
        ++statements_parsed;
        return n;
    }

    Node parse_decl_no_semi() {
        Node n;
        n.label = "decl";
        // specifiers: everything up to the first declarator name
        while (!done() && (is_type_keyword(cur()) || at("*") || at("&"))) {
            if (at("*") || at("&")) break;
            n.children.push_back(take_leaf());
            // struct/union/enum tag
            if (!n.children.empty() &&
                (n.children.back().label == "struct" || n.children.back().label == "union" ||
                 n.children.back().label == "enum") &&
                at_kind(TokenKind::Identifier)) {
                n.children.push_back(take_leaf());
            }
        }
        // "Name ident" style: the first identifier is the type name
        if (at_kind(TokenKind::Identifier) && peek(1) &&
            (peek(1)->kind == TokenKind::Identifier || peek(1)->text == "*")) {
            bool second_is_name = peek(1)->kind == TokenKind::Identifier;
            if (second_is_name ||
                (peek(2) && peek(2)->kind == TokenKind::Identifier)) {
                n.children.push_back(take_leaf("type"));
            }
        }
        while (!done() && !at(";")) {
            Node d;
            d.label = "dtor";
            while (at("*") || at("&")) d.children.push_back(take_leaf());
            if (at_kind(TokenKind::Identifier)) {
                d.children.push_back(take_leaf());
            } else if (!at("=") && !at(",") && !at("[")) {
                break;  // lost; bail to tolerate garbage
            }
            while (at("[")) {
                Node dim;
                dim.label = "dim";
                eat("[");
                if (!at("]")) dim.children.push_back(parse_expr());
                eat("]");
                d.children.push_back(std::move(dim));
            }
            if (at("(")) {  // function declarator; swallow parameter tokens
                Node proto;
                proto.label = "proto";
                eat("(");
                int nest = 1;
                while (!done() && nest > 0) {
                    if (at("(")) ++nest;
                    if (at(")")) {
                        --nest;
                        if (nest == 0) break;
                    }
                    proto.children.push_back(take_leaf());
                }
                eat(")");
                d.children.push_back(std::move(proto));
            }
            if (eat("=")) {
                Node init;
                init.label = "init";
                init.children.push_back(parse_init_value());
                d.children.push_back(std::move(init));
            }
            n.children.push_back(std::move(d));
            if (!eat(",")) break;
        }
        return n;
    }

    Node parse_init_value() {
        if (at("{")) {
            Node agg;
            agg.label = "agg-init";
            eat("{");
            while (!done() && !at("}")) {
                agg.children.push_back(at("{") ? parse_init_value() : parse_assign_expr());
                if (!eat(",")) break;
            }
            eat("}");
            return agg;
        }
        return parse_assign_expr();
    }

    Node parse_expr() {
        DepthGuard guard(*this);
        if (!guard.ok) {
            Node n;
            n.label = "stray";
            if (!done()) ++i;
            return n;
        }
        Node first = parse_assign_expr();
        if (!at(",")) return first;
        Node comma;
        comma.label = "comma";
        comma.children.push_back(std::move(first));
        while (eat(",")) {
            if (done() || at(")") || at(";") || at("}")) break;
            comma.children.push_back(parse_assign_expr());
        }
        return comma;
    }

    Node parse_assign_expr() {
        DepthGuard guard(*this);
        if (!guard.ok) {
            Node n;
            n.label = "stray";
            if (!done()) ++i;
            return n;
        }
        Node lhs = parse_ternary();
        if (!done() && cur().kind == TokenKind::Operator && is_assign_op(cur().text)) {
            Node n;
            n.label = "assign:" + cur().text;
            ++i;
            n.children.push_back(std::move(lhs));
            n.children.push_back(parse_assign_expr());
            return n;
        }
        return lhs;
    }

    Node parse_ternary() {
        Node cond = parse_binary(1);
        if (!at("?")) return cond;
        Node n;
        n.label = "ternary";
        ++i;
        n.children.push_back(std::move(cond));
        n.children.push_back(parse_expr());
        eat(":");
        n.children.push_back(parse_ternary());
        return n;
    }

    Node parse_binary(int min_prec) {
        Node lhs = parse_unary();
        while (!done()) {
            if (cur().kind != TokenKind::Operator && cur().kind != TokenKind::Keyword) break;
            int prec = binary_precedence(cur().text);
            if (prec == 0 || prec < min_prec) break;
            std::string op = cur().text;
            ++i;
            Node rhs = parse_binary(prec + 1);
            Node n;
            n.label = "bin:" + op;
            n.children.push_back(std::move(lhs));
            n.children.push_back(std::move(rhs));
            lhs = std::move(n);
        }
        return lhs;
    }

    Node parse_unary() {
        DepthGuard guard(*this);
        if (!guard.ok || done()) {
            Node n;
            n.label = "stray";
            if (!done()) ++i;
            return n;
        }
        const std::string& text = cur().text;
        if (cur().kind == TokenKind::Operator &&
            (text == "!" || text == "~" || text == "-" || text == "+" || text == "*" ||
             text == "&" || text == "++" || text == "--")) {
            Node n;
            n.label = "unary:" + text;
            ++i;
            n.children.push_back(parse_unary());
            return n;
        }
        if (at("sizeof")) {
            Node n;
            n.label = "sizeof";
            ++i;
            if (eat("(")) {
                while (!done() && !at(")")) n.children.push_back(take_leaf());
                eat(")");
            } else {
                n.children.push_back(parse_unary());
            }
            return n;
        }
        return parse_postfix();
    }

    Node parse_postfix() {
        Node base = parse_primary();
        while (!done()) {
            if (at("(")) {
                Node call;
                call.label = "call";
                call.children.push_back(std::move(base));
                eat("(");
                while (!done() && !at(")")) {
                    call.children.push_back(parse_assign_expr());
                    if (!eat(",")) break;
                }
                eat(")");
                base = std::move(call);
            } else if (at("[")) {
                Node idx;
                idx.label = "index";
                idx.children.push_back(std::move(base));
                eat("[");
                if (!at("]")) idx.children.push_back(parse_expr());
                eat("]");
                base = std::move(idx);
            } else if (at(".") || at("->")) {
                Node mem;
                mem.label = "member:" + cur().text;
                ++i;
                mem.children.push_back(std::move(base));
                if (at_kind(TokenKind::Identifier)) mem.children.push_back(take_leaf("field"));
                base = std::move(mem);
            } else if (at("++") || at("--")) {
                Node post;
                post.label = "post:" + cur().text;
                ++i;
                post.children.push_back(std::move(base));
                base = std::move(post);
            } else {
                break;
            }
        }
        return base;
    }

    Node parse_primary() {
        if (done()) {
            Node n;
            n.label = "stray";
            return n;
        }
        if (at("(")) {
            eat("(");
            Node inner = parse_expr();
            eat(")");
            return inner;
        }
        if (at_kind(TokenKind::Identifier) || at_kind(TokenKind::Literal)) {
            return take_leaf();
        }
        if (at("true") || at("false") || at("nullptr") || at("this")) {
            Node n = take_leaf();
            n.label = "lit";
            n.name.clear();
            return n;
        }
        // anything else: absorb one token as a leaf and keep going
        return take_leaf();
    }
};

}  // namespace

ParseResult parse_tokens(const std::vector<Token>& tokens) {
    Parser p(tokens);
    ParseResult result;
    result.root = p.parse_unit();
    result.degenerate = !tokens.empty() && p.statements_parsed == 0;
    return result;
}

ParseResult parse_code(std::string_view code, Dialect dialect) {
    TokenSequence seq = tokenize(code, dialect);
    std::vector<Token> filtered;
    for (const Token& t : seq.tokens) {
        if (t.kind == TokenKind::Whitespace || t.kind == TokenKind::Comment ||
            t.kind == TokenKind::Preprocessor) {
            continue;
        }
        filtered.push_back(t);
    }
    return parse_tokens(filtered);
}

std::string serialize(const Node& node) {
    if (node.leaf()) return node.label;
    std::string out = node.label;
    out += "(";
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += " ";
        out += serialize(node.children[i]);
    }
    out += ")";
    return out;
}

namespace {

int collect(const Node& node, std::map<std::string, int>& multiset) {
    if (node.leaf()) return 1;
    int height = 0;
    for (const Node& c : node.children) height = std::max(height, collect(c, multiset));
    ++height;
    if (height >= 2) multiset[serialize(node)] += 1;
    return height;
}

struct DefUseWalker {
    std::map<std::string, int> def_count;  // name -> number of defs so far
    std::map<std::string, int> edges;

    void define(const std::string& name) {
        if (name.empty()) return;
        def_count[name] += 1;
    }

    void use(const std::string& name) {
        if (name.empty()) return;
        auto it = def_count.find(name);
        if (it == def_count.end() || it->second == 0) return;
        edges[name + "@" + std::to_string(it->second - 1)] += 1;
    }

    void walk_uses(const Node& n) {
        if (n.label == "id") {
            use(n.name);
            return;
        }
        walk(n);
    }

    void walk(const Node& n) {
        if (n.label == "id") {
            use(n.name);
            return;
        }
        if (n.label == "func") {
            for (const Node& c : n.children) {
                if (c.label == "params") {
                    for (const Node& p : c.children) {
                        // last identifier of the param is the name
                        for (auto it = p.children.rbegin(); it != p.children.rend(); ++it) {
                            if (it->label == "id") {
                                define(it->name);
                                break;
                            }
                        }
                    }
                } else if (c.label == "block") {
                    walk(c);
                }
            }
            return;
        }
        if (n.label == "decl") {
            for (const Node& c : n.children) {
                if (c.label != "dtor") continue;
                const Node* name_node = nullptr;
                for (const Node& part : c.children) {
                    if (part.label == "id" && !name_node) name_node = &part;
                    if (part.label == "init" || part.label == "dim") walk(part);
                }
                if (name_node) define(name_node->name);
            }
            return;
        }
        if (n.label.rfind("assign:", 0) == 0 && n.children.size() == 2) {
            const Node& lhs = n.children[0];
            const Node& rhs = n.children[1];
            walk(rhs);
            bool compound = n.label != "assign:=";
            if (lhs.label == "id") {
                if (compound) use(lhs.name);
                define(lhs.name);
            } else {
                walk(lhs);  // a[i] = x defines storage, uses the names
            }
            return;
        }
        if ((n.label == "unary:++" || n.label == "unary:--" || n.label == "post:++" ||
             n.label == "post:--") &&
            n.children.size() == 1) {
            const Node& operand = n.children[0];
            if (operand.label == "id") {
                use(operand.name);
                define(operand.name);
            } else {
                walk(operand);
            }
            return;
        }
        if (n.label == "call" && !n.children.empty()) {
            // callee names are functions, not data flow
            for (std::size_t k = 0; k < n.children.size(); ++k) {
                if (k == 0 && n.children[k].label == "id") continue;
                walk(n.children[k]);
            }
            return;
        }
        if (n.label.rfind("member:", 0) == 0) {
            if (!n.children.empty()) walk(n.children[0]);
            return;
        }
        for (const Node& c : n.children) walk(c);
    }
};

}  // namespace

std::map<std::string, int> subtree_multiset(const Node& root) {
    std::map<std::string, int> multiset;
    collect(root, multiset);
    return multiset;
}

std::map<std::string, int> def_use_edges(const Node& root) {
    DefUseWalker w;
    w.walk(root);
    return w.edges;
}

}  // namespace aviator::ast
