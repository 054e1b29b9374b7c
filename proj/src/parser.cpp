#include "pimpl_sentinel/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace sentinel {

namespace {

struct ParseError {
    std::string reason;
};

constexpr std::array<std::string_view, 13> kUnsupportedKeywords = {
    "for", "while", "with", "try", "async", "del", "assert", "global",
    "nonlocal", "break", "continue", "yield", "lambda"};

constexpr std::array<std::string_view, 12> kAugOps = {"+=", "-=", "*=", "/=", "//=", "%=",
                                                      "**=", ">>=", "<<=", "&=", "|=", "^="};

bool is_clause_keyword(const Token& t) {
    return t.kind == TokenKind::Keyword &&
           (t.lexeme == "else" || t.lexeme == "elif" || t.lexeme == "except" || t.lexeme == "finally");
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class Parser {
public:
    Parser(const SourceFile& source, LexResult lexed)
        : src_(source), toks_(std::move(lexed.tokens)), diags_(std::move(lexed.diagnostics)) {}

    Node parse_file(std::vector<Diagnostic>& diags_out) {
        Node module;
        module.kind = NodeKind::Module;
        while (!at(TokenKind::EndMarker)) {
            if (at(TokenKind::Newline) || at(TokenKind::Dedent)) {
                ++pos_;
                continue;
            }
            parse_statement_into(module.body);
        }
        mark_docstring(module.body);
        module.span = LineIndex(src_.text).span(0, src_.text.size());
        diags_out = std::move(diags_);
        return module;
    }

private:
    const SourceFile& src_;
    std::vector<Token> toks_;
    std::vector<Diagnostic> diags_;
    std::size_t pos_ = 0;
    std::size_t last_ = 0;  // index of the last consumed content token

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek_tok(std::size_t ahead = 1) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at(TokenKind k) const { return cur().kind == k; }
    bool at_op(std::string_view op) const { return cur().kind == TokenKind::Op && cur().lexeme == op; }
    bool at_kw(std::string_view kw) const {
        return cur().kind == TokenKind::Keyword && cur().lexeme == kw;
    }

    const Token& advance() {
        const Token& t = toks_[pos_];
        if (t.kind != TokenKind::EndMarker) {
            if (t.kind != TokenKind::Newline && t.kind != TokenKind::Indent &&
                t.kind != TokenKind::Dedent)
                last_ = pos_;
            ++pos_;
        }
        return t;
    }

    [[noreturn]] void fail(std::string reason) const { throw ParseError{std::move(reason)}; }

    void expect_op(std::string_view op) {
        if (!at_op(op)) fail("expected '" + std::string(op) + "'");
        advance();
    }

    void expect_kw(std::string_view kw) {
        if (!at_kw(kw)) fail("expected '" + std::string(kw) + "'");
        advance();
    }

    std::string expect_name() {
        if (!at(TokenKind::Name)) fail("expected identifier");
        return advance().lexeme;
    }

    Span span_from(std::size_t start_tok) const {
        const std::size_t end_tok = std::max(last_, start_tok);
        Span s = toks_[start_tok].span;
        const Span& e = toks_[end_tok].span;
        s.end_offset = e.end_offset;
        s.end_line = e.end_line;
        s.end_col = e.end_col;
        return s;
    }

    Node make(NodeKind kind, std::size_t start_tok) const {
        Node n;
        n.kind = kind;
        n.span = span_from(start_tok);
        return n;
    }

    // ---- statements ------------------------------------------------------

    void parse_statement_into(std::vector<Node>& out) {
        const std::size_t start = pos_;
        try {
            if (at(TokenKind::Indent)) fail("unexpected indent");
            if (at_op("@") || at_kw("class") || at_kw("def") || at_kw("if")) {
                out.push_back(parse_compound());
                return;
            }
            std::vector<Node> simple = parse_simple_line();
            for (auto& n : simple) out.push_back(std::move(n));
        } catch (const ParseError& err) {
            out.push_back(recover(start, err.reason));
        }
    }

    Node recover(std::size_t start, const std::string& reason) {
        pos_ = start;
        const bool compound = statement_is_compound(start);
        bool skipped_block = false;
        if (at(TokenKind::Indent)) {
            skip_block();
        } else {
            skip_logical_line();
            if (at(TokenKind::Indent)) {
                skip_block();
                skipped_block = true;
            }
        }
        if (compound || skipped_block) {
            while (is_clause_keyword(cur())) {
                skip_logical_line();
                if (at(TokenKind::Indent)) skip_block();
            }
        }
        std::size_t end_tok = pos_ == 0 ? 0 : pos_ - 1;
        while (end_tok > start && (toks_[end_tok].kind == TokenKind::Newline ||
                                   toks_[end_tok].kind == TokenKind::Dedent ||
                                   toks_[end_tok].kind == TokenKind::Indent))
            --end_tok;
        Node n;
        n.kind = NodeKind::Unsupported;
        n.text = reason;
        n.span = toks_[start].span;
        const Span& e = toks_[end_tok].span;
        if (e.end_offset >= n.span.start_offset) {
            n.span.end_offset = e.end_offset;
            n.span.end_line = e.end_line;
            n.span.end_col = e.end_col;
        }
        last_ = std::max(last_, end_tok);
        diags_.push_back(make_diagnostic(codes::kUnsupported, src_, n.span, "unsupported statement: " + reason));
        return n;
    }

    bool statement_is_compound(std::size_t start) const {
        std::size_t i = start;
        while (i < toks_.size() && toks_[i].kind != TokenKind::Newline &&
               toks_[i].kind != TokenKind::EndMarker)
            ++i;
        return i > start && toks_[i - 1].kind == TokenKind::Op && toks_[i - 1].lexeme == ":";
    }

    void skip_logical_line() {
        while (!at(TokenKind::Newline) && !at(TokenKind::EndMarker)) {
            if (at(TokenKind::Indent) || at(TokenKind::Dedent)) {
                ++pos_;
                continue;
            }
            advance();
        }
        if (at(TokenKind::Newline)) advance();
    }

    void skip_block() {
        int depth = 0;
        do {
            if (at(TokenKind::Indent)) ++depth;
            else if (at(TokenKind::Dedent)) --depth;
            else if (at(TokenKind::EndMarker)) return;
            advance();
        } while (depth > 0);
    }

    std::vector<Node> parse_simple_line() {
        std::vector<Node> out;
        out.push_back(parse_small_statement());
        while (at_op(";")) {
            advance();
            if (at(TokenKind::Newline) || at(TokenKind::EndMarker)) break;
            out.push_back(parse_small_statement());
        }
        if (at(TokenKind::EndMarker)) return out;
        if (!at(TokenKind::Newline)) fail("unexpected token '" + cur().lexeme + "'");
        advance();
        return out;
    }

    bool at_match_statement() const {
        if (!(cur().kind == TokenKind::Name && (cur().lexeme == "match" || cur().lexeme == "case")))
            return false;
        const Token& next = peek_tok();
        if (next.kind == TokenKind::Op && next.lexeme != "(" && next.lexeme != "[" &&
            next.lexeme != "{" && next.lexeme != "-" && next.lexeme != "*")
            return false;
        if (next.kind == TokenKind::Newline) return false;
        return statement_is_compound(pos_);
    }

    Node parse_small_statement() {
        const std::size_t start = pos_;
        const Token& t = cur();
        if (t.kind == TokenKind::Error) fail("invalid token '" + t.lexeme + "'");
        if (t.kind == TokenKind::Keyword) {
            for (auto kw : kUnsupportedKeywords) {
                if (t.lexeme == kw) fail("'" + t.lexeme + "' is outside the supported subset");
            }
            if (t.lexeme == "import") return parse_import();
            if (t.lexeme == "from") return parse_import_from();
            if (t.lexeme == "pass") {
                advance();
                return make(NodeKind::Pass, start);
            }
            if (t.lexeme == "return") {
                advance();
                Node n;
                n.kind = NodeKind::Return;
                if (!at_statement_end()) n.children.push_back(parse_testlist());
                n.span = span_from(start);
                return n;
            }
            if (t.lexeme == "raise") {
                advance();
                Node n;
                n.kind = NodeKind::Raise;
                if (!at_statement_end()) {
                    n.children.push_back(parse_test());
                    if (at_kw("from")) {
                        advance();
                        n.children.push_back(parse_test());
                    }
                }
                n.span = span_from(start);
                return n;
            }
            if (t.lexeme == "else" || t.lexeme == "elif" || t.lexeme == "except" ||
                t.lexeme == "finally" || t.lexeme == "class" || t.lexeme == "def" || t.lexeme == "if")
                fail("misplaced '" + t.lexeme + "'");
        }
        if (at_match_statement()) fail("'" + t.lexeme + "' statement is outside the supported subset");
        return parse_expr_statement();
    }

    bool at_statement_end() const {
        return at(TokenKind::Newline) || at(TokenKind::EndMarker) || at_op(";");
    }

    std::string parse_dotted() {
        std::string name = expect_name();
        while (at_op(".")) {
            advance();
            name += "." + expect_name();
        }
        return name;
    }

    Node parse_import() {
        const std::size_t start = pos_;
        expect_kw("import");
        Node n;
        n.kind = NodeKind::Import;
        do {
            if (!n.aliases.empty()) advance();
            const std::size_t a_start = pos_;
            ImportAlias alias;
            alias.name = parse_dotted();
            if (at_kw("as")) {
                advance();
                alias.asname = expect_name();
            }
            alias.span = span_from(a_start);
            n.aliases.push_back(std::move(alias));
        } while (at_op(","));
        n.span = span_from(start);
        return n;
    }

    Node parse_import_from() {
        const std::size_t start = pos_;
        expect_kw("from");
        Node n;
        n.kind = NodeKind::ImportFrom;
        while (at_op(".") || at_op("...")) {
            n.level += static_cast<int>(cur().lexeme.size());
            advance();
        }
        if (!at_kw("import")) n.text = parse_dotted();
        if (n.level == 0 && n.text.empty()) fail("missing module in from-import");
        expect_kw("import");
        if (at_op("*")) {
            const std::size_t a_start = pos_;
            advance();
            n.aliases.push_back(ImportAlias{"*", "", span_from(a_start)});
        } else {
            const bool paren = at_op("(");
            if (paren) advance();
            while (true) {
                const std::size_t a_start = pos_;
                ImportAlias alias;
                alias.name = expect_name();
                if (at_kw("as")) {
                    advance();
                    alias.asname = expect_name();
                }
                alias.span = span_from(a_start);
                n.aliases.push_back(std::move(alias));
                if (!at_op(",")) break;
                advance();
                if (paren && at_op(")")) break;
            }
            if (paren) expect_op(")");
        }
        n.span = span_from(start);
        return n;
    }

    Node parse_expr_statement() {
        const std::size_t start = pos_;
        Node first = parse_testlist(true);
        if (at_op(":=")) fail("assignment expression is outside the supported subset");
        if (at_op(":")) {
            advance();
            Node n;
            n.kind = NodeKind::Assign;
            n.annotated = true;
            n.children.push_back(std::move(first));
            parse_test();  // annotation, not retained
            if (at_op("=")) {
                advance();
                n.children.push_back(parse_testlist(true));
            }
            n.span = span_from(start);
            return n;
        }
        if (at_op("=")) {
            Node n;
            n.kind = NodeKind::Assign;
            n.children.push_back(std::move(first));
            while (at_op("=")) {
                advance();
                n.children.push_back(parse_testlist(true));
            }
            n.span = span_from(start);
            return n;
        }
        if (cur().kind == TokenKind::Op &&
            std::find(kAugOps.begin(), kAugOps.end(), cur().lexeme) != kAugOps.end()) {
            Node n;
            n.kind = NodeKind::AugAssign;
            n.op = advance().lexeme;
            n.children.push_back(std::move(first));
            n.children.push_back(parse_testlist());
            n.span = span_from(start);
            return n;
        }
        Node n;
        n.kind = NodeKind::ExprStmt;
        n.children.push_back(std::move(first));
        n.span = span_from(start);
        return n;
    }

    Node parse_compound() {
        const std::size_t start = pos_;
        std::vector<Node> decorators;
        while (at_op("@")) {
            const std::size_t d_start = pos_;
            advance();
            Node d;
            d.kind = NodeKind::Decorator;
            d.children.push_back(parse_test());
            d.span = span_from(d_start);
            if (!at(TokenKind::Newline)) fail("expected newline after decorator");
            advance();
            decorators.push_back(std::move(d));
        }
        if (at_kw("class")) return parse_class(start, std::move(decorators));
        if (at_kw("def")) return parse_def(start, std::move(decorators));
        if (!decorators.empty()) fail("decorator must precede a class or function");
        return parse_if();
    }

    Node parse_class(std::size_t start, std::vector<Node> decorators) {
        expect_kw("class");
        Node n;
        n.kind = NodeKind::ClassDef;
        n.name_span = cur().span;
        n.text = expect_name();
        n.children = std::move(decorators);
        if (at_op("(")) {
            advance();
            parse_arguments(n.children, ")");
            expect_op(")");
        }
        expect_op(":");
        n.body = parse_suite();
        mark_docstring(n.body);
        n.span = span_from(start);
        return n;
    }

    Node parse_def(std::size_t start, std::vector<Node> decorators) {
        expect_kw("def");
        Node n;
        n.kind = NodeKind::FunctionDef;
        n.name_span = cur().span;
        n.text = expect_name();
        n.children = std::move(decorators);
        expect_op("(");
        while (!at_op(")")) {
            n.children.push_back(parse_parameter());
            if (!at_op(",")) break;
            advance();
        }
        expect_op(")");
        if (at_op("->")) {
            advance();
            parse_test();
        }
        expect_op(":");
        n.body = parse_suite();
        mark_docstring(n.body);
        n.span = span_from(start);
        return n;
    }

    Node parse_parameter() {
        const std::size_t start = pos_;
        Node p;
        p.kind = NodeKind::Parameter;
        if (at_op("*") || at_op("**") || at_op("/")) {
            p.op = advance().lexeme;
            if (p.op == "/" || (p.op == "*" && (at_op(",") || at_op(")")))) {
                p.span = span_from(start);
                return p;
            }
        }
        p.name_span = cur().span;
        p.text = expect_name();
        if (at_op(":")) {
            advance();
            parse_test();
        }
        if (at_op("=")) {
            if (!p.op.empty()) fail("default on variadic parameter");
            advance();
            p.children.push_back(parse_test());
        }
        p.span = span_from(start);
        return p;
    }

    Node parse_if() {
        const std::size_t start = pos_;
        const bool elif = at_kw("elif");
        advance();  // 'if' or 'elif'
        Node n;
        n.kind = NodeKind::If;
        n.is_elif = elif;
        n.children.push_back(parse_test());
        expect_op(":");
        n.body = parse_suite();
        if (at_kw("elif")) {
            n.orelse.push_back(parse_if());
        } else if (at_kw("else")) {
            advance();
            expect_op(":");
            n.orelse = parse_suite();
        }
        n.span = span_from(start);
        return n;
    }

    std::vector<Node> parse_suite() {
        std::vector<Node> body;
        if (!at(TokenKind::Newline)) {
            body = parse_simple_line();
            return body;
        }
        advance();
        if (!at(TokenKind::Indent)) fail("expected an indented block");
        ++pos_;
        while (!at(TokenKind::Dedent) && !at(TokenKind::EndMarker)) {
            if (at(TokenKind::Newline)) {
                ++pos_;
                continue;
            }
            parse_statement_into(body);
        }
        if (at(TokenKind::Dedent)) ++pos_;
        return body;
    }

    void mark_docstring(std::vector<Node>& body) {
        if (body.empty()) return;
        Node& first = body.front();
        if (!first.is(NodeKind::ExprStmt) || first.children.size() != 1) return;
        const Node& lit = first.children.front();
        if (!lit.is(NodeKind::StringLit) || lit.op.find('f') != std::string::npos) return;
        first.kind = NodeKind::Docstring;
        first.text = lit.text;
    }

    // ---- expressions -----------------------------------------------------

    bool at_expr_start() const {
        const Token& t = cur();
        switch (t.kind) {
            case TokenKind::Name:
            case TokenKind::Number:
            case TokenKind::String:
                return true;
            case TokenKind::Keyword:
                return t.lexeme == "None" || t.lexeme == "True" || t.lexeme == "False" ||
                       t.lexeme == "not" || t.lexeme == "lambda" || t.lexeme == "await" ||
                       t.lexeme == "yield";
            case TokenKind::Op:
                return t.lexeme == "(" || t.lexeme == "[" || t.lexeme == "{" || t.lexeme == "-" ||
                       t.lexeme == "+" || t.lexeme == "~" || t.lexeme == "..." || t.lexeme == "*";
            default:
                return false;
        }
    }

    Node parse_testlist(bool allow_star = false) {
        const std::size_t start = pos_;
        Node first = allow_star && at_op("*") ? parse_starred() : parse_test();
        if (!at_op(",")) return first;
        Node tuple;
        tuple.kind = NodeKind::TupleLit;
        tuple.children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (!at_expr_start()) break;
            tuple.children.push_back(allow_star && at_op("*") ? parse_starred() : parse_test());
        }
        tuple.span = span_from(start);
        return tuple;
    }

    Node parse_starred() {
        const std::size_t start = pos_;
        Node n;
        n.kind = NodeKind::Starred;
        n.op = advance().lexeme;
        n.children.push_back(n.op == "**" ? parse_expr() : parse_expr());
        n.span = span_from(start);
        return n;
    }

    Node parse_test() {
        if (at_kw("lambda")) fail("lambda is outside the supported subset");
        if (at_kw("yield")) fail("yield is outside the supported subset");
        Node n = parse_or();
        if (at_kw("if")) fail("conditional expression is outside the supported subset");
        if (at_op(":=")) fail("assignment expression is outside the supported subset");
        return n;
    }

    Node parse_or() {
        const std::size_t start = pos_;
        Node left = parse_and();
        if (!at_kw("or")) return left;
        Node n;
        n.kind = NodeKind::BoolOp;
        n.op = "or";
        n.children.push_back(std::move(left));
        while (at_kw("or")) {
            advance();
            n.children.push_back(parse_and());
        }
        n.span = span_from(start);
        return n;
    }

    Node parse_and() {
        const std::size_t start = pos_;
        Node left = parse_not();
        if (!at_kw("and")) return left;
        Node n;
        n.kind = NodeKind::BoolOp;
        n.op = "and";
        n.children.push_back(std::move(left));
        while (at_kw("and")) {
            advance();
            n.children.push_back(parse_not());
        }
        n.span = span_from(start);
        return n;
    }

    Node parse_not() {
        const std::size_t start = pos_;
        if (at_kw("not")) {
            advance();
            Node n;
            n.kind = NodeKind::UnaryOp;
            n.op = "not";
            n.children.push_back(parse_not());
            n.span = span_from(start);
            return n;
        }
        return parse_comparison();
    }

    std::string comparison_op() {
        const Token& t = cur();
        if (t.kind == TokenKind::Op &&
            (t.lexeme == "<" || t.lexeme == ">" || t.lexeme == "==" || t.lexeme == ">=" ||
             t.lexeme == "<=" || t.lexeme == "!=")) {
            return advance().lexeme;
        }
        if (at_kw("in")) {
            advance();
            return "in";
        }
        if (at_kw("not") && peek_tok().kind == TokenKind::Keyword && peek_tok().lexeme == "in") {
            advance();
            advance();
            return "not in";
        }
        if (at_kw("is")) {
            advance();
            if (at_kw("not")) {
                advance();
                return "is not";
            }
            return "is";
        }
        return {};
    }

    Node parse_comparison() {
        const std::size_t start = pos_;
        Node left = parse_expr();
        std::string op = comparison_op();
        if (op.empty()) return left;
        Node n;
        n.kind = NodeKind::Compare;
        n.children.push_back(std::move(left));
        while (!op.empty()) {
            n.ops.push_back(op);
            n.children.push_back(parse_expr());
            op = comparison_op();
        }
        n.span = span_from(start);
        return n;
    }

    using SubParser = Node (Parser::*)();

    Node parse_binary(std::initializer_list<std::string_view> ops, SubParser next) {
        const std::size_t start = pos_;
        Node left = (this->*next)();
        while (cur().kind == TokenKind::Op &&
               std::find(ops.begin(), ops.end(), std::string_view(cur().lexeme)) != ops.end()) {
            Node n;
            n.kind = NodeKind::BinOp;
            n.op = advance().lexeme;
            n.children.push_back(std::move(left));
            n.children.push_back((this->*next)());
            n.span = span_from(start);
            left = std::move(n);
        }
        return left;
    }

    Node parse_expr() { return parse_binary({"|"}, &Parser::parse_xor); }
    Node parse_xor() { return parse_binary({"^"}, &Parser::parse_bitand); }
    Node parse_bitand() { return parse_binary({"&"}, &Parser::parse_shift); }
    Node parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
    Node parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
    Node parse_term() { return parse_binary({"*", "/", "//", "%", "@"}, &Parser::parse_factor); }

    Node parse_factor() {
        const std::size_t start = pos_;
        if (at_op("-") || at_op("+") || at_op("~")) {
            Node n;
            n.kind = NodeKind::UnaryOp;
            n.op = advance().lexeme;
            n.children.push_back(parse_factor());
            n.span = span_from(start);
            return n;
        }
        return parse_power();
    }

    Node parse_power() {
        const std::size_t start = pos_;
        if (at_kw("await")) fail("await is outside the supported subset");
        Node base = parse_atom_expr();
        if (at_op("**")) {
            Node n;
            n.kind = NodeKind::BinOp;
            n.op = advance().lexeme;
            n.children.push_back(std::move(base));
            n.children.push_back(parse_factor());
            n.span = span_from(start);
            return n;
        }
        return base;
    }

    Node parse_atom_expr() {
        const std::size_t start = pos_;
        Node n = parse_atom();
        while (true) {
            if (at_op("(")) {
                advance();
                Node call;
                call.kind = NodeKind::Call;
                call.children.push_back(std::move(n));
                parse_arguments(call.children, ")");
                expect_op(")");
                call.span = span_from(start);
                n = std::move(call);
            } else if (at_op("[")) {
                advance();
                Node sub;
                sub.kind = NodeKind::Subscript;
                sub.children.push_back(std::move(n));
                sub.children.push_back(parse_subscript_list());
                expect_op("]");
                sub.span = span_from(start);
                n = std::move(sub);
            } else if (at_op(".")) {
                advance();
                Node attr;
                attr.kind = NodeKind::Attribute;
                attr.text = expect_name();
                attr.children.push_back(std::move(n));
                attr.span = span_from(start);
                n = std::move(attr);
            } else {
                return n;
            }
        }
    }

    void parse_arguments(std::vector<Node>& out, std::string_view closer) {
        while (!at_op(closer)) {
            const std::size_t start = pos_;
            if (at_op("*") || at_op("**")) {
                out.push_back(parse_starred());
            } else if (at(TokenKind::Name) && peek_tok().kind == TokenKind::Op && peek_tok().lexeme == "=") {
                Node kw;
                kw.kind = NodeKind::Keyword;
                kw.text = advance().lexeme;
                advance();
                kw.children.push_back(parse_test());
                kw.span = span_from(start);
                out.push_back(std::move(kw));
            } else {
                out.push_back(parse_test());
                if (at_kw("for") || at_kw("async")) fail("generator expression is outside the supported subset");
            }
            if (!at_op(",")) break;
            advance();
        }
    }

    Node parse_subscript_list() {
        const std::size_t start = pos_;
        Node first = parse_subscript();
        if (!at_op(",")) return first;
        Node tuple;
        tuple.kind = NodeKind::TupleLit;
        tuple.children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (at_op("]")) break;
            tuple.children.push_back(parse_subscript());
        }
        tuple.span = span_from(start);
        return tuple;
    }

    Node parse_subscript() {
        const std::size_t start = pos_;
        Node lower;
        const bool has_lower = !at_op(":");
        if (has_lower) lower = parse_test();
        if (!at_op(":")) return lower;
        Node slice;
        slice.kind = NodeKind::Slice;
        if (has_lower) slice.children.push_back(std::move(lower));
        for (int part = 0; part < 2 && at_op(":"); ++part) {
            advance();
            if (!at_op(":") && !at_op("]") && !at_op(",")) slice.children.push_back(parse_test());
        }
        slice.span = span_from(start);
        return slice;
    }

    Node parse_atom() {
        const std::size_t start = pos_;
        const Token& t = cur();
        switch (t.kind) {
            case TokenKind::Name: {
                Node n;
                n.kind = NodeKind::NameRef;
                n.text = advance().lexeme;
                n.span = span_from(start);
                return n;
            }
            case TokenKind::Number: {
                Node n;
                n.kind = NodeKind::NumberLit;
                n.text = advance().lexeme;
                n.span = span_from(start);
                return n;
            }
            case TokenKind::String: {
                Node n;
                n.kind = NodeKind::StringLit;
                while (at(TokenKind::String)) {
                    const Token& s = advance();
                    n.text += decode_string_literal(s.lexeme);
                    const auto quote = s.lexeme.find_first_of("'\"");
                    for (std::size_t i = 0; i < quote; ++i)
                        n.op.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s.lexeme[i]))));
                }
                n.span = span_from(start);
                return n;
            }
            case TokenKind::Keyword:
                if (t.lexeme == "None" || t.lexeme == "True" || t.lexeme == "False") {
                    Node n;
                    n.kind = NodeKind::NameRef;
                    n.text = advance().lexeme;
                    n.span = span_from(start);
                    return n;
                }
                fail("unexpected keyword '" + t.lexeme + "'");
            case TokenKind::Op:
                if (t.lexeme == "(") return parse_paren();
                if (t.lexeme == "[") return parse_list();
                if (t.lexeme == "{") return parse_dict();
                if (t.lexeme == "...") {
                    advance();
                    Node n;
                    n.kind = NodeKind::NameRef;
                    n.text = "...";
                    n.span = span_from(start);
                    return n;
                }
                fail("unexpected '" + t.lexeme + "'");
            default:
                fail(t.kind == TokenKind::Error ? "invalid token '" + t.lexeme + "'"
                                                : "unexpected " + std::string(to_string(t.kind)));
        }
    }

    Node parse_paren() {
        const std::size_t start = pos_;
        advance();
        if (at_op(")")) {
            advance();
            Node n;
            n.kind = NodeKind::TupleLit;
            n.span = span_from(start);
            return n;
        }
        if (at_kw("yield")) fail("yield is outside the supported subset");
        Node inner = at_op("*") ? parse_starred() : parse_test();
        if (at_kw("for") || at_kw("async")) fail("generator expression is outside the supported subset");
        if (at_op(")")) {
            advance();
            // parentheses do not create a node; widen the span to cover them
            inner.span = merge(inner.span, span_from(start));
            return inner;
        }
        Node tuple;
        tuple.kind = NodeKind::TupleLit;
        tuple.children.push_back(std::move(inner));
        while (at_op(",")) {
            advance();
            if (at_op(")")) break;
            tuple.children.push_back(at_op("*") ? parse_starred() : parse_test());
        }
        expect_op(")");
        tuple.span = span_from(start);
        return tuple;
    }

    Node parse_list() {
        const std::size_t start = pos_;
        advance();
        Node n;
        n.kind = NodeKind::ListLit;
        while (!at_op("]")) {
            n.children.push_back(at_op("*") ? parse_starred() : parse_test());
            if (at_kw("for") || at_kw("async")) fail("list comprehension is outside the supported subset");
            if (!at_op(",")) break;
            advance();
        }
        expect_op("]");
        n.span = span_from(start);
        return n;
    }

    Node parse_dict() {
        const std::size_t start = pos_;
        advance();
        Node n;
        n.kind = NodeKind::DictLit;
        while (!at_op("}")) {
            if (at_op("**")) {
                n.children.push_back(parse_starred());
            } else {
                n.children.push_back(parse_test());
                if (!at_op(":")) fail("set displays and comprehensions are outside the supported subset");
                advance();
                n.children.push_back(parse_test());
                if (at_kw("for") || at_kw("async")) fail("dict comprehension is outside the supported subset");
            }
            if (!at_op(",")) break;
            advance();
        }
        expect_op("}");
        n.span = span_from(start);
        return n;
    }
};

}  // namespace

std::string decode_string_literal(std::string_view lexeme) {
    std::size_t q = lexeme.find_first_of("'\"");
    if (q == std::string_view::npos) return std::string(lexeme);
    bool raw = false;
    for (std::size_t i = 0; i < q; ++i) {
        if (lexeme[i] == 'r' || lexeme[i] == 'R') raw = true;
    }
    const char quote = lexeme[q];
    const bool triple = lexeme.size() >= q + 6 && lexeme[q + 1] == quote && lexeme[q + 2] == quote;
    const std::size_t open = triple ? 3 : 1;
    if (lexeme.size() < q + 2 * open) return {};
    const std::string_view body = lexeme.substr(q + open, lexeme.size() - q - 2 * open);
    if (raw) return std::string(body);

    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c != '\\' || i + 1 >= body.size()) {
            out.push_back(c);
            continue;
        }
        const char e = body[++i];
        switch (e) {
            case '\n':
                break;
            case '\r':
                if (i + 1 < body.size() && body[i + 1] == '\n') ++i;
                break;
            case '\\': out.push_back('\\'); break;
            case '\'': out.push_back('\''); break;
            case '"': out.push_back('"'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case 'a': out.push_back('\a'); break;
            case 'b': out.push_back('\b'); break;
            case 'f': out.push_back('\f'); break;
            case 'v': out.push_back('\v'); break;
            case 'x':
            case 'u':
            case 'U': {
                const std::size_t width = e == 'x' ? 2 : e == 'u' ? 4 : 8;
                const std::string_view hex = body.substr(i + 1, width);
                if (hex.size() == width &&
                    std::all_of(hex.begin(), hex.end(), [](char h) { return std::isxdigit(static_cast<unsigned char>(h)); })) {
                    append_utf8(out, std::stoul(std::string(hex), nullptr, 16));
                    i += width;
                } else {
                    out.push_back('\\');
                    out.push_back(e);
                }
                break;
            }
            default:
                if (e >= '0' && e <= '7') {
                    unsigned long value = static_cast<unsigned long>(e - '0');
                    for (int k = 0; k < 2 && i + 1 < body.size() && body[i + 1] >= '0' && body[i + 1] <= '7'; ++k)
                        value = value * 8 + static_cast<unsigned long>(body[++i] - '0');
                    append_utf8(out, value);
                } else {
                    out.push_back('\\');
                    out.push_back(e);
                }
        }
    }
    return out;
}

ParsedModule parse_module(const SourceFile& source) {
    ParsedModule out;
    out.source = source;
    LexResult lexed = tokenize(out.source);
    out.comments = lexed.comments;
    Parser parser(out.source, std::move(lexed));
    out.root = parser.parse_file(out.diagnostics);
    return out;
}

ParsedModule parse_text(std::string text, std::string module_id, std::string path) {
    SourceFile src;
    src.text = std::move(text);
    src.module_id = std::move(module_id);
    src.path = std::move(path);
    return parse_module(src);
}

}  // namespace sentinel
