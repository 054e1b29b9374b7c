#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pimpl_sentinel/diagnostic.hpp"
#include "pimpl_sentinel/lexer.hpp"

namespace sentinel {

enum class NodeKind {
    Module,
    Import,
    ImportFrom,
    ClassDef,
    FunctionDef,
    Assign,
    AugAssign,
    Return,
    Raise,
    Pass,
    If,
    ExprStmt,
    Attribute,
    NameRef,
    Call,
    StringLit,
    NumberLit,
    ListLit,
    TupleLit,
    DictLit,
    Compare,
    BoolOp,
    UnaryOp,
    BinOp,
    Subscript,
    Slice,
    Keyword,
    Starred,
    Decorator,
    Parameter,
    Docstring,
    Unsupported,
};

std::string_view to_string(NodeKind kind);

/// One `name [as asname]` clause of an import statement.
struct ImportAlias {
    std::string name;    // dotted for `import`, plain (or "*") for `from`
    std::string asname;  // empty when absent
    Span span;

    /// Name the alias binds in the importing scope.
    std::string bound_name() const;
};

/// Syntax tree node. Child layout by kind:
///   Module       body = statements
///   Import       aliases
///   ImportFrom   text = source module path (may be empty), level, aliases
///   ClassDef     text = name; children = Decorator*, base/Keyword exprs; body
///   FunctionDef  text = name; children = Decorator*, Parameter*; body
///   Assign       children = targets..., value (absent for a bare annotation);
///                annotated marks `x: T [= v]`
///   AugAssign    op; children = [target, value]
///   Return       children = [value?]
///   Raise        children = [exception?, cause?]
///   If           children = [test]; body; orelse (an `elif` is a single If
///                with is_elif set)
///   ExprStmt     children = [expr]
///   Docstring    text = decoded value; children = [StringLit]
///   Attribute    text = attribute name; children = [receiver]
///   NameRef      text = identifier
///   Call         children = [callee, args...] (args may be Keyword/Starred)
///   StringLit    text = decoded value (adjacent literals concatenated)
///   NumberLit    text = lexeme
///   ListLit / TupleLit   children = elements
///   DictLit      children = key, value pairs (Starred for `**m`)
///   Compare      children = [left, right...]; ops parallel to the rights
///   BoolOp       op = "and"/"or"; children = operands
///   UnaryOp      op; children = [operand]
///   BinOp        op; children = [left, right]
///   Subscript    children = [value, index]
///   Slice        children = present bounds
///   Keyword      text = argument name; children = [value]
///   Starred      op = "*" or "**"; children = [value]
///   Decorator    children = [expr]
///   Parameter    text = name (empty for a bare `*` or `/` marker);
///                op = "", "*", "**" or "/"; children = [default?]
///   Unsupported  text = reason
struct Node {
    NodeKind kind = NodeKind::Unsupported;
    Span span;
    Span name_span;  // ClassDef / FunctionDef / Parameter identifier
    std::string text;
    std::string op;
    int level = 0;
    bool annotated = false;
    bool is_elif = false;
    std::vector<std::string> ops;
    std::vector<ImportAlias> aliases;
    std::vector<Node> children;
    std::vector<Node> body;
    std::vector<Node> orelse;

    bool is(NodeKind k) const { return kind == k; }

    /// Statements of a class/function body with a leading Docstring removed.
    std::vector<const Node*> body_without_docstring() const;
    const Node* docstring() const;
    std::vector<const Node*> decorators() const;
    std::vector<const Node*> parameters() const;
    /// Value of an Assign, or nullptr for a bare annotation.
    const Node* assign_value() const;
    std::vector<const Node*> assign_targets() const;
};

/// Pre-order walk over children, body and orelse.
void walk(const Node& node, const std::function<void(const Node&)>& visit);

/// `a.b.c` for NameRef/Attribute chains, empty otherwise.
std::string dotted_name(const Node& expr);

/// Names bound by an assignment target (NameRef, tuple/list unpacking).
void collect_target_names(const Node& target, std::vector<std::string>& out);

struct ParsedModule {
    SourceFile source;
    Node root;
    std::vector<Comment> comments;
    std::vector<Diagnostic> diagnostics;
};

}  // namespace sentinel
