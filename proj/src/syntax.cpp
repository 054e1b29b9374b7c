#include "pimpl_sentinel/syntax.hpp"

namespace sentinel {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Module: return "Module";
        case NodeKind::Import: return "Import";
        case NodeKind::ImportFrom: return "ImportFrom";
        case NodeKind::ClassDef: return "ClassDef";
        case NodeKind::FunctionDef: return "FunctionDef";
        case NodeKind::Assign: return "Assign";
        case NodeKind::AugAssign: return "AugAssign";
        case NodeKind::Return: return "Return";
        case NodeKind::Raise: return "Raise";
        case NodeKind::Pass: return "Pass";
        case NodeKind::If: return "If";
        case NodeKind::ExprStmt: return "ExprStmt";
        case NodeKind::Attribute: return "Attribute";
        case NodeKind::NameRef: return "NameRef";
        case NodeKind::Call: return "Call";
        case NodeKind::StringLit: return "StringLit";
        case NodeKind::NumberLit: return "NumberLit";
        case NodeKind::ListLit: return "ListLit";
        case NodeKind::TupleLit: return "TupleLit";
        case NodeKind::DictLit: return "DictLit";
        case NodeKind::Compare: return "Compare";
        case NodeKind::BoolOp: return "BoolOp";
        case NodeKind::UnaryOp: return "UnaryOp";
        case NodeKind::BinOp: return "BinOp";
        case NodeKind::Subscript: return "Subscript";
        case NodeKind::Slice: return "Slice";
        case NodeKind::Keyword: return "Keyword";
        case NodeKind::Starred: return "Starred";
        case NodeKind::Decorator: return "Decorator";
        case NodeKind::Parameter: return "Parameter";
        case NodeKind::Docstring: return "Docstring";
        case NodeKind::Unsupported: return "Unsupported";
    }
    return "Unsupported";
}

std::string ImportAlias::bound_name() const {
    if (!asname.empty()) return asname;
    const auto dot = name.find('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

std::vector<const Node*> Node::body_without_docstring() const {
    std::vector<const Node*> out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i == 0 && body[i].is(NodeKind::Docstring)) continue;
        out.push_back(&body[i]);
    }
    return out;
}

const Node* Node::docstring() const {
    if (!body.empty() && body.front().is(NodeKind::Docstring)) return &body.front();
    return nullptr;
}

std::vector<const Node*> Node::decorators() const {
    std::vector<const Node*> out;
    for (const auto& c : children) {
        if (c.is(NodeKind::Decorator)) out.push_back(&c);
    }
    return out;
}

std::vector<const Node*> Node::parameters() const {
    std::vector<const Node*> out;
    for (const auto& c : children) {
        if (c.is(NodeKind::Parameter)) out.push_back(&c);
    }
    return out;
}

const Node* Node::assign_value() const {
    if (kind != NodeKind::Assign || children.size() < 2) return nullptr;
    return &children.back();
}

std::vector<const Node*> Node::assign_targets() const {
    std::vector<const Node*> out;
    if (kind != NodeKind::Assign) return out;
    const std::size_t n = children.size() < 2 ? children.size() : children.size() - 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(&children[i]);
    return out;
}

void walk(const Node& node, const std::function<void(const Node&)>& visit) {
    visit(node);
    for (const auto& c : node.children) walk(c, visit);
    for (const auto& c : node.body) walk(c, visit);
    for (const auto& c : node.orelse) walk(c, visit);
}

std::string dotted_name(const Node& expr) {
    if (expr.is(NodeKind::NameRef)) return expr.text;
    if (expr.is(NodeKind::Attribute) && !expr.children.empty()) {
        std::string base = dotted_name(expr.children.front());
        if (base.empty()) return {};
        return base + "." + expr.text;
    }
    return {};
}

void collect_target_names(const Node& target, std::vector<std::string>& out) {
    switch (target.kind) {
        case NodeKind::NameRef:
            out.push_back(target.text);
            break;
        case NodeKind::TupleLit:
        case NodeKind::ListLit:
            for (const auto& c : target.children) collect_target_names(c, out);
            break;
        case NodeKind::Starred:
            if (!target.children.empty()) collect_target_names(target.children.front(), out);
            break;
        default:
            break;
    }
}

}  // namespace sentinel
