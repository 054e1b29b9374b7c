#include "pimpl_sentinel/visibility.hpp"

#include <algorithm>
#include <set>

namespace sentinel {

std::string_view to_string(Visibility v) {
    switch (v) {
        case Visibility::Public: return "public";
        case Visibility::Internal: return "internal";
        case Visibility::Mangled: return "mangled";
        case Visibility::Dunder: return "dunder";
    }
    return "public";
}

std::string_view to_string(ExportProvenance p) {
    switch (p) {
        case ExportProvenance::Curated: return "curated";
        case ExportProvenance::Implicit: return "implicit";
        case ExportProvenance::Undecidable: return "undecidable";
    }
    return "implicit";
}

Visibility classify_name(std::string_view name) {
    const bool lead2 = name.size() >= 2 && name.substr(0, 2) == "__";
    const bool trail2 = name.size() >= 2 && name.substr(name.size() - 2) == "__";
    if (lead2 && trail2) return Visibility::Dunder;
    if (lead2) return Visibility::Mangled;
    if (!name.empty() && name.front() == '_') return Visibility::Internal;
    return Visibility::Public;
}

std::string mangle(std::string_view class_name, std::string_view attr) {
    if (classify_name(attr) != Visibility::Mangled || attr.find('.') != std::string_view::npos)
        return std::string(attr);
    const auto first = class_name.find_first_not_of('_');
    if (first == std::string_view::npos) return std::string(attr);
    std::string out = "_";
    out += class_name.substr(first);
    out += attr;
    return out;
}

std::optional<std::pair<std::string, std::string>> demangle(std::string_view name) {
    if (name.size() < 5 || name[0] != '_' || name[1] == '_') return std::nullopt;
    const auto sep = name.find("__", 1);
    if (sep == std::string_view::npos) return std::nullopt;
    std::string cls(name.substr(1, sep - 1));
    std::string attr(name.substr(sep));
    if (cls.empty() || attr.size() <= 2) return std::nullopt;
    if (classify_name(attr) != Visibility::Mangled) return std::nullopt;
    return std::make_pair(std::move(cls), std::move(attr));
}

bool ExportSet::contains(std::string_view name) const {
    return std::any_of(names.begin(), names.end(), [&](const ExportedName& e) { return e.name == name; });
}

namespace {

void bindings_of(const Node& stmt, std::vector<TopLevelBinding>& out) {
    std::vector<std::string> names;
    switch (stmt.kind) {
        case NodeKind::Assign:
            if (stmt.assign_value() != nullptr) {
                for (const Node* t : stmt.assign_targets()) collect_target_names(*t, names);
            }
            break;
        case NodeKind::AugAssign:
            collect_target_names(stmt.children.front(), names);
            break;
        case NodeKind::ClassDef:
        case NodeKind::FunctionDef:
            names.push_back(stmt.text);
            break;
        case NodeKind::Import:
        case NodeKind::ImportFrom:
            for (const auto& a : stmt.aliases) {
                if (a.name != "*") names.push_back(a.bound_name());
            }
            break;
        case NodeKind::If:
            for (const auto& s : stmt.body) bindings_of(s, out);
            for (const auto& s : stmt.orelse) bindings_of(s, out);
            return;
        default:
            return;
    }
    for (auto& n : names) out.push_back(TopLevelBinding{std::move(n), &stmt});
}

bool targets_all(const Node& stmt) {
    for (const Node* t : stmt.assign_targets()) {
        if (t->is(NodeKind::NameRef) && t->text == "__all__") return true;
    }
    return false;
}

// Literal list/tuple of strings -> entries, otherwise nullopt.
std::optional<std::vector<ExportedName>> literal_names(const Node& value) {
    if (!value.is(NodeKind::ListLit) && !value.is(NodeKind::TupleLit)) return std::nullopt;
    std::vector<ExportedName> out;
    for (const auto& el : value.children) {
        if (!el.is(NodeKind::StringLit)) return std::nullopt;
        out.push_back(ExportedName{el.text, el.span});
    }
    return out;
}

bool mutates_all(const Node& stmt) {
    if (stmt.is(NodeKind::AugAssign)) {
        const Node& t = stmt.children.front();
        return t.is(NodeKind::NameRef) && t.text == "__all__";
    }
    bool hit = false;
    if (stmt.is(NodeKind::ExprStmt)) {
        walk(stmt, [&](const Node& n) {
            if (n.is(NodeKind::Attribute) && n.children.front().is(NodeKind::NameRef) &&
                n.children.front().text == "__all__")
                hit = true;
        });
    }
    return hit;
}

struct AllState {
    int assignments = 0;
    bool undecidable = false;
    std::optional<std::vector<ExportedName>> literal;
    std::optional<Span> span;
};

// Returns the literal bound by every branch of `stmt` (an If), if they agree.
std::optional<std::vector<ExportedName>> branch_literal(const std::vector<Node>& body, bool& binds,
                                                        bool& conflict);

std::optional<std::vector<ExportedName>> if_literal(const Node& stmt, bool& binds, bool& conflict) {
    bool body_binds = false;
    auto lit = branch_literal(stmt.body, body_binds, conflict);
    bool else_binds = false;
    std::optional<std::vector<ExportedName>> else_lit;
    if (!stmt.orelse.empty()) else_lit = branch_literal(stmt.orelse, else_binds, conflict);
    binds = body_binds || else_binds;
    if (!binds) return std::nullopt;
    if (!body_binds || !else_binds || !lit || !else_lit) {
        conflict = true;
        return std::nullopt;
    }
    auto same = [](const std::vector<ExportedName>& a, const std::vector<ExportedName>& b) {
        return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                          [](const ExportedName& x, const ExportedName& y) { return x.name == y.name; });
    };
    if (!same(*lit, *else_lit)) {
        conflict = true;
        return std::nullopt;
    }
    return lit;
}

std::optional<std::vector<ExportedName>> branch_literal(const std::vector<Node>& body, bool& binds,
                                                        bool& conflict) {
    std::optional<std::vector<ExportedName>> found;
    int count = 0;
    for (const auto& s : body) {
        if (s.is(NodeKind::Assign) && targets_all(s)) {
            ++count;
            const Node* v = s.assign_value();
            found = v ? literal_names(*v) : std::nullopt;
            if (!found) conflict = true;
        } else if (s.is(NodeKind::If)) {
            bool nested_binds = false;
            auto nested = if_literal(s, nested_binds, conflict);
            if (nested_binds) {
                ++count;
                found = nested;
            }
        } else if (mutates_all(s)) {
            conflict = true;
        }
    }
    if (count > 1) conflict = true;
    binds = count > 0;
    return found;
}

}  // namespace

std::vector<TopLevelBinding> top_level_bindings(const Node& module) {
    std::vector<TopLevelBinding> out;
    for (const auto& stmt : module.body) bindings_of(stmt, out);
    return out;
}

ExportSet exported_names(const ParsedModule& module) {
    ExportSet result;
    AllState state;
    for (const auto& stmt : module.root.body) {
        if (stmt.is(NodeKind::Assign) && targets_all(stmt)) {
            ++state.assignments;
            state.span = stmt.span;
            const Node* v = stmt.assign_value();
            state.literal = v ? literal_names(*v) : std::nullopt;
            if (!state.literal || stmt.assign_targets().size() > 1) state.undecidable = true;
        } else if (stmt.is(NodeKind::If)) {
            bool binds = false;
            bool conflict = false;
            auto lit = if_literal(stmt, binds, conflict);
            if (binds || conflict) {
                ++state.assignments;
                state.span = stmt.span;
                state.literal = lit;
                if (conflict || !lit) state.undecidable = true;
            }
        } else if (mutates_all(stmt)) {
            state.undecidable = true;
            if (!state.span) state.span = stmt.span;
        }
    }
    if (state.assignments > 1) state.undecidable = true;

    if (state.assignments > 0 && !state.undecidable && state.literal) {
        result.provenance = ExportProvenance::Curated;
        result.all_span = state.span;
        std::set<std::string> seen;
        for (auto& e : *state.literal) {
            if (seen.insert(e.name).second) result.names.push_back(std::move(e));
        }
        return result;
    }

    if (state.undecidable) {
        result.provenance = ExportProvenance::Undecidable;
        result.all_span = state.span;
        result.diagnostics.push_back(make_diagnostic(
            codes::kUndecidableAll, module.source, *state.span,
            "__all__ is computed or mutated; falling back to the implicit public names"));
    }
    std::set<std::string> seen;
    for (const auto& b : top_level_bindings(module.root)) {
        if (classify_name(b.name) != Visibility::Public) continue;
        if (seen.insert(b.name).second) result.names.push_back(ExportedName{b.name, b.statement->span});
    }
    return result;
}

std::vector<std::string> star_import_set(const ParsedModule& module) {
    std::vector<std::string> out;
    for (const auto& e : exported_names(module).names) out.push_back(e.name);
    return out;
}

}  // namespace sentinel
