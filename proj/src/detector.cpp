#include "pimpl_sentinel/detector.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pimpl_sentinel/visibility.hpp"

namespace sentinel {

using nlohmann::json;

double ClassPimplReport::coverage() const {
    const auto total = public_count();
    if (total == 0) return 1.0;
    return static_cast<double>(delegating_count()) / static_cast<double>(total);
}

namespace {

bool is_self_attr(const Node& n, const std::string& self_name, const std::string& attr) {
    return n.is(NodeKind::Attribute) && n.text == attr && n.children.front().is(NodeKind::NameRef) &&
           n.children.front().text == self_name;
}

std::string receiver_name(const Node& fn) {
    const auto params = fn.parameters();
    if (params.empty() || !params.front()->op.empty()) return {};
    return params.front()->text;
}

std::vector<const Node*> methods_of(const Node& cls) {
    std::vector<const Node*> out;
    for (const auto& s : cls.body) {
        if (s.is(NodeKind::FunctionDef)) out.push_back(&s);
    }
    return out;
}

// First self attribute matching the pattern that some method assigns, in source order.
std::optional<std::string> find_impl_attr(const Node& cls, const std::regex& pattern) {
    for (const Node* fn : methods_of(cls)) {
        const std::string self_name = receiver_name(*fn);
        if (self_name.empty()) continue;
        std::optional<std::string> found;
        walk(*fn, [&](const Node& n) {
            if (found || !n.is(NodeKind::Assign) || n.assign_value() == nullptr) return;
            for (const Node* t : n.assign_targets()) {
                if (t->is(NodeKind::Attribute) && t->children.front().is(NodeKind::NameRef) &&
                    t->children.front().text == self_name && std::regex_search(t->text, pattern)) {
                    found = t->text;
                    return;
                }
            }
        });
        if (found) return found;
    }
    return std::nullopt;
}

// Arguments a pure forwarding call must pass, given the method's parameters.
struct ExpectedArg {
    NodeKind kind;  // NameRef, Keyword or Starred
    std::string name;
    std::string star;
};

std::vector<ExpectedArg> expected_args(const Node& fn) {
    std::vector<ExpectedArg> out;
    const auto params = fn.parameters();
    bool keyword_only = false;
    for (std::size_t i = 1; i < params.size(); ++i) {
        const Node& p = *params[i];
        if (p.op == "/") continue;
        if (p.op == "*") {
            keyword_only = true;
            if (!p.text.empty()) out.push_back({NodeKind::Starred, p.text, "*"});
            continue;
        }
        if (p.op == "**") {
            out.push_back({NodeKind::Starred, p.text, "**"});
            continue;
        }
        out.push_back({keyword_only ? NodeKind::Keyword : NodeKind::NameRef, p.text, ""});
    }
    return out;
}

bool forwards(const Node& call, const std::vector<ExpectedArg>& expected) {
    if (call.children.size() != expected.size() + 1) return false;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const Node& arg = call.children[i + 1];
        const ExpectedArg& e = expected[i];
        if (!arg.is(e.kind)) return false;
        const Node* value = &arg;
        if (e.kind == NodeKind::Keyword) {
            if (arg.text != e.name) return false;
            value = &arg.children.front();
        } else if (e.kind == NodeKind::Starred) {
            if (arg.op != e.star) return false;
            value = &arg.children.front();
        }
        if (!value->is(NodeKind::NameRef) || value->text != e.name) return false;
    }
    return true;
}

// Target method name when `stmt` is `[return] self.<impl>.<m>(<params>)`.
std::optional<std::string> delegation_target(const Node& stmt, const Node& fn, const std::string& self_name,
                                             const std::string& impl_attr) {
    const Node* expr = nullptr;
    if (stmt.is(NodeKind::Return) && stmt.children.size() == 1) expr = &stmt.children.front();
    if (stmt.is(NodeKind::ExprStmt)) expr = &stmt.children.front();
    if (expr == nullptr || !expr->is(NodeKind::Call)) return std::nullopt;
    const Node& callee = expr->children.front();
    if (!callee.is(NodeKind::Attribute) || !is_self_attr(callee.children.front(), self_name, impl_attr))
        return std::nullopt;
    if (!forwards(*expr, expected_args(fn))) return std::nullopt;
    return callee.text;
}

bool tests_impl(const Node& if_stmt, const std::string& self_name, const std::string& impl_attr) {
    bool hit = false;
    walk(if_stmt.children.front(), [&](const Node& n) {
        if (is_self_attr(n, self_name, impl_attr)) hit = true;
    });
    return hit;
}

bool is_raise_guard(const Node& s, const std::string& self_name, const std::string& impl_attr) {
    return s.is(NodeKind::If) && s.orelse.empty() && s.body.size() == 1 && s.body.front().is(NodeKind::Raise) &&
           tests_impl(s, self_name, impl_attr);
}

enum class Shape { Plain, Guarded, Other };

struct MethodShape {
    Shape shape = Shape::Other;
    std::string target;
    bool redundant_guard = false;
};

MethodShape classify_method(const Node& fn, const std::string& impl_attr) {
    MethodShape result;
    const std::string self_name = receiver_name(fn);
    if (self_name.empty()) return result;
    const auto stmts = fn.body_without_docstring();
    if (stmts.empty()) return result;

    if (stmts.size() == 1) {
        if (auto t = delegation_target(*stmts.front(), fn, self_name, impl_attr)) {
            result.shape = Shape::Plain;
            result.target = *t;
        }
        return result;
    }

    std::size_t guards = 0;
    while (guards + 1 < stmts.size() && is_raise_guard(*stmts[guards], self_name, impl_attr)) ++guards;
    if (guards == 0 || guards + 1 != stmts.size()) return result;

    const Node& last = *stmts.back();
    if (auto t = delegation_target(last, fn, self_name, impl_attr)) {
        result.shape = Shape::Guarded;
        result.target = *t;
        return result;
    }
    // a trailing `if self._impl: <delegation>` after the raising guard
    if (last.is(NodeKind::If) && last.orelse.empty() && last.body.size() == 1 &&
        tests_impl(last, self_name, impl_attr)) {
        if (auto t = delegation_target(last.body.front(), fn, self_name, impl_attr)) {
            result.shape = Shape::Guarded;
            result.target = *t;
            result.redundant_guard = true;
        }
    }
    return result;
}

}  // namespace

std::optional<ClassPimplReport> detect_class_pimpl(const Node& cls, const std::string& impl_pattern) {
    if (!cls.is(NodeKind::ClassDef)) return std::nullopt;
    const std::regex pattern(impl_pattern, std::regex::ECMAScript);
    const auto impl_attr = find_impl_attr(cls, pattern);
    if (!impl_attr) return std::nullopt;

    ClassPimplReport report;
    report.class_name = cls.text;
    report.span = cls.span;
    report.impl_attr = *impl_attr;

    for (const Node* fn : methods_of(cls)) {
        const std::string self_name = receiver_name(*fn);
        if (!self_name.empty()) {
            walk(*fn, [&](const Node& n) {
                if (!n.is(NodeKind::Assign) || n.assign_value() == nullptr) return;
                for (const Node* t : n.assign_targets()) {
                    if (is_self_attr(*t, self_name, report.impl_attr)) report.construction_sites.push_back(n.span);
                }
            });
        }

        const Visibility vis = classify_name(fn->text);
        if (vis == Visibility::Internal || vis == Visibility::Mangled || fn->text == "__init__") continue;
        const MethodShape shape = classify_method(*fn, report.impl_attr);
        if (shape.shape == Shape::Plain) {
            report.delegating.push_back({fn->text, shape.target, fn->span});
        } else if (shape.shape == Shape::Guarded) {
            report.guarded.push_back({fn->text, shape.target, fn->span});
            if (shape.redundant_guard) {
                report.notes.push_back(fn->text + ": second check of self." + report.impl_attr +
                                       " is redundant after the raising guard");
            }
        } else if (vis == Visibility::Public) {
            report.non_delegating_public.push_back(fn->text);
        }
    }
    return report;
}

// ---- factories -------------------------------------------------------------

namespace {

// `p == "lit"` or `p.m() == "lit"` (either side); returns (parameter, literal).
std::optional<std::pair<std::string, std::string>> selector_test(const Node& test) {
    if (!test.is(NodeKind::Compare) || test.ops.size() != 1 || test.ops[0] != "==") return std::nullopt;
    const Node* subject = &test.children[0];
    const Node* literal = &test.children[1];
    if (subject->is(NodeKind::StringLit)) std::swap(subject, literal);
    if (!literal->is(NodeKind::StringLit)) return std::nullopt;
    if (subject->is(NodeKind::Call) && subject->children.size() == 1 &&
        subject->children.front().is(NodeKind::Attribute))
        subject = &subject->children.front().children.front();
    if (!subject->is(NodeKind::NameRef)) return std::nullopt;
    return std::make_pair(subject->text, literal->text);
}

std::optional<std::string> constructed_class(const Node& stmt) {
    const Node* value = nullptr;
    if (stmt.is(NodeKind::Return) && stmt.children.size() == 1) value = &stmt.children.front();
    if (stmt.is(NodeKind::Assign)) value = stmt.assign_value();
    if (value == nullptr || !value->is(NodeKind::Call)) return std::nullopt;
    const std::string name = dotted_name(value->children.front());
    if (name.empty()) return std::nullopt;
    const auto dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(dot + 1);
}

std::optional<FactoryReport> factory_chain(const Node& fn, const Node& first) {
    std::set<std::string> params;
    for (const Node* p : fn.parameters()) {
        if (!p->text.empty()) params.insert(p->text);
    }
    FactoryReport report;
    report.selector = fn.text;
    report.span = first.span;
    std::set<std::string> literals;
    const Node* branch = &first;
    while (branch != nullptr) {
        auto test = selector_test(branch->children.front());
        if (!test || !params.count(test->first)) return std::nullopt;
        if (report.parameter.empty()) report.parameter = test->first;
        if (test->first != report.parameter || !literals.insert(test->second).second) return std::nullopt;
        if (branch->body.size() != 1) return std::nullopt;
        auto cls = constructed_class(branch->body.front());
        if (!cls) return std::nullopt;
        report.branches.emplace_back(test->second, *cls);

        const Node* next = nullptr;
        if (branch->orelse.size() == 1 && branch->orelse.front().is(NodeKind::If) &&
            branch->orelse.front().is_elif) {
            next = &branch->orelse.front();
        } else if (!branch->orelse.empty()) {
            if (branch->orelse.size() != 1 || !branch->orelse.front().is(NodeKind::Raise)) return std::nullopt;
            report.fallback = Fallback::Raise;
        }
        branch = next;
    }
    if (report.branches.size() < 2) return std::nullopt;
    return report;
}

}  // namespace

std::vector<FactoryReport> detect_factory(const Node& scope) {
    std::vector<FactoryReport> out;
    const std::string scope_name = scope.is(NodeKind::ClassDef) ? scope.text : "";
    for (const auto& fn : scope.body) {
        if (!fn.is(NodeKind::FunctionDef)) continue;
        for (const Node* stmt : fn.body_without_docstring()) {
            if (!stmt->is(NodeKind::If)) continue;
            if (auto report = factory_chain(fn, *stmt)) {
                report->scope = scope_name;
                out.push_back(std::move(*report));
                break;
            }
        }
    }
    return out;
}

// ---- module-level pimpl ----------------------------------------------------

std::optional<ModulePimplReport> detect_module_pimpl(const ModuleId& module, const ModuleGraph& graph,
                                                     const ApiSurface& surface) {
    if (module.is_private()) return std::nullopt;
    const ParsedModule* mod = graph.find(module);
    if (mod == nullptr) return std::nullopt;

    std::set<ModuleId> backing;
    for (const ImportEdge* e : graph.edges_from(module)) {
        if (e->to.is_private()) backing.insert(e->to);
    }
    if (backing.empty()) return std::nullopt;

    ModulePimplReport report;
    report.public_module = module;
    std::set<std::pair<std::string, std::string>> seen;
    auto add = [&](const std::string& binding, const std::string& origin) {
        if (seen.insert({binding, origin}).second) report.rebound_names.emplace_back(binding, origin);
    };

    // names imported from a private module, or aliased off one (`X = _mod.X`)
    std::map<std::string, ModuleId> module_aliases;
    const std::set<ModuleId> known = [&] {
        std::set<ModuleId> k;
        for (const auto& [id, _] : graph.modules) k.insert(id);
        return k;
    }();
    for (const auto& stmt : mod->root.body) {
        if (!stmt.is(NodeKind::Import) && !stmt.is(NodeKind::ImportFrom)) continue;
        const auto outcome = resolve_import(stmt, module, mod->source.is_package, known);
        if (stmt.is(NodeKind::Import)) {
            for (std::size_t i = 0; i < stmt.aliases.size() && i < outcome.targets.size(); ++i) {
                const auto& a = stmt.aliases[i];
                if (!a.asname.empty() && outcome.targets[i].target.is_private())
                    module_aliases[a.asname] = outcome.targets[i].target;
            }
            continue;
        }
        if (outcome.error) continue;
        const ModuleId base = *resolve_from_base(stmt.level, stmt.text, module, mod->source.is_package);
        for (const auto& a : stmt.aliases) {
            const ModuleId sub = base.child(a.name);
            if (a.name != "*" && known.count(sub)) {
                if (sub.is_private()) module_aliases[a.bound_name()] = sub;
                continue;
            }
            if (!base.is_private()) continue;
            if (a.name != "*") {
                add(a.bound_name(), a.name);
            } else if (const ParsedModule* src = graph.find(base)) {
                for (const auto& n : star_import_set(*src)) add(n, n);
            } else {
                add("*", "*");
            }
        }
    }
    for (const auto& stmt : mod->root.body) {
        if (!stmt.is(NodeKind::Assign)) continue;
        const Node* value = stmt.assign_value();
        if (value == nullptr || !value->is(NodeKind::Attribute) || !value->children.front().is(NodeKind::NameRef))
            continue;
        if (!module_aliases.count(value->children.front().text)) continue;
        for (const Node* t : stmt.assign_targets()) {
            if (t->is(NodeKind::NameRef)) add(t->text, value->text);
        }
    }
    if (auto it = surface.modules.find(module); it != surface.modules.end()) {
        for (const auto& e : it->second) {
            if (e.binding != Binding::DirectDef && e.origin_module.is_private())
                add(e.public_name, e.origin_name.empty() ? e.origin_module.str() : e.origin_name);
        }
    }
    if (report.rebound_names.empty()) return std::nullopt;
    report.backing_modules.assign(backing.begin(), backing.end());
    return report;
}

std::vector<ModuleDetections> detect_all(const ModuleGraph& graph, const ApiSurface& surface,
                                         const std::string& impl_pattern) {
    std::vector<ModuleDetections> out;
    for (const auto& [id, mod] : graph.modules) {
        ModuleDetections d;
        d.module = id;
        d.path = mod.source.path;
        for (const auto& stmt : mod.root.body) {
            if (!stmt.is(NodeKind::ClassDef)) continue;
            if (auto r = detect_class_pimpl(stmt, impl_pattern)) d.classes.push_back(std::move(*r));
            for (auto& f : detect_factory(stmt)) d.factories.push_back(std::move(f));
        }
        for (auto& f : detect_factory(mod.root)) d.factories.push_back(std::move(f));
        d.module_report = detect_module_pimpl(id, graph, surface);
        out.push_back(std::move(d));
    }
    return out;
}

// ---- output ----------------------------------------------------------------

namespace {

json span_json(const Span& s) {
    return {{"line", s.start_line}, {"col", s.start_col}, {"end_line", s.end_line}, {"end_col", s.end_col}};
}

json delegations_json(const std::vector<Delegation>& ds) {
    json arr = json::array();
    for (const auto& d : ds) arr.push_back({{"method", d.method}, {"target", d.target}, {"span", span_json(d.span)}});
    return arr;
}

}  // namespace

std::string detections_to_json(const std::vector<ModuleDetections>& detections) {
    json modules = json::array();
    for (const auto& d : detections) {
        if (d.empty()) continue;
        json classes = json::array();
        for (const auto& c : d.classes) {
            json sites = json::array();
            for (const auto& s : c.construction_sites) sites.push_back(span_json(s));
            classes.push_back({{"class_name", c.class_name},
                               {"span", span_json(c.span)},
                               {"impl_attr", c.impl_attr},
                               {"construction_sites", sites},
                               {"delegating_methods", delegations_json(c.delegating)},
                               {"guarded_delegations", delegations_json(c.guarded)},
                               {"non_delegating_public", c.non_delegating_public},
                               {"coverage", c.coverage()},
                               {"notes", c.notes}});
        }
        json factories = json::array();
        for (const auto& f : d.factories) {
            json branches = json::array();
            for (const auto& [lit, cls] : f.branches) branches.push_back({{"literal", lit}, {"class", cls}});
            factories.push_back({{"scope", f.scope},
                                 {"selector", f.selector},
                                 {"parameter", f.parameter},
                                 {"branches", branches},
                                 {"fallback", f.fallback == Fallback::Raise ? "raise" : "none"},
                                 {"span", span_json(f.span)}});
        }
        json module_report = nullptr;
        if (d.module_report) {
            json backing = json::array();
            for (const auto& b : d.module_report->backing_modules) backing.push_back(b.str());
            json rebound = json::array();
            for (const auto& [binding, origin] : d.module_report->rebound_names)
                rebound.push_back({{"binding", binding}, {"origin", origin}});
            module_report = {{"backing_modules", backing}, {"rebound_names", rebound}};
        }
        modules.push_back({{"module", d.module.str()},
                           {"path", d.path},
                           {"classes", classes},
                           {"factories", factories},
                           {"module_pimpl", module_report}});
    }
    json doc = {{"version", 1}, {"modules", modules}};
    return doc.dump(2) + "\n";
}

std::string detections_to_text(const std::vector<ModuleDetections>& detections) {
    std::ostringstream out;
    for (const auto& d : detections) {
        if (d.empty()) continue;
        out << d.module.str() << " (" << d.path << ")\n";
        for (const auto& c : d.classes) {
            out << "  class " << c.class_name << ": impl " << c.impl_attr << ", coverage " << c.delegating_count()
                << "/" << c.public_count() << "\n";
            for (const auto& m : c.delegating) out << "    delegates " << m.method << " -> " << m.target << "\n";
            for (const auto& m : c.guarded) out << "    guarded   " << m.method << " -> " << m.target << "\n";
            for (const auto& m : c.non_delegating_public) out << "    own body  " << m << "\n";
            for (const auto& n : c.notes) out << "    note: " << n << "\n";
        }
        for (const auto& f : d.factories) {
            out << "  factory " << (f.scope.empty() ? "" : f.scope + ".") << f.selector << "(" << f.parameter
                << "):";
            for (const auto& [lit, cls] : f.branches) out << " \"" << lit << "\"->" << cls;
            out << (f.fallback == Fallback::Raise ? " else raise" : "") << "\n";
        }
        if (d.module_report) {
            out << "  wraps";
            for (const auto& b : d.module_report->backing_modules) out << " " << b.str();
            out << ":";
            for (const auto& [binding, origin] : d.module_report->rebound_names)
                out << " " << binding << "<-" << origin;
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace sentinel
