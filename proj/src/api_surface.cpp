#include "pimpl_sentinel/api_surface.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "pimpl_sentinel/visibility.hpp"

namespace sentinel {

using nlohmann::json;

std::string_view to_string(Binding b) {
    switch (b) {
        case Binding::DirectDef: return "direct_def";
        case Binding::Reexport: return "reexport";
        case Binding::Lazy: return "lazy";
    }
    return "direct_def";
}

std::optional<Binding> binding_from_string(std::string_view text) {
    if (text == "direct_def") return Binding::DirectDef;
    if (text == "reexport") return Binding::Reexport;
    if (text == "lazy") return Binding::Lazy;
    return std::nullopt;
}

const SymbolEntry* ApiSurface::find(const ModuleId& module, std::string_view name) const {
    auto it = modules.find(module);
    if (it == modules.end()) return nullptr;
    for (const auto& e : it->second) {
        if (e.public_name == name) return &e;
    }
    return nullptr;
}

// ---- lazy namespace --------------------------------------------------------

namespace {

const Node* find_getattr(const Node& module) {
    const Node* found = nullptr;
    for (const auto& stmt : module.body) {
        if (stmt.is(NodeKind::FunctionDef) && stmt.text == "__getattr__") found = &stmt;
    }
    return found;
}

bool is_attribute_error_raise(const Node& stmt) {
    if (!stmt.is(NodeKind::Raise) || stmt.children.size() != 1) return false;
    const Node& exc = stmt.children.front();
    const Node& callee = exc.is(NodeKind::Call) ? exc.children.front() : exc;
    return callee.is(NodeKind::NameRef) && callee.text == "AttributeError";
}

std::optional<std::string> compared_literal(const Node& test, const std::string& param) {
    if (!test.is(NodeKind::Compare) || test.ops.size() != 1 || test.ops[0] != "==") return std::nullopt;
    const Node& l = test.children[0];
    const Node& r = test.children[1];
    if (l.is(NodeKind::NameRef) && l.text == param && r.is(NodeKind::StringLit)) return r.text;
    if (r.is(NodeKind::NameRef) && r.text == param && l.is(NodeKind::StringLit)) return l.text;
    return std::nullopt;
}

}  // namespace

bool has_module_getattr(const Node& module) { return find_getattr(module) != nullptr; }

std::optional<std::vector<LazyBranch>> detect_lazy_namespace(const Node& module) {
    const Node* fn = find_getattr(module);
    if (fn == nullptr || !fn->decorators().empty()) return std::nullopt;
    const auto params = fn->parameters();
    if (params.size() != 1 || !params[0]->op.empty() || !params[0]->children.empty()) return std::nullopt;
    const std::string param = params[0]->text;

    const auto stmts = fn->body_without_docstring();
    if (stmts.size() < 2 || !is_attribute_error_raise(*stmts.back())) return std::nullopt;

    std::vector<LazyBranch> branches;
    std::set<std::string> seen;
    for (std::size_t i = 0; i + 1 < stmts.size(); ++i) {
        const Node& branch = *stmts[i];
        if (!branch.is(NodeKind::If) || !branch.orelse.empty() || branch.body.size() != 2) return std::nullopt;
        auto literal = compared_literal(branch.children.front(), param);
        if (!literal) return std::nullopt;
        const Node& imp = branch.body[0];
        const Node& ret = branch.body[1];
        if (!imp.is(NodeKind::ImportFrom) || imp.aliases.size() != 1 || imp.aliases[0].name == "*")
            return std::nullopt;
        if (!ret.is(NodeKind::Return) || ret.children.size() != 1 ||
            !ret.children[0].is(NodeKind::NameRef) || ret.children[0].text != imp.aliases[0].bound_name())
            return std::nullopt;
        if (!seen.insert(*literal).second) return std::nullopt;
        LazyBranch b;
        b.public_name = *literal;
        b.source_module = std::string(static_cast<std::size_t>(imp.level), '.') + imp.text;
        b.source_name = imp.aliases[0].name;
        b.span = branch.span;
        branches.push_back(std::move(b));
    }
    return branches;
}

// ---- extraction ------------------------------------------------------------

namespace {

struct Origin {
    ModuleId module;
    std::string name;
    bool external = false;
    bool unresolved = false;
};

class SurfaceBuilder {
public:
    explicit SurfaceBuilder(const ModuleGraph& graph) : graph_(graph) {
        for (const auto& [id, _] : graph.modules) known_.insert(id);
    }

    ApiSurface run() {
        for (const auto& [id, mod] : graph_.modules) {
            if (id.is_private()) continue;
            auto entries = module_entries(id, mod);
            if (!entries.empty()) surface_.modules[id] = std::move(entries);
        }
        return std::move(surface_);
    }

private:
    const ModuleGraph& graph_;
    std::set<ModuleId> known_;
    ApiSurface surface_;

    // Does `mod` make `name` available as an attribute without further analysis?
    bool provides(const ModuleId& id, const std::string& name) const {
        const ParsedModule* mod = graph_.find(id);
        if (mod == nullptr) return true;
        if (known_.count(id.child(name))) return true;
        for (const auto& b : top_level_bindings(mod->root)) {
            if (b.name == name) return true;
        }
        if (has_module_getattr(mod->root)) return true;
        for (const auto& stmt : mod->root.body) {
            if (stmt.is(NodeKind::ImportFrom) && stmt.aliases.size() == 1 && stmt.aliases[0].name == "*")
                return true;
        }
        return false;
    }

    Origin from_import(const ParsedModule& mod, int level, const std::string& text, const std::string& name) {
        Origin o;
        const auto base =
            resolve_from_base(level, text, ModuleId(mod.source.module_id), mod.source.is_package);
        if (!base) {
            o.module = ModuleId(std::string(static_cast<std::size_t>(level), '.') + text);
            o.name = name;
            o.external = o.unresolved = true;
            return o;
        }
        if (known_.count(base->child(name))) {
            o.module = base->child(name);
            return o;
        }
        o.module = *base;
        o.name = name;
        if (!known_.count(*base)) {
            o.external = true;
            o.unresolved = level > 0;
        } else {
            o.unresolved = !provides(*base, name);
        }
        return o;
    }

    // Origin of a top-level binding statement for `name`, or nullopt for a local definition.
    std::optional<Origin> import_origin(const ParsedModule& mod, const Node& stmt, const std::string& name) {
        if (stmt.is(NodeKind::Import)) {
            for (const auto& a : stmt.aliases) {
                if (a.bound_name() != name) continue;
                Origin o;
                o.module = ModuleId(a.asname.empty() ? a.bound_name() : a.name);
                o.external = !known_.count(o.module);
                return o;
            }
        }
        if (stmt.is(NodeKind::ImportFrom)) {
            for (const auto& a : stmt.aliases) {
                if (a.bound_name() == name) return from_import(mod, stmt.level, stmt.text, a.name);
            }
        }
        if (stmt.is(NodeKind::Assign)) {
            // `X = alias.Y` where `alias` names an imported module
            const Node* value = stmt.assign_value();
            if (value && value->is(NodeKind::Attribute) && value->children.front().is(NodeKind::NameRef)) {
                const std::string& alias = value->children.front().text;
                for (const auto& b : top_level_bindings(mod.root)) {
                    if (b.name != alias || !b.statement->is(NodeKind::Import)) continue;
                    auto o = import_origin(mod, *b.statement, alias);
                    if (!o) continue;
                    Origin out;
                    out.module = o->module;
                    out.name = value->text;
                    out.external = o->external;
                    out.unresolved = !o->external && !provides(o->module, value->text);
                    return out;
                }
            }
        }
        return std::nullopt;
    }

    SymbolEntry entry_for(const ModuleId& id, const ParsedModule& mod, const std::string& name,
                          const Node& stmt, bool curated) {
        SymbolEntry e;
        e.public_name = name;
        e.exposing_module = id;
        e.curated = curated;
        if (auto origin = import_origin(mod, stmt, name)) {
            e.binding = Binding::Reexport;
            e.origin_module = origin->module;
            e.origin_name = origin->name;
            e.external = origin->external;
            if (origin->unresolved) {
                surface_.diagnostics.push_back(make_diagnostic(
                    codes::kUnresolvedOrigin, mod.source, stmt.span,
                    "cannot resolve origin of '" + name + "' (" + origin->module.str() +
                        (origin->name.empty() ? "" : ":" + origin->name) + ")"));
            }
        } else {
            e.binding = Binding::DirectDef;
            e.origin_module = id;
            e.origin_name = name;
        }
        return e;
    }

    std::vector<SymbolEntry> module_entries(const ModuleId& id, const ParsedModule& mod) {
        ExportSet exports = exported_names(mod);
        for (auto& d : exports.diagnostics) surface_.diagnostics.push_back(std::move(d));
        const bool curated = exports.provenance == ExportProvenance::Curated;

        auto lazy = detect_lazy_namespace(mod.root);
        if (!lazy && has_module_getattr(mod.root)) {
            const Node* fn = find_getattr(mod.root);
            surface_.diagnostics.push_back(make_diagnostic(
                codes::kOpaqueLazy, mod.source, fn->name_span,
                "module __getattr__ does not follow the recognized lazy-namespace shape; its names are opaque"));
        }

        // last top-level binding wins, as at runtime
        std::map<std::string, const Node*> bound;
        for (const auto& b : top_level_bindings(mod.root)) bound[b.name] = b.statement;

        std::vector<SymbolEntry> out;
        std::set<std::string> emitted;
        for (const auto& ex : exports.names) {
            auto it = bound.find(ex.name);
            if (it == bound.end()) continue;
            out.push_back(entry_for(id, mod, ex.name, *it->second, curated));
            emitted.insert(ex.name);
        }
        if (lazy) {
            for (const auto& branch : *lazy) {
                if (bound.count(branch.public_name)) {
                    surface_.diagnostics.push_back(make_diagnostic(
                        codes::kLazyConflict, mod.source, branch.span,
                        "'" + branch.public_name + "' is both defined directly and provided lazily; the direct definition wins"));
                    continue;
                }
                if (emitted.count(branch.public_name)) continue;
                const auto dots = branch.source_module.find_first_not_of('.');
                const int level = static_cast<int>(dots == std::string::npos ? branch.source_module.size() : dots);
                const std::string text = dots == std::string::npos ? "" : branch.source_module.substr(dots);
                Origin o = from_import(mod, level, text, branch.source_name);
                SymbolEntry e;
                e.public_name = branch.public_name;
                e.exposing_module = id;
                e.origin_module = o.module;
                e.origin_name = o.name;
                e.binding = Binding::Lazy;
                e.external = o.external;
                e.curated = curated && exports.contains(branch.public_name);
                if (o.unresolved) {
                    surface_.diagnostics.push_back(make_diagnostic(
                        codes::kUnresolvedOrigin, mod.source, branch.span,
                        "cannot resolve lazy origin of '" + branch.public_name + "'"));
                }
                out.push_back(std::move(e));
                emitted.insert(branch.public_name);
            }
        }
        return out;
    }
};

}  // namespace

ApiSurface extract_surface(const ModuleGraph& graph) { return SurfaceBuilder(graph).run(); }

// ---- diff ------------------------------------------------------------------

namespace {

std::string origin_text(const SymbolEntry& e) {
    return e.origin_name.empty() ? e.origin_module.str() : e.origin_module.str() + ":" + e.origin_name;
}

void sort_items(std::vector<DiffItem>& items) {
    std::sort(items.begin(), items.end(), [](const DiffItem& a, const DiffItem& b) {
        return std::tie(a.module, a.name) < std::tie(b.module, b.name);
    });
}

}  // namespace

SurfaceDiff diff_surfaces(const ApiSurface& old_surface, const ApiSurface& new_surface) {
    SurfaceDiff diff;
    for (const auto& [mod, entries] : old_surface.modules) {
        for (const auto& e : entries) {
            const SymbolEntry* n = new_surface.find(mod, e.public_name);
            if (n == nullptr) {
                diff.removed.push_back({mod, e.public_name, "was " + origin_text(e)});
            } else if (n->origin_module != e.origin_module || n->origin_name != e.origin_name) {
                diff.origin_moved.push_back({mod, e.public_name, origin_text(e) + " -> " + origin_text(*n)});
            } else {
                std::string detail;
                if (n->binding != e.binding)
                    detail = std::string(to_string(e.binding)) + " -> " + std::string(to_string(n->binding));
                diff.unchanged.push_back({mod, e.public_name, detail});
            }
        }
    }
    for (const auto& [mod, entries] : new_surface.modules) {
        for (const auto& e : entries) {
            if (old_surface.find(mod, e.public_name) == nullptr)
                diff.added.push_back({mod, e.public_name, origin_text(e)});
        }
    }
    sort_items(diff.added);
    sort_items(diff.removed);
    sort_items(diff.origin_moved);
    sort_items(diff.unchanged);
    return diff;
}

// ---- serialization ---------------------------------------------------------

std::string surface_to_json(const ApiSurface& surface) {
    json modules = json::object();
    for (const auto& [mod, entries] : surface.modules) {
        json arr = json::array();
        for (const auto& e : entries) {
            arr.push_back({{"name", e.public_name},
                           {"origin", e.origin_module.str()},
                           {"origin_name", e.origin_name},
                           {"binding", to_string(e.binding)},
                           {"curated", e.curated}});
        }
        modules[mod.str()] = std::move(arr);
    }
    json doc = {{"version", kSurfaceSchemaVersion}, {"modules", std::move(modules)}};
    return doc.dump(2) + "\n";
}

std::string surface_to_text(const ApiSurface& surface) {
    std::ostringstream out;
    for (const auto& [mod, entries] : surface.modules) {
        out << mod.str() << "\n";
        for (const auto& e : entries) {
            out << "  " << e.public_name << "  " << to_string(e.binding) << "  <- " << origin_text(e);
            if (e.curated) out << "  [curated]";
            out << "\n";
        }
    }
    return out.str();
}

ApiSurface surface_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("invalid surface JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer())
        throw std::runtime_error("surface document lacks an integer 'version'");
    if (doc["version"].get<int>() != kSurfaceSchemaVersion)
        throw std::runtime_error("unsupported surface schema version " + doc["version"].dump());
    if (!doc.contains("modules") || !doc["modules"].is_object())
        throw std::runtime_error("surface document lacks a 'modules' object");

    ApiSurface surface;
    for (const auto& [mod, arr] : doc["modules"].items()) {
        if (!arr.is_array()) throw std::runtime_error("module '" + mod + "' is not an array");
        std::vector<SymbolEntry> entries;
        std::set<std::string> names;
        for (const auto& item : arr) {
            if (!item.is_object() || !item.contains("name") || !item["name"].is_string() ||
                !item.contains("origin") || !item["origin"].is_string() || !item.contains("origin_name") ||
                !item["origin_name"].is_string() || !item.contains("binding") || !item["binding"].is_string() ||
                !item.contains("curated") || !item["curated"].is_boolean())
                throw std::runtime_error("malformed entry in module '" + mod + "'");
            SymbolEntry e;
            e.public_name = item["name"].get<std::string>();
            e.exposing_module = ModuleId(mod);
            e.origin_module = ModuleId(item["origin"].get<std::string>());
            e.origin_name = item["origin_name"].get<std::string>();
            auto binding = binding_from_string(item["binding"].get<std::string>());
            if (!binding) throw std::runtime_error("unknown binding '" + item["binding"].get<std::string>() + "'");
            e.binding = *binding;
            e.curated = item["curated"].get<bool>();
            if (!names.insert(e.public_name).second)
                throw std::runtime_error("duplicate name '" + e.public_name + "' in module '" + mod + "'");
            entries.push_back(std::move(e));
        }
        surface.modules[ModuleId(mod)] = std::move(entries);
    }
    return surface;
}

std::string diff_to_json(const SurfaceDiff& diff) {
    auto list = [](const std::vector<DiffItem>& items) {
        json arr = json::array();
        for (const auto& i : items) arr.push_back({{"module", i.module.str()}, {"name", i.name}, {"detail", i.detail}});
        return arr;
    };
    json doc = {{"version", kSurfaceSchemaVersion},
                {"added", list(diff.added)},
                {"removed", list(diff.removed)},
                {"origin_moved", list(diff.origin_moved)},
                {"unchanged", list(diff.unchanged)},
                {"breaking", diff.breaking()}};
    return doc.dump(2) + "\n";
}

std::string diff_to_text(const SurfaceDiff& diff) {
    std::ostringstream out;
    auto section = [&](const char* tag, const std::vector<DiffItem>& items) {
        for (const auto& i : items) {
            out << tag << " " << i.module.str() << "." << i.name;
            if (!i.detail.empty()) out << "  (" << i.detail << ")";
            out << "\n";
        }
    };
    section("removed", diff.removed);
    section("added", diff.added);
    section("moved", diff.origin_moved);
    out << "summary: " << diff.removed.size() << " removed, " << diff.added.size() << " added, "
        << diff.origin_moved.size() << " origin moved, " << diff.unchanged.size() << " unchanged\n";
    return out.str();
}

}  // namespace sentinel
