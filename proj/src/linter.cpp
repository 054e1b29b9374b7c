#include "pimpl_sentinel/linter.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "pimpl_sentinel/visibility.hpp"

namespace sentinel {

using nlohmann::json;

bool is_rule_code(const std::string& code) {
    return std::find(kRuleCodes.begin(), kRuleCodes.end(), code) != kRuleCodes.end();
}

Severity rule_severity(const std::string& code) {
    if (code == "R001" || code == "R002" || code == "R003") return Severity::Error;
    if (code == "R004") return Severity::Info;
    return Severity::Warning;
}

bool LintResult::has_errors() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

// ---- config ----------------------------------------------------------------

namespace {

std::vector<std::string> string_list(const json& value, const std::string& key) {
    if (!value.is_array()) throw ConfigError("'" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string()) throw ConfigError("'" + key + "' must be an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

LintConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    LintConfig config;
    for (const auto& [key, value] : doc.items()) {
        if (key == "rules") {
            config.rules.clear();
            for (const auto& code : string_list(value, key)) {
                if (!is_rule_code(code)) throw ConfigError("unknown rule id '" + code + "'");
                config.rules.insert(code);
            }
        } else if (key == "impl_attr_pattern") {
            if (!value.is_string()) throw ConfigError("'impl_attr_pattern' must be a string");
            config.impl_attr_pattern = value.get<std::string>();
            try {
                std::regex check(config.impl_attr_pattern, std::regex::ECMAScript);
            } catch (const std::regex_error&) {
                throw ConfigError("'impl_attr_pattern' is not a valid regular expression");
            }
        } else if (key == "heavy_modules") {
            config.heavy_modules = string_list(value, key);
        } else if (key == "delegation_threshold") {
            if (!value.is_number()) throw ConfigError("'delegation_threshold' must be a number");
            config.delegation_threshold = value.get<double>();
            if (!(config.delegation_threshold >= 0.0 && config.delegation_threshold <= 1.0))
                throw ConfigError("'delegation_threshold' must lie in [0, 1]");
        } else if (key == "public_roots") {
            config.public_roots = string_list(value, key);
        } else if (key == "strict") {
            if (!value.is_boolean()) throw ConfigError("'strict' must be a boolean");
            config.strict = value.get<bool>();
        } else if (key == "suppress_marker") {
            if (!value.is_string() || value.get<std::string>().empty())
                throw ConfigError("'suppress_marker' must be a non-empty string");
            config.suppress_marker = value.get<std::string>();
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return config;
}

LintConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// ---- rules -----------------------------------------------------------------

namespace {

class RuleRunner {
public:
    RuleRunner(const ModuleGraph& graph, const std::vector<ModuleDetections>& reports, const LintConfig& config)
        : graph_(graph), config_(config), impl_pattern_(config.impl_attr_pattern) {
        for (const auto& d : reports) reports_[d.module] = &d;
        for (const auto& [id, _] : graph.modules) known_.insert(id);
    }

    std::vector<Diagnostic> run() {
        for (const auto& [id, mod] : graph_.modules) {
            if (on("R001")) external_impl_access(mod);
            if (on("R003")) mangled_reliance(mod);
            if (on("R004") && client_facing(id)) export_drift(id, mod);
            if (on("R007")) business_logic(id, mod);
        }
        if (on("R002")) private_imports();
        if (on("R005")) cycles();
        if (on("R006")) heavy_imports();
        finalize(out_);
        return std::move(out_);
    }

private:
    const ModuleGraph& graph_;
    const LintConfig& config_;
    std::regex impl_pattern_;
    std::map<ModuleId, const ModuleDetections*> reports_;
    std::set<ModuleId> known_;
    std::vector<Diagnostic> out_;

    bool on(const char* code) const { return config_.rules.count(code) > 0; }

    bool client_facing(const ModuleId& id) const {
        if (config_.public_roots.empty()) return true;
        return std::any_of(config_.public_roots.begin(), config_.public_roots.end(),
                           [&](const std::string& root) { return id.is_within(ModuleId(root)); });
    }

    void emit(const char* code, const ParsedModule& mod, const Span& span, std::string message,
              std::optional<std::string> suggestion = std::nullopt) {
        Diagnostic d = make_diagnostic(code, mod.source, span, std::move(message));
        d.severity = rule_severity(code);
        d.suggestion = std::move(suggestion);
        out_.push_back(std::move(d));
    }

    bool has_class_report(const ModuleId& id) const {
        auto it = reports_.find(id);
        return it != reports_.end() && !it->second->classes.empty();
    }

    // R001 ------------------------------------------------------------------

    static std::set<std::string> self_assigned_attrs(const Node& root) {
        std::set<std::string> out;
        for (const auto& cls : root.body) {
            if (!cls.is(NodeKind::ClassDef)) continue;
            for (const auto& fn : cls.body) {
                if (!fn.is(NodeKind::FunctionDef)) continue;
                const auto params = fn.parameters();
                if (params.empty() || params.front()->text.empty()) continue;
                const std::string self_name = params.front()->text;
                walk(fn, [&](const Node& n) {
                    if (!n.is(NodeKind::Assign) && !n.is(NodeKind::AugAssign)) return;
                    for (const auto& t : n.children) {
                        if (t.is(NodeKind::Attribute) && t.children.front().is(NodeKind::NameRef) &&
                            t.children.front().text == self_name)
                            out.insert(t.text);
                    }
                });
            }
        }
        return out;
    }

    static std::set<std::string> import_bound_names(const Node& root) {
        std::set<std::string> out;
        walk(root, [&](const Node& n) {
            if (!n.is(NodeKind::Import) && !n.is(NodeKind::ImportFrom)) return;
            for (const auto& a : n.aliases) out.insert(a.bound_name());
        });
        return out;
    }

    bool impl_like(const std::string& attr) const {
        if (std::regex_search(attr, impl_pattern_)) return true;
        return config_.strict && classify_name(attr) == Visibility::Internal;
    }

    void external_impl_access(const ParsedModule& mod) {
        const auto own = self_assigned_attrs(mod.root);
        const auto modules = import_bound_names(mod.root);
        walk(mod.root, [&](const Node& n) {
            if (!n.is(NodeKind::Attribute) || !impl_like(n.text) || own.count(n.text)) return;
            const Node& recv = n.children.front();
            if (recv.is(NodeKind::NameRef) &&
                (recv.text == "self" || recv.text == "cls" || modules.count(recv.text)))
                return;
            emit("R001", mod, n.span,
                 "access to implementation attribute '" + n.text + "' from outside its defining module",
                 "use the public methods of the wrapper instead of its implementation object");
        });
    }

    // R002 ------------------------------------------------------------------

    static ModuleId owner_of(const ModuleId& id) {
        std::vector<std::string> owner;
        for (const auto& part : id.parts()) {
            const auto v = classify_name(part);
            if (v == Visibility::Internal || v == Visibility::Mangled) break;
            owner.push_back(part);
        }
        return ModuleId::from_parts(owner);
    }

    void private_imports() {
        for (const auto& e : graph_.edges) {
            if (!e.to.is_private()) continue;
            const ModuleId owner = owner_of(e.to);
            if (owner.empty() || e.from.is_within(owner) || has_class_report(e.from)) continue;
            const ParsedModule* mod = graph_.find(e.from);
            if (mod == nullptr) continue;
            emit("R002", *mod, e.span,
                 "import of private module '" + e.to.str() + "' from outside package '" + owner.str() + "'",
                 "import the public names from '" + owner.str() + "' instead");
        }
    }

    // R003 ------------------------------------------------------------------

    void mangled_reliance(const ParsedModule& mod) {
        std::function<void(const Node&, const std::string&)> visit = [&](const Node& n, const std::string& cls) {
            if (n.is(NodeKind::NameRef) || n.is(NodeKind::Attribute)) {
                if (auto parts = demangle(n.text)) {
                    const auto first = cls.find_first_not_of('_');
                    const std::string enclosing = first == std::string::npos ? "" : cls.substr(first);
                    if (parts->first != enclosing) {
                        emit("R003", mod, n.span,
                             "reliance on mangled name '" + n.text + "' private to class '" + parts->first + "'",
                             std::nullopt);
                    }
                }
            }
            const std::string inner = n.is(NodeKind::ClassDef) ? n.text : cls;
            for (const auto& c : n.children) visit(c, inner);
            for (const auto& c : n.body) visit(c, inner);
            for (const auto& c : n.orelse) visit(c, inner);
        };
        visit(mod.root, "");
    }

    // R004 ------------------------------------------------------------------

    void export_drift(const ModuleId& id, const ParsedModule& mod) {
        const ExportSet exports = exported_names(mod);
        if (exports.provenance != ExportProvenance::Curated) return;

        bool opaque = has_module_getattr(mod.root) && !detect_lazy_namespace(mod.root);
        for (const auto& stmt : mod.root.body) {
            if (stmt.is(NodeKind::ImportFrom) && !stmt.aliases.empty() && stmt.aliases.front().name == "*")
                opaque = true;
        }
        std::set<std::string> bound;
        for (const auto& b : top_level_bindings(mod.root)) bound.insert(b.name);
        if (auto lazy = detect_lazy_namespace(mod.root)) {
            for (const auto& br : *lazy) bound.insert(br.public_name);
        }
        if (!opaque) {
            for (const auto& e : exports.names) {
                if (bound.count(e.name) || (mod.source.is_package && known_.count(id.child(e.name)))) continue;
                emit("R004", mod, e.span, "__all__ lists '" + e.name + "' but the module never binds it");
            }
        }
        for (const auto& stmt : mod.root.body) {
            if (!stmt.is(NodeKind::ClassDef) && !stmt.is(NodeKind::FunctionDef)) continue;
            if (classify_name(stmt.text) != Visibility::Public || exports.contains(stmt.text)) continue;
            emit("R004", mod, stmt.name_span, "public definition '" + stmt.text + "' is missing from __all__",
                 "add '" + stmt.text + "' to __all__ or rename it with a leading underscore");
        }
    }

    // R005 ------------------------------------------------------------------

    void cycles() {
        for (const auto& cycle : find_cycles(graph_, false)) {
            const ModuleId& head = cycle.front();
            const ModuleId& next = cycle.size() > 1 ? cycle[1] : cycle.front();
            const ParsedModule* mod = graph_.find(head);
            if (mod == nullptr) continue;
            Span span = mod->root.span;
            for (const ImportEdge* e : graph_.edges_from(head)) {
                if (e->to == next && e->kind == EdgeKind::ModuleLevel && !e->external) {
                    span = e->span;
                    break;
                }
            }
            std::string path;
            for (const auto& m : cycle) path += m.str() + " -> ";
            path += head.str();
            emit("R005", *mod, span, "module-level import cycle: " + path,
                 "move the import of '" + next.str() +
                     "' into the constructor or factory function that needs it");
        }
    }

    // R006 ------------------------------------------------------------------

    bool heavy(const ModuleId& target) const {
        return std::any_of(config_.heavy_modules.begin(), config_.heavy_modules.end(),
                           [&](const std::string& prefix) { return target.is_within(ModuleId(prefix)); });
    }

    void heavy_imports() {
        for (const auto& e : graph_.edges) {
            if (e.kind != EdgeKind::ModuleLevel || e.from.is_private() || !client_facing(e.from) || !heavy(e.to))
                continue;
            const ParsedModule* mod = graph_.find(e.from);
            if (mod == nullptr) continue;
            emit("R006", *mod, e.span, "eager import of heavy module '" + e.to.str() + "' in a public module",
                 "move the import into the implementation layer or behind a lazy module __getattr__");
        }
    }

    // R007 ------------------------------------------------------------------

    void business_logic(const ModuleId& id, const ParsedModule& mod) {
        auto it = reports_.find(id);
        if (it == reports_.end()) return;
        for (const auto& c : it->second->classes) {
            if (c.coverage() >= config_.delegation_threshold) continue;
            std::ostringstream msg;
            msg << "interface class '" << c.class_name << "' delegates " << c.delegating_count() << " of "
                << c.public_count() << " public methods";
            emit("R007", mod, c.span, msg.str(), "move the non-delegating method bodies into the implementation class");
        }
    }
};

}  // namespace

std::vector<Diagnostic> lint_package(const ModuleGraph& graph, const ApiSurface& surface,
                                     const std::vector<ModuleDetections>& reports, const LintConfig& config) {
    (void)surface;  // surface-level rules read exports straight from the modules
    return RuleRunner(graph, reports, config).run();
}

// ---- suppressions ----------------------------------------------------------

SuppressionResult apply_suppressions(const std::vector<Diagnostic>& diagnostics, const ModuleGraph& graph,
                                     const std::string& marker) {
    SuppressionResult result;
    static const std::regex code_re("^[RP][0-9]{3}$");
    // (module, line) -> allowed codes
    std::map<std::pair<std::string, int>, std::set<std::string>> allowed;

    for (const auto& [id, mod] : graph.modules) {
        for (const auto& c : mod.comments) {
            std::string body = c.text.substr(1);
            const auto lead = body.find_first_not_of(" \t");
            if (lead == std::string::npos || body.compare(lead, marker.size(), marker) != 0) continue;
            std::string rest = body.substr(lead + marker.size());
            // strip surrounding whitespace
            rest.erase(0, rest.find_first_not_of(" \t"));
            rest.erase(rest.find_last_not_of(" \t\r") + 1);

            std::set<std::string> codes;
            bool ok = rest.size() > 7 && rest.compare(0, 6, "allow(") == 0 && rest.back() == ')';
            if (ok) {
                std::stringstream list(rest.substr(6, rest.size() - 7));
                std::string item;
                while (std::getline(list, item, ',')) {
                    item.erase(0, item.find_first_not_of(" \t"));
                    item.erase(item.find_last_not_of(" \t") + 1);
                    if (!std::regex_match(item, code_re)) ok = false;
                    codes.insert(item);
                }
            }
            if (!ok || codes.empty()) {
                result.marker_diagnostics.push_back(make_diagnostic(
                    codes::kMalformedMarker, mod.source, c.span,
                    "malformed suppression marker; expected '# " + marker + " allow(CODE[,CODE...])'"));
                continue;
            }
            allowed[{id.str(), c.span.start_line}].insert(codes.begin(), codes.end());
        }
    }

    for (const auto& d : diagnostics) {
        auto it = allowed.find({d.module, d.span.start_line});
        if (it != allowed.end() && it->second.count(d.code)) {
            ++result.suppressed;
        } else {
            result.kept.push_back(d);
        }
    }
    return result;
}

LintResult run_lint(const ModuleGraph& graph, const LintConfig& config) {
    std::vector<Diagnostic> all = graph.diagnostics;
    for (const auto& [_, mod] : graph.modules) all.insert(all.end(), mod.diagnostics.begin(), mod.diagnostics.end());
    const ApiSurface surface = extract_surface(graph);
    all.insert(all.end(), surface.diagnostics.begin(), surface.diagnostics.end());
    const auto reports = detect_all(graph, surface, config.impl_attr_pattern);
    const auto rules = lint_package(graph, surface, reports, config);
    all.insert(all.end(), rules.begin(), rules.end());

    SuppressionResult filtered = apply_suppressions(all, graph, config.suppress_marker);
    LintResult result;
    result.diagnostics = std::move(filtered.kept);
    result.diagnostics.insert(result.diagnostics.end(), filtered.marker_diagnostics.begin(),
                              filtered.marker_diagnostics.end());
    result.suppressed = filtered.suppressed;
    finalize(result.diagnostics);
    return result;
}

// ---- output ----------------------------------------------------------------

std::string lint_to_json(const LintResult& result) {
    json diags = json::array();
    std::map<std::string, int> counts;
    for (const auto& d : result.diagnostics) {
        ++counts[d.code];
        diags.push_back({{"code", d.code},
                         {"severity", to_string(d.severity)},
                         {"module", d.module},
                         {"line", d.span.start_line},
                         {"col", d.span.start_col},
                         {"end_line", d.span.end_line},
                         {"end_col", d.span.end_col},
                         {"message", d.message},
                         {"suggestion", d.suggestion ? json(*d.suggestion) : json(nullptr)},
                         {"fingerprint", d.fingerprint}});
    }
    json summary = json::object();
    for (const auto& [code, n] : counts) summary[code] = n;
    summary["suppressed"] = result.suppressed;
    json doc = {{"version", kLintSchemaVersion}, {"diagnostics", diags}, {"summary", summary}};
    return doc.dump(2) + "\n";
}

std::string lint_to_text(const LintResult& result) {
    std::ostringstream out;
    std::size_t errors = 0, warnings = 0, infos = 0;
    for (const auto& d : result.diagnostics) {
        out << (d.path.empty() ? d.module : d.path) << ":" << d.span.start_line << ":" << d.span.start_col << ": "
            << to_string(d.severity) << " " << d.code << " " << d.message << "\n";
        if (d.suggestion) out << "    suggestion: " << *d.suggestion << "\n";
        switch (d.severity) {
            case Severity::Error: ++errors; break;
            case Severity::Warning: ++warnings; break;
            case Severity::Info: ++infos; break;
        }
    }
    out << errors << " error(s), " << warnings << " warning(s), " << infos << " info, " << result.suppressed
        << " suppressed\n";
    return out.str();
}

}  // namespace sentinel
