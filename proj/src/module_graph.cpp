#include "pimpl_sentinel/module_graph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <tuple>

#include "pimpl_sentinel/lexer.hpp"
#include "pimpl_sentinel/parser.hpp"
#include "pimpl_sentinel/visibility.hpp"

namespace fs = std::filesystem;

namespace sentinel {

ModuleId ModuleId::from_parts(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += '.';
        out += p;
    }
    return ModuleId(std::move(out));
}

std::vector<std::string> ModuleId::parts() const {
    std::vector<std::string> out;
    if (dotted_.empty()) return out;
    std::stringstream ss(dotted_);
    std::string item;
    while (std::getline(ss, item, '.')) out.push_back(item);
    return out;
}

bool ModuleId::is_private() const {
    for (const auto& p : parts()) {
        const Visibility v = classify_name(p);
        if (v == Visibility::Internal || v == Visibility::Mangled) return true;
    }
    return false;
}

ModuleId ModuleId::parent() const {
    const auto dot = dotted_.rfind('.');
    return dot == std::string::npos ? ModuleId() : ModuleId(dotted_.substr(0, dot));
}

ModuleId ModuleId::child(std::string_view name) const {
    if (dotted_.empty()) return ModuleId(std::string(name));
    return ModuleId(dotted_ + "." + std::string(name));
}

bool ModuleId::is_within(const ModuleId& ancestor) const {
    if (ancestor.empty()) return true;
    if (dotted_ == ancestor.dotted_) return true;
    return dotted_.size() > ancestor.dotted_.size() && dotted_.compare(0, ancestor.dotted_.size(), ancestor.dotted_) == 0 &&
           dotted_[ancestor.dotted_.size()] == '.';
}

std::string_view to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::ModuleLevel: return "module_level";
        case EdgeKind::Deferred: return "deferred";
        case EdgeKind::Conditional: return "conditional";
    }
    return "module_level";
}

// ---- discovery -----------------------------------------------------------

namespace {

Diagnostic path_diagnostic(const char* code, const std::string& path, std::string message) {
    SourceFile pseudo;
    pseudo.path = path;
    return make_diagnostic(code, pseudo, Span{}, std::move(message));
}

std::string rel(const fs::path& p, const fs::path& base) {
    return p.lexically_relative(base).generic_string();
}

bool has_python_files(const fs::path& dir) {
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
        if (e.is_regular_file(ec) && e.path().extension() == ".py") return true;
    }
    return false;
}

void scan_dir(const fs::path& dir, const fs::path& base, std::vector<std::string> prefix, Discovery& out) {
    std::vector<fs::directory_entry> entries;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) entries.push_back(e);
    if (ec) {
        out.diagnostics.push_back(path_diagnostic(codes::kUnreadable, rel(dir, base), "cannot list directory: " + ec.message()));
        return;
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });

    for (const auto& e : entries) {
        const std::string name = e.path().filename().string();
        if (e.is_directory(ec)) {
            if (name.empty() || name.front() == '.' || name == "__pycache__") continue;
            if (!fs::exists(e.path() / "__init__.py")) {
                if (has_python_files(e.path())) {
                    out.diagnostics.push_back(path_diagnostic(
                        codes::kNotAPackage, rel(e.path(), base),
                        "directory '" + name + "' has no __init__.py; its modules are not analyzed"));
                }
                continue;
            }
            if (!is_identifier(name)) {
                out.diagnostics.push_back(path_diagnostic(codes::kNotAPackage, rel(e.path(), base),
                                                          "package directory name is not an identifier"));
                continue;
            }
            auto sub = prefix;
            sub.push_back(name);
            scan_dir(e.path(), base, std::move(sub), out);
            continue;
        }
        if (!e.is_regular_file(ec) || e.path().extension() != ".py") continue;
        const std::string stem = e.path().stem().string();
        const std::string path = rel(e.path(), base);
        std::vector<std::string> parts = prefix;
        const bool package = stem == "__init__";
        if (package) {
            if (parts.empty()) continue;  // __init__ of a non-package root
        } else {
            if (!is_identifier(stem)) {
                out.diagnostics.push_back(path_diagnostic(codes::kUnreadable, path,
                                                          "file name is not a valid module name"));
                continue;
            }
            parts.push_back(stem);
        }
        const auto size = fs::file_size(e.path(), ec);
        if (!ec && size > kMaxSourceBytes) {
            out.diagnostics.push_back(path_diagnostic(codes::kFileTooLarge, path, "file larger than 1 MiB skipped"));
            continue;
        }
        std::ifstream in(e.path(), std::ios::binary);
        if (!in) {
            out.diagnostics.push_back(path_diagnostic(codes::kUnreadable, path, "cannot read file"));
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        SourceFile file;
        file.path = path;
        file.text = buf.str();
        file.module_id = ModuleId::from_parts(parts).str();
        file.is_package = package;
        out.files.push_back(std::move(file));
    }
}

}  // namespace

Discovery discover_package(const fs::path& root) {
    Discovery out;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        out.diagnostics.push_back(path_diagnostic(codes::kUnreadable, root.generic_string(), "not a directory"));
        return out;
    }
    const fs::path canonical = fs::weakly_canonical(root, ec);
    std::vector<std::string> prefix;
    fs::path base = canonical;
    if (fs::exists(canonical / "__init__.py")) {
        const std::string name = canonical.filename().string();
        if (is_identifier(name)) {
            prefix.push_back(name);
            base = canonical.parent_path();
        }
    }
    scan_dir(canonical, base, prefix, out);
    std::sort(out.files.begin(), out.files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.module_id < b.module_id; });
    return out;
}

// ---- resolution ------------------------------------------------------------

std::optional<ModuleId> resolve_from_base(int level, const std::string& text, const ModuleId& current,
                                          bool current_is_package) {
    if (level == 0) return ModuleId(text);
    std::vector<std::string> pkg = current.parts();
    if (!current_is_package && !pkg.empty()) pkg.pop_back();
    const auto up = static_cast<std::size_t>(level - 1);
    if (pkg.empty() || up >= pkg.size()) return std::nullopt;
    pkg.resize(pkg.size() - up);
    ModuleId base = ModuleId::from_parts(pkg);
    if (!text.empty()) base = ModuleId(base.str() + "." + text);
    return base;
}

ResolveOutcome resolve_import(const Node& stmt, const ModuleId& current, bool current_is_package,
                              const std::set<ModuleId>& known) {
    ResolveOutcome out;
    auto lookup = [&](const ModuleId& id) {
        Resolution r;
        r.target = id;
        r.external = known.count(id) == 0;
        return r;
    };
    if (stmt.is(NodeKind::Import)) {
        for (const auto& alias : stmt.aliases) {
            Resolution r = lookup(ModuleId(alias.name));
            r.names = {alias.bound_name()};
            out.targets.push_back(std::move(r));
        }
        return out;
    }
    if (!stmt.is(NodeKind::ImportFrom)) return out;

    const auto resolved = resolve_from_base(stmt.level, stmt.text, current, current_is_package);
    if (!resolved) {
        out.error = "relative import beyond top-level package";
        return out;
    }
    const ModuleId base = *resolved;

    std::vector<std::string> plain;
    for (const auto& alias : stmt.aliases) {
        if (alias.name != "*" && known.count(base.child(alias.name))) {
            Resolution r = lookup(base.child(alias.name));
            r.names = {alias.bound_name()};
            out.targets.push_back(std::move(r));
        } else {
            plain.push_back(alias.name);
        }
    }
    if (!plain.empty() || stmt.aliases.empty()) {
        Resolution r = lookup(base);
        r.names = std::move(plain);
        out.targets.insert(out.targets.begin(), std::move(r));
    }
    return out;
}

// ---- graph -----------------------------------------------------------------

const ParsedModule* ModuleGraph::find(const ModuleId& id) const {
    auto it = modules.find(id);
    return it == modules.end() ? nullptr : &it->second;
}

std::vector<const ImportEdge*> ModuleGraph::edges_from(const ModuleId& id) const {
    std::vector<const ImportEdge*> out;
    for (const auto& e : edges) {
        if (e.from == id) out.push_back(&e);
    }
    return out;
}

namespace {

void collect_edges(const std::vector<Node>& stmts, EdgeKind kind, const ParsedModule& mod,
                   const std::set<ModuleId>& known, ModuleGraph& graph) {
    const ModuleId current(mod.source.module_id);
    for (const auto& stmt : stmts) {
        switch (stmt.kind) {
            case NodeKind::Import:
            case NodeKind::ImportFrom: {
                ResolveOutcome res = resolve_import(stmt, current, mod.source.is_package, known);
                if (res.error) {
                    graph.diagnostics.push_back(
                        make_diagnostic(codes::kRelativeBeyondTop, mod.source, stmt.span, *res.error));
                }
                for (auto& r : res.targets) {
                    ImportEdge e;
                    e.from = current;
                    e.to = std::move(r.target);
                    e.kind = kind;
                    e.names = std::move(r.names);
                    e.span = stmt.span;
                    e.external = r.external;
                    graph.edges.push_back(std::move(e));
                }
                break;
            }
            case NodeKind::FunctionDef:
                collect_edges(stmt.body, EdgeKind::Deferred, mod, known, graph);
                break;
            case NodeKind::ClassDef:
                collect_edges(stmt.body, kind, mod, known, graph);
                break;
            case NodeKind::If: {
                const EdgeKind inner = kind == EdgeKind::Deferred ? kind : EdgeKind::Conditional;
                collect_edges(stmt.body, inner, mod, known, graph);
                collect_edges(stmt.orelse, inner, mod, known, graph);
                break;
            }
            default:
                break;
        }
    }
}

}  // namespace

ModuleGraph build_graph(const std::vector<SourceFile>& files) {
    ModuleGraph graph;
    std::set<ModuleId> known;
    for (const auto& f : files) {
        ModuleId id(f.module_id);
        known.insert(id);
        graph.modules.emplace(id, parse_module(f));
    }
    for (const auto& [id, mod] : graph.modules) {
        collect_edges(mod.root.body, EdgeKind::ModuleLevel, mod, known, graph);
    }
    std::stable_sort(graph.edges.begin(), graph.edges.end(), [](const ImportEdge& a, const ImportEdge& b) {
        return std::tie(a.from, a.span.start_offset, a.to) < std::tie(b.from, b.span.start_offset, b.to);
    });
    return graph;
}

ModuleGraph analyze_directory(const fs::path& root) {
    Discovery d = discover_package(root);
    ModuleGraph graph = build_graph(d.files);
    graph.diagnostics.insert(graph.diagnostics.begin(), d.diagnostics.begin(), d.diagnostics.end());
    return graph;
}

// ---- cycles ----------------------------------------------------------------

namespace {

class Tarjan {
public:
    explicit Tarjan(const std::vector<std::vector<std::size_t>>& adj)
        : adj_(adj), index_(adj.size(), -1), low_(adj.size(), 0), on_stack_(adj.size(), false) {}

    std::vector<std::vector<std::size_t>> run() {
        for (std::size_t v = 0; v < adj_.size(); ++v) {
            if (index_[v] == -1) visit(v);
        }
        return std::move(sccs_);
    }

private:
    const std::vector<std::vector<std::size_t>>& adj_;
    std::vector<int> index_;
    std::vector<int> low_;
    std::vector<bool> on_stack_;
    std::vector<std::size_t> stack_;
    std::vector<std::vector<std::size_t>> sccs_;
    int counter_ = 0;

    void visit(std::size_t v) {
        index_[v] = low_[v] = counter_++;
        stack_.push_back(v);
        on_stack_[v] = true;
        for (std::size_t w : adj_[v]) {
            if (index_[w] == -1) {
                visit(w);
                low_[v] = std::min(low_[v], low_[w]);
            } else if (on_stack_[w]) {
                low_[v] = std::min(low_[v], index_[w]);
            }
        }
        if (low_[v] == index_[v]) {
            std::vector<std::size_t> scc;
            std::size_t w;
            do {
                w = stack_.back();
                stack_.pop_back();
                on_stack_[w] = false;
                scc.push_back(w);
            } while (w != v);
            sccs_.push_back(std::move(scc));
        }
    }
};

}  // namespace

std::vector<Cycle> find_cycles(const std::vector<ModuleId>& nodes_in,
                               const std::vector<std::pair<ModuleId, ModuleId>>& edges) {
    std::vector<ModuleId> nodes = nodes_in;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::map<ModuleId, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;

    std::vector<std::vector<std::size_t>> adj(nodes.size());
    for (const auto& [from, to] : edges) {
        auto f = index.find(from);
        auto t = index.find(to);
        if (f == index.end() || t == index.end()) continue;
        adj[f->second].push_back(t->second);
    }
    // node indices follow sorted ids, so sorting adjacency gives lexicographic successors
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    std::vector<Cycle> cycles;
    for (auto& scc : Tarjan(adj).run()) {
        const bool self_loop =
            scc.size() == 1 && std::binary_search(adj[scc[0]].begin(), adj[scc[0]].end(), scc[0]);
        if (scc.size() < 2 && !self_loop) continue;
        std::set<std::size_t> members(scc.begin(), scc.end());
        std::vector<bool> seen(nodes.size(), false);
        Cycle order;
        std::function<void(std::size_t)> dfs = [&](std::size_t v) {
            seen[v] = true;
            order.push_back(nodes[v]);
            for (std::size_t w : adj[v]) {
                if (members.count(w) && !seen[w]) dfs(w);
            }
        };
        dfs(*members.begin());
        cycles.push_back(std::move(order));
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

std::vector<Cycle> find_cycles(const ModuleGraph& graph, bool include_deferred) {
    std::vector<ModuleId> nodes;
    for (const auto& [id, _] : graph.modules) nodes.push_back(id);
    std::vector<std::pair<ModuleId, ModuleId>> edges;
    for (const auto& e : graph.edges) {
        if (e.external) continue;
        if (!include_deferred && e.kind != EdgeKind::ModuleLevel) continue;
        edges.emplace_back(e.from, e.to);
    }
    return find_cycles(nodes, edges);
}

}  // namespace sentinel
