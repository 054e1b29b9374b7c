#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pimpl_sentinel/syntax.hpp"

namespace sentinel {

/// Dotted module path such as `mylib._core`.
class ModuleId {
public:
    ModuleId() = default;
    explicit ModuleId(std::string dotted) : dotted_(std::move(dotted)) {}
    static ModuleId from_parts(const std::vector<std::string>& parts);

    const std::string& str() const { return dotted_; }
    bool empty() const { return dotted_.empty(); }
    std::vector<std::string> parts() const;

    /// True when any component is Internal or Mangled (`numpy._core.x`).
    bool is_private() const;
    ModuleId parent() const;
    ModuleId child(std::string_view name) const;
    /// Equal to `ancestor` or nested below it. Everything is within the empty id.
    bool is_within(const ModuleId& ancestor) const;

    friend auto operator<=>(const ModuleId&, const ModuleId&) = default;
    friend bool operator==(const ModuleId&, const ModuleId&) = default;

private:
    std::string dotted_;
};

enum class EdgeKind { ModuleLevel, Deferred, Conditional };

std::string_view to_string(EdgeKind kind);

struct ImportEdge {
    ModuleId from;
    ModuleId to;
    EdgeKind kind = EdgeKind::ModuleLevel;
    std::vector<std::string> names;  // imported bindings, or {"*"}
    Span span;
    bool external = false;
};

inline constexpr std::size_t kMaxSourceBytes = 1024 * 1024;

struct Discovery {
    std::vector<SourceFile> files;  // sorted by module id
    std::vector<Diagnostic> diagnostics;
};

/// Maps `.py` files under `root` to module ids. When `root` itself holds an
/// `__init__.py` it is treated as a package named after the directory.
/// Subdirectories need an `__init__.py`; hidden directories are skipped.
Discovery discover_package(const std::filesystem::path& root);

struct Resolution {
    ModuleId target;
    bool external = false;
    std::vector<std::string> names;
};

struct ResolveOutcome {
    std::vector<Resolution> targets;
    std::optional<std::string> error;
};

/// Base module of `from <dots><text> import ...` seen from `current`;
/// nullopt when the relative level climbs past the top-level package.
std::optional<ModuleId> resolve_from_base(int level, const std::string& text, const ModuleId& current,
                                          bool current_is_package);

/// Resolves an Import/ImportFrom statement from module `current`. Relative
/// imports count levels from the current package (a plain module's package
/// is its parent). `from pkg import sub` targets `pkg.sub` when that is a
/// known module. Absolute paths not found in `known` are external.
ResolveOutcome resolve_import(const Node& stmt, const ModuleId& current, bool current_is_package,
                              const std::set<ModuleId>& known);

struct ModuleGraph {
    std::map<ModuleId, ParsedModule> modules;
    std::vector<ImportEdge> edges;  // ordered by (from, span.start)
    std::vector<Diagnostic> diagnostics;

    const ParsedModule* find(const ModuleId& id) const;
    std::vector<const ImportEdge*> edges_from(const ModuleId& id) const;
};

ModuleGraph build_graph(const std::vector<SourceFile>& files);

/// discover_package + build_graph; discovery diagnostics are carried over.
ModuleGraph analyze_directory(const std::filesystem::path& root);

using Cycle = std::vector<ModuleId>;

/// Strongly connected components with two or more modules, plus self-loops.
/// Only module-level edges count unless `include_deferred`, which also admits
/// deferred and conditional edges. Each cycle starts at its smallest module
/// and follows a depth-first walk (successors in lexicographic order);
/// cycles are sorted by their first module.
std::vector<Cycle> find_cycles(const ModuleGraph& graph, bool include_deferred);

/// Same as above over a bare edge list, used for synthetic graphs.
std::vector<Cycle> find_cycles(const std::vector<ModuleId>& nodes,
                               const std::vector<std::pair<ModuleId, ModuleId>>& edges);

}  // namespace sentinel
