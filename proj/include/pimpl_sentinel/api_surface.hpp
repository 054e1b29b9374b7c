#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pimpl_sentinel/module_graph.hpp"

namespace sentinel {

enum class Binding { DirectDef, Reexport, Lazy };

std::string_view to_string(Binding b);
std::optional<Binding> binding_from_string(std::string_view text);

struct SymbolEntry {
    std::string public_name;
    ModuleId exposing_module;
    ModuleId origin_module;
    std::string origin_name;  // empty when the binding is the module object itself
    Binding binding = Binding::DirectDef;
    bool curated = false;
    bool external = false;  // in-memory only; not serialized
};

struct ApiSurface {
    std::map<ModuleId, std::vector<SymbolEntry>> modules;
    std::vector<Diagnostic> diagnostics;

    const SymbolEntry* find(const ModuleId& module, std::string_view name) const;
};

/// One recognized `if name == "X": from M import Y; return Y` branch.
struct LazyBranch {
    std::string public_name;
    std::string source_module;  // as written, e.g. "._core"
    std::string source_name;
    Span span;
};

/// Recognizes a module-level `__getattr__(name)` made only of such branches
/// and ending in `raise AttributeError(...)`. Any other shape yields nullopt.
std::optional<std::vector<LazyBranch>> detect_lazy_namespace(const Node& module);

/// True when the module defines a top-level `__getattr__` at all.
bool has_module_getattr(const Node& module);

ApiSurface extract_surface(const ModuleGraph& graph);

struct DiffItem {
    ModuleId module;
    std::string name;
    std::string detail;
};

struct SurfaceDiff {
    std::vector<DiffItem> added;
    std::vector<DiffItem> removed;
    std::vector<DiffItem> origin_moved;
    std::vector<DiffItem> unchanged;

    bool breaking() const { return !removed.empty(); }
};

/// Entries are matched by (exposing module, public name).
SurfaceDiff diff_surfaces(const ApiSurface& old_surface, const ApiSurface& new_surface);

inline constexpr int kSurfaceSchemaVersion = 1;

/// {"version": 1, "modules": {"<dotted>": [{"name", "origin", "origin_name",
/// "binding", "curated"}]}}
std::string surface_to_json(const ApiSurface& surface);
std::string surface_to_text(const ApiSurface& surface);

/// Throws std::runtime_error on malformed documents or version mismatch.
ApiSurface surface_from_json(const std::string& text);

std::string diff_to_json(const SurfaceDiff& diff);
std::string diff_to_text(const SurfaceDiff& diff);

}  // namespace sentinel
