#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pimpl_sentinel/api_surface.hpp"
#include "pimpl_sentinel/module_graph.hpp"

namespace sentinel {

inline constexpr const char* kDefaultImplPattern = "^_p?impl$";

struct Delegation {
    std::string method;
    std::string target;  // method called on the impl attribute
    Span span;
};

struct ClassPimplReport {
    std::string class_name;
    Span span;
    std::string impl_attr;
    std::vector<Span> construction_sites;
    std::vector<Delegation> delegating;
    std::vector<Delegation> guarded;
    std::vector<std::string> non_delegating_public;
    std::vector<std::string> notes;

    std::size_t delegating_count() const { return delegating.size() + guarded.size(); }
    std::size_t public_count() const { return delegating_count() + non_delegating_public.size(); }
    /// delegating / public; a class without public methods counts as 1.
    double coverage() const;
};

struct ModulePimplReport {
    ModuleId public_module;
    std::vector<ModuleId> backing_modules;
    std::vector<std::pair<std::string, std::string>> rebound_names;  // (binding, origin name)
};

enum class Fallback { Raise, None };

struct FactoryReport {
    std::string scope;     // enclosing class, empty at module level
    std::string selector;  // function or method name
    std::string parameter;
    std::vector<std::pair<std::string, std::string>> branches;  // literal -> class, in chain order
    Fallback fallback = Fallback::None;
    Span span;
};

/// `impl_pattern` is an ECMAScript regex searched against attribute names.
/// Throws std::regex_error for an invalid pattern.
std::optional<ClassPimplReport> detect_class_pimpl(const Node& cls,
                                                   const std::string& impl_pattern = kDefaultImplPattern);

/// Factories among the functions directly inside `scope` (a Module or ClassDef).
std::vector<FactoryReport> detect_factory(const Node& scope);

std::optional<ModulePimplReport> detect_module_pimpl(const ModuleId& module, const ModuleGraph& graph,
                                                     const ApiSurface& surface);

struct ModuleDetections {
    ModuleId module;
    std::string path;
    std::vector<ClassPimplReport> classes;
    std::vector<FactoryReport> factories;
    std::optional<ModulePimplReport> module_report;

    bool empty() const { return classes.empty() && factories.empty() && !module_report; }
};

/// Runs every detector over every module, in module order.
std::vector<ModuleDetections> detect_all(const ModuleGraph& graph, const ApiSurface& surface,
                                         const std::string& impl_pattern = kDefaultImplPattern);

std::string detections_to_json(const std::vector<ModuleDetections>& detections);
std::string detections_to_text(const std::vector<ModuleDetections>& detections);

}  // namespace sentinel
