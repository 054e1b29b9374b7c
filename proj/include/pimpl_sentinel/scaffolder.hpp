#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pimpl_sentinel/syntax.hpp"

namespace sentinel {

struct ScaffoldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RenderedFile {
    std::string path;  // relative to the output directory, '/' separated
    std::string text;
};

struct ParamPlan {
    std::string name;     // empty for a bare `*` or `/`
    std::string star;     // "", "*", "**" or "/"
    std::string default_text;
};

struct MethodPlan {
    std::string name;
    std::vector<ParamPlan> params;  // receiver excluded
    bool has_docstring = false;
    bool is_public = false;      // gets a forwarding method on the interface
    std::string docstring_text;  // source of the docstring, re-indented for a method body
    std::string impl_text;       // full definition, re-indented for a class body
};

struct FactoryBackend {
    std::string literal;
    std::string class_name;
    std::string module;  // dotted; empty selects impl._<snake_case(class_name)>
};

struct LazyEntry {
    std::string public_name;
    std::string origin_module;  // e.g. "._core" or "mylib._core"
    std::string origin_name;
};

struct ScaffoldOptions {
    std::string impl_dir = "impl";
    std::string impl_class_name;  // empty selects _<Class>Impl
    bool defer_import = false;    // import the implementation inside __init__
};

struct ScaffoldPlan {
    std::string source_module;
    std::string class_name;
    std::string interface_path;
    std::string impl_path;
    std::string impl_module;  // dotted form of impl_path
    std::string impl_class_name;
    std::string class_docstring_text;
    std::vector<std::string> class_body_texts;  // class-level statements moved to the impl
    std::optional<MethodPlan> init;
    std::vector<MethodPlan> methods;  // source order, __init__ excluded
    std::vector<std::string> moved_state;
    std::optional<std::vector<FactoryBackend>> factory;
    std::optional<std::vector<LazyEntry>> lazy_entries;
    bool defer_import = false;
};

std::string snake_case(std::string_view class_name);

/// Plans moving every body of `class_name` behind an `_impl` reference.
/// Throws ScaffoldError when the class is missing, already delegates through
/// an impl attribute, has no public methods, uses decorators or base classes,
/// contains statements outside the supported subset, or reads module globals.
ScaffoldPlan plan_class_split(const ParsedModule& module, const std::string& class_name,
                              const ScaffoldOptions& options = {});

/// Interface file then implementation file. Pure function of the plan.
std::vector<RenderedFile> render_scaffold(const ScaffoldPlan& plan);

/// `__init__.py` files the implementation directory needs to be importable.
std::vector<RenderedFile> package_init_files(const ScaffoldPlan& plan);

/// Interface class with a `bind(<snake>_type)` selector over the backends.
/// `methods` become guarded forwarding methods. Needs two or more backends
/// with distinct lower-case literals.
RenderedFile render_factory(const std::string& interface_name, const std::vector<FactoryBackend>& backends,
                            const std::vector<MethodPlan>& methods = {}, const std::string& path = "");

/// `__all__` plus a module `__getattr__` importing each entry on first access.
RenderedFile render_lazy_init(const std::vector<LazyEntry>& entries, const std::string& path = "__init__.py");

/// Writes files under `out_dir`. Refuses (before writing anything) when a
/// target exists and `overwrite` is false. Returns the written paths.
std::vector<std::string> write_files(const std::vector<RenderedFile>& files, const std::filesystem::path& out_dir,
                                     bool overwrite);

}  // namespace sentinel
