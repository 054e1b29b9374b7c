#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pimpl_sentinel/syntax.hpp"

namespace sentinel {

enum class Visibility { Public, Internal, Mangled, Dunder };

std::string_view to_string(Visibility v);

struct QualifiedName {
    std::string module;
    std::optional<std::string> enclosing_class;
    std::string name;
};

/// `__x__` -> Dunder, `__x` -> Mangled, `_x` -> Internal, otherwise Public.
Visibility classify_name(std::string_view name);

/// Class-private name mangling as performed by the interpreter: `__attr`
/// inside `class C` becomes `_C__attr`. Leading underscores of the class
/// name are stripped; an all-underscore class name disables mangling.
std::string mangle(std::string_view class_name, std::string_view attr);

/// Splits `_<Class>__<attr>` at the first `__` after the class part. The
/// returned class name carries no leading underscores.
std::optional<std::pair<std::string, std::string>> demangle(std::string_view name);

enum class ExportProvenance { Curated, Implicit, Undecidable };

std::string_view to_string(ExportProvenance p);

struct ExportedName {
    std::string name;
    Span span;  // the __all__ entry, or the binding statement
};

struct ExportSet {
    ExportProvenance provenance = ExportProvenance::Implicit;
    std::vector<ExportedName> names;  // source order, no duplicates
    std::optional<Span> all_span;     // the governing __all__ assignment
    std::vector<Diagnostic> diagnostics;

    bool contains(std::string_view name) const;
};

/// A top-level name binding in source order. Bindings nested in module-level
/// `if` blocks count too.
struct TopLevelBinding {
    std::string name;
    const Node* statement = nullptr;
};

std::vector<TopLevelBinding> top_level_bindings(const Node& module);

/// Curated `__all__` when it is a literal list/tuple of strings, otherwise the
/// Public top-level names. Mutated or computed `__all__` is Undecidable and
/// falls back to the implicit set.
ExportSet exported_names(const ParsedModule& module);

/// Names bound by `from module import *`.
std::vector<std::string> star_import_set(const ParsedModule& module);

}  // namespace sentinel
