#include <doctest.h>

#include <json.hpp>

#include "pimpl_sentinel/api_surface.hpp"
#include "pimpl_sentinel/parser.hpp"
#include "support.hpp"

using namespace sentinel;

namespace {

ApiSurface surface_of(const std::map<std::string, std::string>& modules, const std::vector<std::string>& packages) {
    return extract_surface(build_graph(testing::sources(modules, packages)));
}

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
    return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

std::vector<std::string> names(const std::vector<DiffItem>& items) {
    std::vector<std::string> out;
    for (const auto& i : items) out.push_back(i.module.str() + "." + i.name);
    return out;
}

}  // namespace

TEST_CASE("lazy namespace recognition on the fixture") {
    const ParsedModule m = parse_text(testing::read_text(testing::fixture("mylib/__init__.py")), "mylib");
    const auto branches = detect_lazy_namespace(m.root);
    REQUIRE(branches.has_value());
    REQUIRE(branches->size() == 2);
    CHECK((*branches)[0].public_name == "array");
    CHECK((*branches)[0].source_module == "._core");
    CHECK((*branches)[0].source_name == "array");
    CHECK((*branches)[1].public_name == "read_image");
    CHECK((*branches)[1].source_module == "._io");
}

TEST_CASE("lazy namespace shapes that are not recognized") {
    for (const char* src : {
             // no trailing raise
             "def __getattr__(name):\n    if name == 'a':\n        from .m import a\n        return a\n",
             // returns something other than the imported name
             "def __getattr__(name):\n    if name == 'a':\n        from .m import a\n        return b\n"
             "    raise AttributeError(name)\n",
             // compares against another variable
             "def __getattr__(name):\n    if other == 'a':\n        from .m import a\n        return a\n"
             "    raise AttributeError(name)\n",
             // duplicate public names
             "def __getattr__(name):\n    if name == 'a':\n        from .m import a\n        return a\n"
             "    if name == 'a':\n        from .n import a\n        return a\n    raise AttributeError(name)\n",
             // dynamic import
             "def __getattr__(name):\n    return importlib.import_module('.' + name, __name__)\n",
         }) {
        CAPTURE(src);
        const ParsedModule m = parse_text(src);
        CHECK(has_module_getattr(m.root));
        CHECK_FALSE(detect_lazy_namespace(m.root).has_value());
    }
    CHECK_FALSE(has_module_getattr(parse_text("x = 1\n").root));
}

TEST_CASE("reversed comparison and aliased import are accepted") {
    const ParsedModule m = parse_text(
        "def __getattr__(attr):\n    if 'fast' == attr:\n        from ._impl import Fast as F\n        return F\n"
        "    raise AttributeError(attr)\n");
    const auto b = detect_lazy_namespace(m.root);
    REQUIRE(b.has_value());
    CHECK((*b)[0].public_name == "fast");
    CHECK((*b)[0].source_name == "Fast");
}

TEST_CASE("surface of the lazy-namespace fixture") {
    const ApiSurface s = extract_surface(analyze_directory(testing::fixture("mylib")));
    REQUIRE(s.modules.size() == 1);
    const auto& entries = s.modules.at(ModuleId("mylib"));
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].public_name == "array");
    CHECK(entries[0].binding == Binding::Lazy);
    CHECK(entries[0].origin_module.str() == "mylib._core");
    CHECK(entries[0].curated);
    CHECK(entries[1].origin_module.str() == "mylib._io");
    CHECK(entries[1].origin_name == "read_image");
    CHECK(s.diagnostics.empty());
}

TEST_CASE("direct definitions and re-exports") {
    const ApiSurface s = surface_of({{"p", "from .m import f as g\nfrom . import m\nimport p.m as pm\nh = pm.f\n"
                                           "class C: pass\n_hidden = 1\n"},
                                     {"p.m", "def f(): pass\n"}},
                                    {"p"});
    const SymbolEntry* g = s.find(ModuleId("p"), "g");
    REQUIRE(g != nullptr);
    CHECK(g->binding == Binding::Reexport);
    CHECK(g->origin_module.str() == "p.m");
    CHECK(g->origin_name == "f");
    const SymbolEntry* m = s.find(ModuleId("p"), "m");
    REQUIRE(m != nullptr);
    CHECK(m->origin_module.str() == "p.m");
    CHECK(m->origin_name.empty());
    const SymbolEntry* h = s.find(ModuleId("p"), "h");
    REQUIRE(h != nullptr);
    CHECK(h->origin_module.str() == "p.m");
    CHECK(h->origin_name == "f");
    const SymbolEntry* c = s.find(ModuleId("p"), "C");
    REQUIRE(c != nullptr);
    CHECK(c->binding == Binding::DirectDef);
    CHECK(c->origin_module.str() == "p");
    CHECK_FALSE(c->curated);
    CHECK(s.find(ModuleId("p"), "_hidden") == nullptr);
    CHECK(s.find(ModuleId("p"), "pm") != nullptr);
}

TEST_CASE("private modules contribute no surface") {
    const ApiSurface s = surface_of({{"p", ""}, {"p._core", "def f(): pass\n"}, {"p._core.sub", "x = 1\n"}}, {"p"});
    CHECK(s.modules.find(ModuleId("p._core")) == s.modules.end());
    CHECK(s.modules.find(ModuleId("p._core.sub")) == s.modules.end());
}

TEST_CASE("opaque __getattr__ is diagnosed") {
    const ApiSurface s = surface_of({{"p", "def __getattr__(name):\n    return 1\n"}}, {"p"});
    CHECK(has_code(s.diagnostics, "P010"));
}

TEST_CASE("a lazy name that is also bound directly keeps the direct binding") {
    const ApiSurface s = surface_of(
        {{"p", "from ._a import x\n__all__ = ['x']\ndef __getattr__(name):\n    if name == 'x':\n"
               "        from ._b import x\n        return x\n    raise AttributeError(name)\n"},
         {"p._a", "x = 1\n"},
         {"p._b", "x = 2\n"}},
        {"p"});
    CHECK(has_code(s.diagnostics, "P011"));
    const SymbolEntry* x = s.find(ModuleId("p"), "x");
    REQUIRE(x != nullptr);
    CHECK(x->binding == Binding::Reexport);
    CHECK(x->origin_module.str() == "p._a");
}

TEST_CASE("unresolved origins are diagnosed") {
    const ApiSurface s = surface_of({{"p", "from ._a import missing\n"}, {"p._a", "x = 1\n"}}, {"p"});
    CHECK(has_code(s.diagnostics, "P012"));
}

TEST_CASE("NumPy-style rename: moved origins but no removals") {
    const ApiSurface v1 = extract_surface(analyze_directory(testing::fixture("core_rename/v1")));
    const ApiSurface v2 = extract_surface(analyze_directory(testing::fixture("core_rename/v2_rename")));
    const SurfaceDiff d = diff_surfaces(v1, v2);
    CHECK(d.removed.empty());
    CHECK(d.added.empty());
    CHECK_FALSE(d.breaking());
    CHECK(names(d.origin_moved) == std::vector<std::string>{"npl.add", "npl.array", "npl.zeros",
                                                            "npl.core.multiarray.array",
                                                            "npl.core.multiarray.zeros", "npl.core.umath.add"});
    const SymbolEntry* array = v2.find(ModuleId("npl"), "array");
    REQUIRE(array != nullptr);
    CHECK(array->origin_module.str() == "npl._core.multiarray");
}

TEST_CASE("dropping a re-export is breaking") {
    const ApiSurface v1 = extract_surface(analyze_directory(testing::fixture("core_rename/v1")));
    const ApiSurface v2 = extract_surface(analyze_directory(testing::fixture("core_rename/v2_drop")));
    const SurfaceDiff d = diff_surfaces(v1, v2);
    CHECK(d.breaking());
    CHECK(names(d.removed) == std::vector<std::string>{"npl.add"});
    CHECK(d.removed[0].detail == "was npl.core.umath:add");
}

TEST_CASE("frozen surface documents match a fresh extraction") {
    for (const char* name : {"v1", "v2_rename", "v2_drop"}) {
        CAPTURE(name);
        const std::string fresh = surface_to_json(extract_surface(analyze_directory(testing::fixture(std::string("core_rename/") + name))));
        const std::string frozen = testing::read_text(testing::fixture(std::string("core_rename/") + name + ".json"));
        CHECK(nlohmann::json::parse(fresh) == nlohmann::json::parse(frozen));
    }
}

TEST_CASE("surface JSON round-trips") {
    const ApiSurface s = extract_surface(analyze_directory(testing::fixture("core_rename/v2_rename")));
    const std::string text = surface_to_json(s);
    const ApiSurface back = surface_from_json(text);
    CHECK(surface_to_json(back) == text);
    const SurfaceDiff d = diff_surfaces(s, back);
    CHECK(d.added.empty());
    CHECK(d.removed.empty());
    CHECK(d.origin_moved.empty());
}

TEST_CASE("malformed surface documents are rejected") {
    for (const char* doc : {"not json", "[]", "{\"version\": 2, \"modules\": {}}", "{\"version\": 1}",
                            "{\"version\": 1, \"modules\": {\"m\": [{\"name\": \"x\"}]}}",
                            "{\"version\": 1, \"modules\": {\"m\": [{\"name\": \"x\", \"origin\": \"m\", "
                            "\"origin_name\": \"x\", \"binding\": \"weird\", \"curated\": false}]}}"}) {
        CAPTURE(doc);
        CHECK_THROWS_AS(surface_from_json(doc), std::runtime_error);
    }
}

TEST_CASE("diff classification of a small change set") {
    const ApiSurface a = surface_of({{"p", "from ._x import f, g\nfrom ._x import h\n"}, {"p._x", "def f(): pass\ndef g(): pass\ndef h(): pass\n"}}, {"p"});
    const ApiSurface b = surface_of({{"p", "from ._x import f\nfrom ._y import h\ndef k(): pass\n"}, {"p._x", "def f(): pass\n"}, {"p._y", "def h(): pass\n"}}, {"p"});
    const SurfaceDiff d = diff_surfaces(a, b);
    CHECK(names(d.added) == std::vector<std::string>{"p.k"});
    CHECK(names(d.removed) == std::vector<std::string>{"p.g"});
    CHECK(names(d.origin_moved) == std::vector<std::string>{"p.h"});
    CHECK(names(d.unchanged) == std::vector<std::string>{"p.f"});
    const auto j = nlohmann::json::parse(diff_to_json(d));
    CHECK(j["removed"].size() == 1);
    CHECK(diff_to_text(d).find("summary: 1 removed, 1 added, 1 origin moved, 1 unchanged") != std::string::npos);
}
