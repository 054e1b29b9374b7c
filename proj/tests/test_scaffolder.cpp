#include <doctest.h>

#include "pimpl_sentinel/api_surface.hpp"
#include "pimpl_sentinel/detector.hpp"
#include "pimpl_sentinel/linter.hpp"
#include "pimpl_sentinel/parser.hpp"
#include "pimpl_sentinel/scaffolder.hpp"
#include "pimpl_sentinel/visibility.hpp"
#include "support.hpp"

using namespace sentinel;

namespace {

const char* const kMonolith =
    "\"\"\"Widget with state.\"\"\"\n"
    "\n"
    "class Widget:\n"
    "    def __init__(self, config):\n"
    "        self._state = \"initialized\"\n"
    "        self._config = config\n"
    "\n"
    "    def start(self):\n"
    "        self._state = \"running\"\n"
    "\n"
    "    def stop(self):\n"
    "        self._state = \"stopped\"\n"
    "\n"
    "    def status(self):\n"
    "        return {\n"
    "            \"state\": self._state,\n"
    "            \"config\": dict(self._config),\n"
    "        }\n";

// Drops the leading docstring line and blank lines; the structure is what matters.
std::vector<std::string> normalized(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line.rfind("\"\"\"", 0) == 0) continue;
        }
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(line);
    }
    return out;
}

ScaffoldPlan plan_for(const std::string& src, const std::string& cls, const ScaffoldOptions& options = {}) {
    return plan_class_split(parse_text(src, "widget", "widget.py"), cls, options);
}

std::string refusal(const std::string& src, const std::string& cls) {
    try {
        plan_for(src, cls);
    } catch (const ScaffoldError& e) {
        return e.what();
    }
    return "";
}

ModuleGraph graph_of(const std::vector<RenderedFile>& files) {
    std::vector<SourceFile> sources;
    for (const auto& f : files) {
        SourceFile s;
        s.path = f.path;
        s.text = f.text;
        std::string id = f.path.substr(0, f.path.size() - 3);
        std::replace(id.begin(), id.end(), '/', '.');
        if (id == "__init__") id = "root";
        if (id.size() > 9 && id.compare(id.size() - 9, 9, ".__init__") == 0) {
            id.resize(id.size() - 9);
            s.is_package = true;
        }
        s.module_id = id;
        sources.push_back(std::move(s));
    }
    return build_graph(sources);
}

}  // namespace

TEST_CASE("snake_case") {
    CHECK(snake_case("Widget") == "widget");
    CHECK(snake_case("EmailMessenger") == "email_messenger");
    CHECK(snake_case("SMSMessenger") == "sms_messenger");
    CHECK(snake_case("HTTPServer2") == "http_server2");
}

TEST_CASE("splitting the widget reproduces the reference interface and implementation") {
    const ScaffoldPlan plan = plan_for(kMonolith, "Widget");
    CHECK(plan.interface_path == "widget.py");
    CHECK(plan.impl_path == "impl/_widget.py");
    CHECK(plan.impl_module == "impl._widget");
    CHECK(plan.impl_class_name == "_WidgetImpl");
    CHECK(plan.moved_state == std::vector<std::string>{"_state", "_config"});
    const auto files = render_scaffold(plan);
    REQUIRE(files.size() == 2);
    CHECK(normalized(files[0].text) == normalized(testing::read_text(testing::fixture("widget_app/widget.py"))));
    CHECK(normalized(files[1].text) ==
          normalized(testing::read_text(testing::fixture("widget_app/impl/_widget.py"))));
}

TEST_CASE("rendering is a pure function of the plan") {
    const ScaffoldPlan plan = plan_for(kMonolith, "Widget");
    const auto a = render_scaffold(plan);
    const auto b = render_scaffold(plan_for(kMonolith, "Widget"));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].text == b[i].text);
}

TEST_CASE("the split output is a clean PIMPL") {
    auto files = render_scaffold(plan_for(kMonolith, "Widget"));
    for (auto& f : package_init_files(plan_for(kMonolith, "Widget"))) files.push_back(f);
    const ModuleGraph g = graph_of(files);
    CHECK(g.diagnostics.empty());
    const auto reports = detect_all(g, extract_surface(g));
    bool found = false;
    for (const auto& d : reports) {
        for (const auto& c : d.classes) {
            if (c.class_name != "Widget") continue;
            found = true;
            CHECK(c.coverage() == doctest::Approx(1.0));
        }
    }
    CHECK(found);
    CHECK(run_lint(g, LintConfig{}).diagnostics.empty());
}

TEST_CASE("private helpers stay in the implementation") {
    const std::string src =
        "class Report:\n"
        "    \"\"\"Summaries.\"\"\"\n"
        "    unit = 'kg'\n"
        "\n"
        "    def __init__(self, data, *, scale=1):\n"
        "        self._data = data\n"
        "        self._scale = scale\n"
        "\n"
        "    def _fmt(self, v):\n"
        "        return str(v) + self.unit\n"
        "\n"
        "    def total(self, *extra, **opts):\n"
        "        \"\"\"Sum of the data.\"\"\"\n"
        "        return self._fmt(sum(self._data) * self._scale)\n";
    const ScaffoldPlan plan = plan_for(src, "Report");
    REQUIRE(plan.methods.size() == 2);
    CHECK_FALSE(plan.methods[0].is_public);
    CHECK(plan.methods[1].is_public);
    CHECK(plan.methods[1].has_docstring);
    CHECK(plan.class_body_texts.size() == 1);
    const auto files = render_scaffold(plan);
    const std::string& iface = files[0].text;
    CHECK(iface.find("_fmt") == std::string::npos);
    CHECK(iface.find("def __init__(self, data, *, scale=1):") != std::string::npos);
    CHECK(iface.find("self._impl = _ReportImpl(data, scale=scale)") != std::string::npos);
    CHECK(iface.find("return self._impl.total(*extra, **opts)") != std::string::npos);
    CHECK(iface.find("\"\"\"Sum of the data.\"\"\"") != std::string::npos);
    const std::string& impl = files[1].text;
    CHECK(impl.find("    unit = 'kg'\n") != std::string::npos);
    CHECK(impl.find("    def _fmt(self, v):\n        return str(v) + self.unit\n") != std::string::npos);
    // both outputs must parse back cleanly
    CHECK(parse_text(iface).diagnostics.empty());
    CHECK(parse_text(impl).diagnostics.empty());
}

TEST_CASE("tab-indented and two-space sources are normalized to four spaces") {
    const std::string src = "class T:\n\tdef go(self):\n\t\tif self:\n\t\t\treturn 1\n\t\treturn 2\n";
    const auto files = render_scaffold(plan_for(src, "T"));
    CHECK(files[1].text.find("    def go(self):\n        if self:\n            return 1\n        return 2\n") !=
          std::string::npos);
    const std::string two = "class T:\n  def go(self):\n    x = '''a\n  b'''\n    return x\n";
    const auto f2 = render_scaffold(plan_for(two, "T"));
    // continuation lines of a multi-line string are copied verbatim
    CHECK(f2[1].text.find("        x = '''a\n  b'''\n        return x\n") != std::string::npos);
}

TEST_CASE("deferred import variant") {
    ScaffoldOptions o;
    o.defer_import = true;
    const auto files = render_scaffold(plan_for(kMonolith, "Widget", o));
    const std::string& iface = files[0].text;
    CHECK(iface.find("\nimport impl._widget") == std::string::npos);
    CHECK(iface.find("        import impl._widget as _widget\n        self._impl = _widget._WidgetImpl(config)") !=
          std::string::npos);
    const ModuleGraph g = graph_of(files);
    for (const auto& e : g.edges) CHECK(e.kind == EdgeKind::Deferred);
}

TEST_CASE("custom implementation names") {
    ScaffoldOptions o;
    o.impl_dir = "_private";
    o.impl_class_name = "WidgetCore";
    CHECK_THROWS_AS(plan_for(kMonolith, "Widget", o), ScaffoldError);
    o.impl_class_name = "_WidgetCore";
    const ScaffoldPlan plan = plan_for(kMonolith, "Widget", o);
    CHECK(plan.impl_path == "_private/_widget.py");
    CHECK(plan.impl_module == "_private._widget");
    CHECK(render_scaffold(plan)[1].text.find("class _WidgetCore:") != std::string::npos);
}

TEST_CASE("refusals") {
    CHECK(refusal(kMonolith, "Missing").find("not found") != std::string::npos);
    CHECK_FALSE(refusal(testing::read_text(testing::fixture("widget_app/widget.py")), "Widget").empty());
    CHECK_FALSE(refusal("class A(Base):\n    def f(self):\n        return 1\n", "A").empty());
    CHECK_FALSE(refusal("@dataclass\nclass A:\n    def f(self):\n        return 1\n", "A").empty());
    CHECK_FALSE(refusal("class A:\n    @property\n    def f(self):\n        return 1\n", "A").empty());
    CHECK_FALSE(refusal("class A:\n    def f(self):\n        for x in y:\n            pass\n", "A").empty());
    CHECK_FALSE(refusal("LIMIT = 3\nclass A:\n    def f(self):\n        return LIMIT\n", "A").empty());
    CHECK_FALSE(refusal("class A:\n    def _f(self):\n        return 1\n", "A").empty());
    CHECK_FALSE(refusal("class A:\n    def f():\n        return 1\n", "A").empty());
    CHECK_FALSE(refusal("class A:\n    if x:\n        y = 1\n    def f(self):\n        return 1\n", "A").empty());
    // builtins are not module globals
    CHECK(refusal("class A:\n    def f(self, v):\n        return len(str(v))\n", "A").empty());
}

TEST_CASE("factory rendering") {
    const std::vector<FactoryBackend> backends = {{"email", "EmailMessenger", ""}, {"sms", "SMSMessenger", ""}};
    const std::vector<MethodPlan> methods = {MethodPlan{"send_message", {{"to", "", ""}, {"body", "", ""}}, false, true, "", ""}};
    const RenderedFile f = render_factory("Messenger", backends, methods);
    CHECK(f.path == "messenger.py");
    const ParsedModule m = parse_text(f.text, "messenger", f.path);
    CHECK(m.diagnostics.empty());
    const Node* cls = nullptr;
    for (const auto& s : m.root.body) {
        if (s.is(NodeKind::ClassDef)) cls = &s;
    }
    REQUIRE(cls != nullptr);
    const auto factories = detect_factory(*cls);
    REQUIRE(factories.size() == 1);
    const std::vector<std::pair<std::string, std::string>> expected = {{"email", "EmailMessenger"},
                                                                       {"sms", "SMSMessenger"}};
    CHECK(factories[0].branches == expected);
    CHECK(factories[0].fallback == Fallback::Raise);
    CHECK(factories[0].parameter == "messenger_type");
    const auto report = detect_class_pimpl(*cls);
    REQUIRE(report.has_value());
    CHECK(report->guarded.size() == 1);
    CHECK(f.text.find("import impl._email_messenger as _email_messenger") != std::string::npos);

    CHECK_THROWS_AS(render_factory("M", {{"a", "A", ""}}), ScaffoldError);
    CHECK_THROWS_AS(render_factory("M", {{"a", "A", ""}, {"a", "B", ""}}), ScaffoldError);
    CHECK_THROWS_AS(render_factory("M", {{"A", "A", ""}, {"b", "B", ""}}), ScaffoldError);
}

TEST_CASE("lazy namespace rendering round-trips through the recognizer") {
    const std::vector<LazyEntry> entries = {{"array", "._core", "array"}, {"read_image", "._io", "read_image"}};
    const RenderedFile f = render_lazy_init(entries);
    CHECK(f.path == "__init__.py");
    const ParsedModule m = parse_text(f.text, "mylib", f.path);
    const auto branches = detect_lazy_namespace(m.root);
    REQUIRE(branches.has_value());
    REQUIRE(branches->size() == 2);
    CHECK((*branches)[1].public_name == "read_image");
    CHECK((*branches)[1].source_module == "._io");
    const auto exports = exported_names(m);
    CHECK(exports.provenance == ExportProvenance::Curated);
    CHECK(exports.names.size() == 2);
    // identical in structure to the hand-written namespace package
    CHECK(normalized(f.text) == normalized(testing::read_text(testing::fixture("mylib/__init__.py"))));
}

TEST_CASE("write_files refuses collisions before writing anything") {
    testing::TempDir tmp;
    testing::write_tree(tmp.path(), {{"impl/_widget.py", "keep\n"}});
    const auto files = render_scaffold(plan_for(kMonolith, "Widget"));
    CHECK_THROWS_AS(write_files(files, tmp.path(), false), ScaffoldError);
    CHECK_FALSE(std::filesystem::exists(tmp.path() / "widget.py"));
    CHECK(testing::read_text((tmp.path() / "impl/_widget.py").string()) == "keep\n");
    const auto written = write_files(files, tmp.path(), true);
    CHECK(written == std::vector<std::string>{"widget.py", "impl/_widget.py"});
    CHECK(testing::read_text((tmp.path() / "impl/_widget.py").string()) == files[1].text);
}
