#include "pimpl_sentinel/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pimpl_sentinel/api_surface.hpp"
#include "pimpl_sentinel/detector.hpp"
#include "pimpl_sentinel/linter.hpp"
#include "pimpl_sentinel/module_graph.hpp"
#include "pimpl_sentinel/parser.hpp"
#include "pimpl_sentinel/scaffolder.hpp"

namespace sentinel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for failures that map to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path.generic_string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

SourceFile single_file(const fs::path& path) {
    SourceFile f;
    f.path = path.filename().generic_string();
    f.text = read_file(path);
    f.module_id = path.stem().string();
    return f;
}

// A directory tree, or a single .py file analyzed as a lone module.
ModuleGraph load_graph(const std::string& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) return analyze_directory(path);
    if (fs::is_regular_file(path, ec) && fs::path(path).extension() == ".py")
        return build_graph({single_file(path)});
    throw UsageError("'" + path + "' is neither a directory nor a .py file");
}

ApiSurface load_surface(const std::string& path) {
    std::error_code ec;
    if (fs::is_regular_file(path, ec) && fs::path(path).extension() == ".json") {
        try {
            return surface_from_json(read_file(path));
        } catch (const std::runtime_error& e) {
            throw UsageError(path + ": " + e.what());
        }
    }
    return extract_surface(load_graph(path));
}

std::pair<std::string, std::string> split_once(const std::string& text, char sep, const std::string& what) {
    const auto pos = text.find(sep);
    if (pos == std::string::npos || pos == 0 || pos + 1 == text.size())
        throw UsageError("malformed " + what + " '" + text + "'");
    return {text.substr(0, pos), text.substr(pos + 1)};
}

std::string graph_text(const ModuleGraph& graph) {
    std::ostringstream out;
    for (const auto& e : graph.edges) {
        out << e.from.str() << " -> " << e.to.str() << "  [" << to_string(e.kind) << (e.external ? ", external" : "")
            << "] line " << e.span.start_line << "\n";
    }
    return out.str();
}

std::string cycles_text(const std::vector<Cycle>& cycles) {
    std::ostringstream out;
    for (const auto& c : cycles) {
        for (const auto& m : c) out << m.str() << " -> ";
        out << c.front().str() << "\n";
    }
    if (cycles.empty()) out << "no cycles\n";
    return out.str();
}

std::string graph_json(const ModuleGraph& graph, const std::vector<Cycle>& cycles, bool edges) {
    json doc = {{"version", 1}};
    json modules = json::array();
    for (const auto& [id, mod] : graph.modules) modules.push_back({{"module", id.str()}, {"path", mod.source.path}});
    doc["modules"] = modules;
    if (edges) {
        json arr = json::array();
        for (const auto& e : graph.edges) {
            arr.push_back({{"from", e.from.str()},
                           {"to", e.to.str()},
                           {"kind", to_string(e.kind)},
                           {"external", e.external},
                           {"names", e.names},
                           {"line", e.span.start_line}});
        }
        doc["edges"] = arr;
    }
    json cyc = json::array();
    for (const auto& c : cycles) {
        json members = json::array();
        for (const auto& m : c) members.push_back(m.str());
        cyc.push_back(members);
    }
    doc["cycles"] = cyc;
    return doc.dump(2) + "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Boundary checks and PIMPL scaffolding for Python packages", "pimpl-sentinel"};
    app.set_version_flag("--version", std::string("pimpl-sentinel ") + kToolVersion + " (surface schema " +
                                          std::to_string(kSurfaceSchemaVersion) + ", lint schema " +
                                          std::to_string(kLintSchemaVersion) + ")");
    app.require_subcommand(1);

    std::string path;
    std::string format = "text";
    std::string config_path;
    std::vector<std::string> enable, disable;
    auto* lint = app.add_subcommand("lint", "check boundary rules R001-R007");
    lint->add_option("PATH", path, "package directory or .py file")->required();
    lint->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    lint->add_option("--config", config_path, "JSON config file");
    lint->add_option("--enable", enable, "enable a rule (repeatable)")->allow_extra_args(false);
    lint->add_option("--disable", disable, "disable a rule (repeatable)")->allow_extra_args(false);

    bool as_json = false, as_text = false;
    auto* surface = app.add_subcommand("surface", "print the public API surface");
    surface->add_option("PATH", path, "package directory or .py file")->required();
    auto* surface_json = surface->add_flag("--json", as_json, "JSON output");
    surface->add_flag("--text", as_text, "text output (default)")->excludes(surface_json);

    std::string old_path, new_path;
    bool strict = false;
    auto* diff = app.add_subcommand("diff", "compare two API surfaces");
    diff->add_option("OLD", old_path, "surface JSON or package directory")->required();
    diff->add_option("NEW", new_path, "surface JSON or package directory")->required();
    diff->add_flag("--json", as_json, "JSON output");
    diff->add_flag("--strict", strict, "treat moved origins as breaking");

    std::string impl_pattern = kDefaultImplPattern;
    auto* detect = app.add_subcommand("detect", "report PIMPL, wrapper-module and factory shapes");
    detect->add_option("PATH", path, "package directory or .py file")->required();
    detect->add_flag("--json", as_json, "JSON output");
    detect->add_option("--impl-pattern", impl_pattern, "regex for implementation attribute names");

    std::string class_name, out_dir;
    std::vector<std::string> factories, lazies;
    bool defer_import = false, overwrite = false;
    auto* scaffold = app.add_subcommand("scaffold", "split a class into interface and implementation modules");
    scaffold->add_option("PATH", path, "source .py file")->required();
    scaffold->add_option("CLASS", class_name, "class to split")->required();
    scaffold->add_option("--out", out_dir, "output directory")->required();
    scaffold->add_option("--factory", factories, "LIT=Backend or LIT=module:Backend (repeatable)")->allow_extra_args(false);
    scaffold->add_option("--lazy", lazies, "NAME=MODULE:ATTR (repeatable)")->allow_extra_args(false);
    scaffold->add_flag("--defer-import", defer_import, "import the implementation inside __init__");
    scaffold->add_flag("--overwrite", overwrite, "replace existing files");

    bool cycles_only = false, include_deferred = false;
    auto* graph_cmd = app.add_subcommand("graph", "print the import graph");
    graph_cmd->add_option("PATH", path, "package directory or .py file")->required();
    graph_cmd->add_flag("--json", as_json, "JSON output");
    graph_cmd->add_flag("--cycles", cycles_only, "print cycles only");
    graph_cmd->add_flag("--include-deferred", include_deferred, "count deferred and conditional imports");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (lint->parsed()) {
            LintConfig config = config_path.empty() ? LintConfig{} : load_config(config_path);
            for (const auto& code : enable) {
                if (!is_rule_code(code)) throw UsageError("unknown rule id '" + code + "'");
                if (std::find(disable.begin(), disable.end(), code) != disable.end())
                    throw UsageError("rule " + code + " is both enabled and disabled");
                config.rules.insert(code);
            }
            for (const auto& code : disable) {
                if (!is_rule_code(code)) throw UsageError("unknown rule id '" + code + "'");
                config.rules.erase(code);
            }
            const LintResult result = run_lint(load_graph(path), config);
            out << (format == "json" ? lint_to_json(result) : lint_to_text(result));
            return result.has_errors() ? 1 : 0;
        }
        if (surface->parsed()) {
            const ApiSurface s = extract_surface(load_graph(path));
            out << (as_json ? surface_to_json(s) : surface_to_text(s));
            return 0;
        }
        if (diff->parsed()) {
            const SurfaceDiff d = diff_surfaces(load_surface(old_path), load_surface(new_path));
            out << (as_json ? diff_to_json(d) : diff_to_text(d));
            return d.breaking() || (strict && !d.origin_moved.empty()) ? 1 : 0;
        }
        if (detect->parsed()) {
            const ModuleGraph g = load_graph(path);
            std::vector<ModuleDetections> reports;
            try {
                reports = detect_all(g, extract_surface(g), impl_pattern);
            } catch (const std::regex_error&) {
                throw UsageError("invalid --impl-pattern '" + impl_pattern + "'");
            }
            out << (as_json ? detections_to_json(reports) : detections_to_text(reports));
            return 0;
        }
        if (scaffold->parsed()) {
            std::error_code ec;
            if (!fs::is_regular_file(path, ec)) throw UsageError("'" + path + "' is not a file");
            const ParsedModule module = parse_module(single_file(path));
            ScaffoldOptions options;
            options.defer_import = defer_import;
            const ScaffoldPlan plan = plan_class_split(module, class_name, options);
            std::vector<RenderedFile> files = render_scaffold(plan);
            if (!factories.empty()) {
                std::vector<FactoryBackend> backends;
                for (const auto& arg : factories) {
                    auto [literal, target] = split_once(arg, '=', "--factory value");
                    FactoryBackend b;
                    b.literal = literal;
                    if (const auto colon = target.find(':'); colon != std::string::npos) {
                        b.module = target.substr(0, colon);
                        b.class_name = target.substr(colon + 1);
                    } else {
                        b.class_name = target;
                    }
                    backends.push_back(std::move(b));
                }
                files.front() = render_factory(plan.class_name, backends, plan.methods, plan.interface_path);
            }
            if (!lazies.empty()) {
                std::vector<LazyEntry> entries;
                for (const auto& arg : lazies) {
                    auto [name, origin] = split_once(arg, '=', "--lazy value");
                    auto [module_name, attr] = split_once(origin, ':', "--lazy origin");
                    entries.push_back({name, module_name, attr});
                }
                files.push_back(render_lazy_init(entries));
            }
            for (auto& f : package_init_files(plan)) {
                std::error_code exists_ec;
                if (!fs::exists(fs::path(out_dir) / f.path, exists_ec)) files.push_back(std::move(f));
            }
            const auto written = write_files(files, out_dir, overwrite);
            json manifest = {{"version", 1}, {"out", out_dir}, {"files", written}};
            out << manifest.dump(2) << "\n";
            return 0;
        }
        if (graph_cmd->parsed()) {
            const ModuleGraph g = load_graph(path);
            const auto cycles = find_cycles(g, include_deferred);
            if (as_json) {
                out << graph_json(g, cycles, !cycles_only);
            } else {
                out << (cycles_only ? cycles_text(cycles) : graph_text(g));
            }
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ScaffoldError& e) {
        err << "scaffold refused: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace sentinel
