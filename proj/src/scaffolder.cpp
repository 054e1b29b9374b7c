#include "pimpl_sentinel/scaffolder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pimpl_sentinel/detector.hpp"
#include "pimpl_sentinel/lexer.hpp"
#include "pimpl_sentinel/visibility.hpp"

namespace sentinel {

namespace fs = std::filesystem;

std::string snake_case(std::string_view class_name) {
    const auto first = class_name.find_first_not_of('_');
    if (first == std::string_view::npos) return "";
    const std::string_view name = class_name.substr(first);
    std::string out;
    for (std::size_t i = 0; i < name.size(); ++i) {
        const char c = name[i];
        if (std::isupper(static_cast<unsigned char>(c)) && i > 0) {
            const char prev = name[i - 1];
            const bool next_lower = i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1]));
            if (std::islower(static_cast<unsigned char>(prev)) || std::isdigit(static_cast<unsigned char>(prev)) ||
                (std::isupper(static_cast<unsigned char>(prev)) && next_lower))
                out += '_';
        }
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::size_t leading_ws(const std::string& line) {
    const auto p = line.find_first_not_of(" \t");
    return p == std::string::npos ? line.size() : p;
}

// Re-indents the statement lines covered by `block` so its first line sits
// at `indent` spaces and every nested level adds four. Lines inside
// multi-line strings are copied untouched.
class Reindenter {
public:
    explicit Reindenter(const SourceFile& src) : lines_(split_lines(src.text)), tokens_(tokenize(src).tokens) {
        for (auto& l : lines_) {
            if (!l.empty() && l.back() == '\r') l.pop_back();
        }
    }

    std::string block(const Span& span, int indent) const {
        std::map<int, int> depth_of_line;
        std::set<int> verbatim;
        int depth = 0;
        bool line_start = true;
        bool started = false;
        for (const auto& t : tokens_) {
            if (t.span.start_offset < span.start_offset || t.span.start_offset >= span.end_offset) continue;
            // DEDENTs closing the previous statement share the offset of our first token
            const bool layout = t.kind == TokenKind::Indent || t.kind == TokenKind::Dedent;
            if (!started && layout) continue;
            started = true;
            switch (t.kind) {
                case TokenKind::Indent: ++depth; line_start = true; continue;
                case TokenKind::Dedent: --depth; line_start = true; continue;
                case TokenKind::Newline: line_start = true; continue;
                default: break;
            }
            if (line_start && !depth_of_line.count(t.span.start_line)) depth_of_line[t.span.start_line] = depth;
            line_start = false;
            if (t.kind == TokenKind::String) {
                for (int l = t.span.start_line + 1; l <= t.span.end_line; ++l) verbatim.insert(l);
            }
        }

        std::string out;
        long delta = 0;
        for (int l = span.start_line; l <= span.end_line && l <= static_cast<int>(lines_.size()); ++l) {
            const std::string& line = lines_[static_cast<std::size_t>(l - 1)];
            if (verbatim.count(l)) {
                out += line;
            } else if (auto it = depth_of_line.find(l); it != depth_of_line.end()) {
                const std::size_t old = leading_ws(line);
                const std::size_t now = static_cast<std::size_t>(indent + 4 * it->second);
                delta = static_cast<long>(now) - static_cast<long>(old);
                out += std::string(now, ' ') + line.substr(old);
            } else if (leading_ws(line) == line.size()) {
                // blank line
            } else if (delta >= 0) {
                out += std::string(static_cast<std::size_t>(delta), ' ') + line;
            } else {
                const std::size_t cut = std::min(leading_ws(line), static_cast<std::size_t>(-delta));
                out += line.substr(cut);
            }
            out += '\n';
        }
        // drop trailing blank lines
        while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') out.pop_back();
        return out;
    }

private:
    std::vector<std::string> lines_;
    std::vector<Token> tokens_;
};

std::string slice(const SourceFile& src, const Span& span) {
    return src.text.substr(span.start_offset, span.end_offset - span.start_offset);
}

std::vector<ParamPlan> plan_params(const SourceFile& src, const Node& fn) {
    std::vector<ParamPlan> out;
    const auto params = fn.parameters();
    for (std::size_t i = 1; i < params.size(); ++i) {
        const Node& p = *params[i];
        ParamPlan plan;
        plan.name = p.text;
        plan.star = p.op;
        if (!p.children.empty()) plan.default_text = slice(src, p.children.front().span);
        out.push_back(std::move(plan));
    }
    return out;
}

std::string signature(const std::vector<ParamPlan>& params) {
    std::string out = "self";
    for (const auto& p : params) {
        out += ", ";
        out += p.star == "/" ? "/" : p.star + p.name;
        if (!p.default_text.empty()) out += "=" + p.default_text;
    }
    return out;
}

std::string forward_args(const std::vector<ParamPlan>& params) {
    std::string out;
    bool keyword_only = false;
    auto add = [&](const std::string& a) {
        if (!out.empty()) out += ", ";
        out += a;
    };
    for (const auto& p : params) {
        if (p.star == "/") continue;
        if (p.star == "*") {
            keyword_only = true;
            if (!p.name.empty()) add("*" + p.name);
        } else if (p.star == "**") {
            add("**" + p.name);
        } else {
            add(keyword_only ? p.name + "=" + p.name : p.name);
        }
    }
    return out;
}

// Names bound inside a function: parameters, assignment targets, imports.
std::set<std::string> local_names(const Node& fn) {
    std::set<std::string> out;
    for (const Node* p : fn.parameters()) {
        if (!p->text.empty()) out.insert(p->text);
    }
    walk(fn, [&](const Node& n) {
        std::vector<std::string> names;
        if (n.is(NodeKind::Assign)) {
            for (const Node* t : n.assign_targets()) collect_target_names(*t, names);
        } else if (n.is(NodeKind::AugAssign)) {
            collect_target_names(n.children.front(), names);
        } else if (n.is(NodeKind::Import) || n.is(NodeKind::ImportFrom)) {
            for (const auto& a : n.aliases) names.push_back(a.bound_name());
        } else if (n.is(NodeKind::FunctionDef) && &n != &fn) {
            names.push_back(n.text);
        }
        out.insert(names.begin(), names.end());
    });
    return out;
}

void global_reads(const Node& scope, const std::set<std::string>& globals, const std::set<std::string>& locals,
                  std::set<std::string>& out) {
    walk(scope, [&](const Node& n) {
        if (n.is(NodeKind::NameRef) && globals.count(n.text) && !locals.count(n.text)) out.insert(n.text);
    });
}

std::string join(const std::set<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return out;
}

bool valid_dotted(const std::string& text, bool allow_leading_dots) {
    std::size_t i = 0;
    if (allow_leading_dots) {
        while (i < text.size() && text[i] == '.') ++i;
        if (i > 0 && i == text.size()) return true;
    }
    std::stringstream parts(text.substr(i));
    std::string part;
    bool any = false;
    while (std::getline(parts, part, '.')) {
        if (!is_identifier(part) || is_keyword(part)) return false;
        any = true;
    }
    return any && text.back() != '.';
}

bool valid_name(const std::string& name) { return is_identifier(name) && !is_keyword(name); }

}  // namespace

ScaffoldPlan plan_class_split(const ParsedModule& module, const std::string& class_name,
                              const ScaffoldOptions& options) {
    const Node* cls = nullptr;
    for (const auto& stmt : module.root.body) {
        if (stmt.is(NodeKind::ClassDef) && stmt.text == class_name) cls = &stmt;
    }
    if (cls == nullptr) throw ScaffoldError("class '" + class_name + "' not found at module level");
    if (auto existing = detect_class_pimpl(*cls)) {
        throw ScaffoldError("class '" + class_name + "' already delegates through self." + existing->impl_attr);
    }
    if (!cls->decorators().empty()) throw ScaffoldError("class '" + class_name + "' is decorated");
    if (cls->children.size() > cls->decorators().size())
        throw ScaffoldError("class '" + class_name + "' has base classes; only plain classes can be split");
    {
        std::set<std::string> unsupported;
        walk(*cls, [&](const Node& n) {
            if (n.is(NodeKind::Unsupported)) unsupported.insert(n.text);
        });
        if (!unsupported.empty())
            throw ScaffoldError("class '" + class_name + "' uses statements outside the supported subset: " +
                                join(unsupported));
    }

    const SourceFile& src = module.source;
    const Reindenter reindent(src);
    std::set<std::string> globals;
    for (const auto& b : top_level_bindings(module.root)) globals.insert(b.name);

    ScaffoldPlan plan;
    plan.source_module = src.module_id;
    plan.class_name = class_name;
    plan.defer_import = options.defer_import;
    const std::string snake = snake_case(class_name);
    if (snake.empty()) throw ScaffoldError("class name '" + class_name + "' has no usable characters");
    plan.impl_class_name =
        options.impl_class_name.empty() ? "_" + class_name.substr(class_name.find_first_not_of('_')) + "Impl"
                                        : options.impl_class_name;
    if (classify_name(plan.impl_class_name) != Visibility::Internal || !valid_name(plan.impl_class_name))
        throw ScaffoldError("implementation class name '" + plan.impl_class_name + "' must start with one underscore");
    if (!valid_dotted(options.impl_dir, false)) throw ScaffoldError("invalid implementation directory");
    plan.interface_path = snake + ".py";
    std::string impl_dir = options.impl_dir;
    std::replace(impl_dir.begin(), impl_dir.end(), '.', '/');
    plan.impl_path = impl_dir + "/_" + snake + ".py";
    plan.impl_module = options.impl_dir + "._" + snake;

    std::set<std::string> offending;
    std::set<std::string> state_seen;
    auto add_state = [&](const std::string& n) {
        if (state_seen.insert(n).second) plan.moved_state.push_back(n);
    };

    for (const auto& stmt : cls->body) {
        if (stmt.is(NodeKind::Docstring)) {
            plan.class_docstring_text = reindent.block(stmt.span, 4);
            continue;
        }
        if (stmt.is(NodeKind::Pass)) continue;
        if (stmt.is(NodeKind::Assign) || stmt.is(NodeKind::AugAssign)) {
            std::vector<std::string> names;
            if (stmt.is(NodeKind::Assign)) {
                for (const Node* t : stmt.assign_targets()) collect_target_names(*t, names);
            } else {
                collect_target_names(stmt.children.front(), names);
            }
            for (const auto& n : names) add_state(n);
            global_reads(stmt, globals, {}, offending);
            plan.class_body_texts.push_back(reindent.block(stmt.span, 4));
            continue;
        }
        if (!stmt.is(NodeKind::FunctionDef)) {
            throw ScaffoldError("class '" + class_name + "' contains a " + std::string(to_string(stmt.kind)) +
                                " statement in its body; only methods and attributes can be moved");
        }
        if (!stmt.decorators().empty())
            throw ScaffoldError("method '" + stmt.text + "' is decorated; decorated methods are not split");
        const auto params = stmt.parameters();
        if (params.empty() || !params.front()->op.empty() || !params.front()->children.empty())
            throw ScaffoldError("method '" + stmt.text + "' has no plain receiver parameter");
        const std::string self_name = params.front()->text;

        global_reads(stmt, globals, local_names(stmt), offending);
        walk(stmt, [&](const Node& n) {
            if (!n.is(NodeKind::Assign) && !n.is(NodeKind::AugAssign)) return;
            for (const auto& t : n.children) {
                if (t.is(NodeKind::Attribute) && t.children.front().is(NodeKind::NameRef) &&
                    t.children.front().text == self_name)
                    add_state(t.text);
            }
        });

        MethodPlan m;
        m.name = stmt.text;
        m.params = plan_params(src, stmt);
        const Visibility vis = classify_name(stmt.text);
        m.is_public = vis == Visibility::Public || (vis == Visibility::Dunder && stmt.text != "__init__");
        if (const Node* doc = stmt.docstring()) {
            m.has_docstring = true;
            m.docstring_text = reindent.block(doc->span, 8);
        }
        m.impl_text = reindent.block(stmt.span, 4);
        if (stmt.text == "__init__") {
            plan.init = std::move(m);
        } else {
            plan.methods.push_back(std::move(m));
        }
    }
    if (!offending.empty())
        throw ScaffoldError("class '" + class_name + "' reads module-level names that would not move: " +
                            join(offending));
    const bool any_public = std::any_of(plan.methods.begin(), plan.methods.end(), [](const MethodPlan& m) {
        return classify_name(m.name) == Visibility::Public;
    });
    if (!any_public) throw ScaffoldError("class '" + class_name + "' has no public methods to expose");
    return plan;
}

namespace {

std::string module_leaf(const std::string& dotted) {
    const auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

}  // namespace

std::vector<RenderedFile> render_scaffold(const ScaffoldPlan& plan) {
    const std::string alias = module_leaf(plan.impl_module);
    const std::string init_params = plan.init ? signature(plan.init->params) : "self";
    const std::string init_args = plan.init ? forward_args(plan.init->params) : "";

    std::ostringstream iface;
    iface << "\"\"\"" << module_leaf(plan.interface_path.substr(0, plan.interface_path.size() - 3))
          << ": public interface for " << plan.class_name << ".\"\"\"\n\n";
    if (!plan.defer_import) {
        iface << "import " << plan.impl_module << " as " << alias << "\n\n";
        iface << plan.impl_class_name << " = " << alias << "." << plan.impl_class_name << "\n";
        iface << "\n\n";
    } else {
        iface << "\n";
    }
    iface << "class " << plan.class_name << ":\n";
    if (!plan.class_docstring_text.empty()) iface << plan.class_docstring_text << "\n";
    iface << "    def __init__(" << init_params << "):\n";
    if (plan.init && plan.init->has_docstring) iface << plan.init->docstring_text;
    if (plan.defer_import) {
        iface << "        import " << plan.impl_module << " as " << alias << "\n";
        iface << "        self._impl = " << alias << "." << plan.impl_class_name << "(" << init_args << ")\n";
    } else {
        iface << "        self._impl = " << plan.impl_class_name << "(" << init_args << ")\n";
    }
    for (const auto& m : plan.methods) {
        if (!m.is_public) continue;
        iface << "\n    def " << m.name << "(" << signature(m.params) << "):\n";
        if (m.has_docstring) iface << m.docstring_text;
        iface << "        return self._impl." << m.name << "(" << forward_args(m.params) << ")\n";
    }

    std::ostringstream impl;
    impl << "\"\"\"" << plan.impl_module << ": private implementation of " << plan.class_name << ".\"\"\"\n\n\n";
    impl << "class " << plan.impl_class_name << ":\n";
    bool first = true;
    auto separate = [&] {
        if (!first) impl << "\n";
        first = false;
    };
    if (!plan.class_docstring_text.empty()) {
        impl << plan.class_docstring_text;
        first = false;
    }
    for (const auto& text : plan.class_body_texts) {
        separate();
        impl << text;
    }
    if (plan.init) {
        separate();
        impl << plan.init->impl_text;
    }
    for (const auto& m : plan.methods) {
        separate();
        impl << m.impl_text;
    }
    if (first) impl << "    pass\n";

    return {RenderedFile{plan.interface_path, iface.str()}, RenderedFile{plan.impl_path, impl.str()}};
}

std::vector<RenderedFile> package_init_files(const ScaffoldPlan& plan) {
    std::vector<RenderedFile> out;
    std::string dir;
    const auto slash = plan.impl_path.rfind('/');
    if (slash == std::string::npos) return out;
    std::stringstream parts(plan.impl_path.substr(0, slash));
    std::string part;
    while (std::getline(parts, part, '/')) {
        dir += (dir.empty() ? "" : "/") + part;
        out.push_back({dir + "/__init__.py", "\"\"\"Private implementation modules.\"\"\"\n"});
    }
    return out;
}

RenderedFile render_factory(const std::string& interface_name, const std::vector<FactoryBackend>& backends,
                            const std::vector<MethodPlan>& methods, const std::string& path) {
    if (!valid_name(interface_name)) throw ScaffoldError("invalid interface class name '" + interface_name + "'");
    if (backends.size() < 2) throw ScaffoldError("a factory needs at least two backends");
    std::set<std::string> literals;
    for (const auto& b : backends) {
        if (!literals.insert(b.literal).second) throw ScaffoldError("duplicate backend literal '" + b.literal + "'");
        if (b.literal.empty() || b.literal.find_first_of("\"\\\n") != std::string::npos)
            throw ScaffoldError("backend literal '" + b.literal + "' cannot be rendered");
        std::string lower = b.literal;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower != b.literal)
            throw ScaffoldError("backend literal '" + b.literal + "' must be lower case (it is compared after .lower())");
        if (!valid_name(b.class_name)) throw ScaffoldError("invalid backend class name '" + b.class_name + "'");
        if (!b.module.empty() && !valid_dotted(b.module, false))
            throw ScaffoldError("invalid backend module '" + b.module + "'");
    }
    for (const auto& m : methods) {
        if (m.name == "bind") throw ScaffoldError("method 'bind' would shadow the backend selector");
    }

    const std::string snake = snake_case(interface_name);
    const std::string param = snake + "_type";
    auto module_of = [](const FactoryBackend& b) { return b.module.empty() ? "impl._" + snake_case(b.class_name) : b.module; };
    // one import per backend module, in first-use order
    std::vector<std::string> modules;
    for (const auto& b : backends) {
        const std::string m = module_of(b);
        if (std::find(modules.begin(), modules.end(), m) == modules.end()) modules.push_back(m);
    }
    std::map<std::string, std::string> alias_of;
    std::set<std::string> used_aliases;
    for (const auto& m : modules) {
        std::string alias = module_leaf(m);
        if (alias.front() != '_') alias = "_" + alias;
        std::string candidate = alias;
        for (int n = 2; used_aliases.count(candidate); ++n) candidate = alias + std::to_string(n);
        used_aliases.insert(candidate);
        alias_of[m] = candidate;
    }

    std::ostringstream out;
    out << "\"\"\"" << snake << ": " << interface_name << " with runtime backend binding.\"\"\"\n\n";
    for (const auto& m : modules) out << "import " << m << " as " << alias_of[m] << "\n";
    out << "\n\nclass " << interface_name << ":\n";
    out << "    \"\"\"Delegates to the backend selected by bind().\"\"\"\n\n";
    out << "    _impl = None\n\n";
    out << "    def bind(self, " << param << "):\n";
    out << "        \"\"\"Bind the private implementation instance.\"\"\"\n";
    out << "        self._impl = None\n";
    for (std::size_t i = 0; i < backends.size(); ++i) {
        const auto& b = backends[i];
        out << "        " << (i == 0 ? "if " : "elif ") << param << ".lower() == \"" << b.literal << "\":\n";
        out << "            self._impl = " << alias_of[module_of(b)] << "." << b.class_name << "()\n";
    }
    out << "        else:\n";
    out << "            raise RuntimeError(\"unknown backend: \" + " << param << ")\n";
    for (const auto& m : methods) {
        if (!m.is_public) continue;
        out << "\n    def " << m.name << "(" << signature(m.params) << "):\n";
        if (m.has_docstring) out << m.docstring_text;
        out << "        if self._impl is None:\n";
        out << "            raise RuntimeError(\"bind() must be called first\")\n";
        out << "        return self._impl." << m.name << "(" << forward_args(m.params) << ")\n";
    }
    return RenderedFile{path.empty() ? snake + ".py" : path, out.str()};
}

RenderedFile render_lazy_init(const std::vector<LazyEntry>& entries, const std::string& path) {
    if (entries.empty()) throw ScaffoldError("a lazy namespace needs at least one entry");
    std::set<std::string> names;
    for (const auto& e : entries) {
        if (!valid_name(e.public_name)) throw ScaffoldError("invalid public name '" + e.public_name + "'");
        if (!names.insert(e.public_name).second) throw ScaffoldError("duplicate public name '" + e.public_name + "'");
        if (!valid_dotted(e.origin_module, true)) throw ScaffoldError("invalid origin module '" + e.origin_module + "'");
        if (!valid_name(e.origin_name)) throw ScaffoldError("invalid origin name '" + e.origin_name + "'");
    }
    std::ostringstream out;
    out << "\"\"\"Public namespace with lazily imported members.\"\"\"\n\n";
    out << "import importlib\n\n";
    out << "__all__ = [";
    for (std::size_t i = 0; i < entries.size(); ++i) out << (i ? ", " : "") << "\"" << entries[i].public_name << "\"";
    out << "]\n\n\n";
    out << "def __getattr__(name):\n";
    for (const auto& e : entries) {
        out << "    if name == \"" << e.public_name << "\":\n";
        out << "        from " << e.origin_module << " import " << e.origin_name << "\n";
        out << "        return " << e.origin_name << "\n";
    }
    out << "    raise AttributeError(name)\n";
    return RenderedFile{path, out.str()};
}

std::vector<std::string> write_files(const std::vector<RenderedFile>& files, const fs::path& out_dir, bool overwrite) {
    std::set<std::string> seen;
    for (const auto& f : files) {
        if (!seen.insert(f.path).second) throw ScaffoldError("two generated files share the path '" + f.path + "'");
        const fs::path target = out_dir / f.path;
        std::error_code ec;
        if (!overwrite && fs::exists(target, ec))
            throw ScaffoldError("refusing to overwrite existing file '" + target.generic_string() + "'");
    }
    std::vector<std::string> written;
    for (const auto& f : files) {
        const fs::path target = out_dir / f.path;
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw ScaffoldError("cannot create directory '" + target.parent_path().generic_string() + "'");
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        if (!out) throw ScaffoldError("cannot write '" + target.generic_string() + "'");
        out << f.text;
        written.push_back(f.path);
    }
    return written;
}

}  // namespace sentinel
