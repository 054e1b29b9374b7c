#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pimpl_sentinel/cli.hpp"
#include "pimpl_sentinel/module_graph.hpp"

namespace testing {

namespace fs = std::filesystem;

inline std::string fixture(const std::string& rel) { return std::string(FIXTURE_DIR) + "/" + rel; }

inline std::string oracle(const std::string& rel) { return std::string(FIXTURE_DIR) + "/../oracles/" + rel; }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::vector<std::vector<std::string>> read_tsv(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_text(path));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            cells.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        for (int attempt = 0; attempt < 100; ++attempt) {
            path_ = fs::temp_directory_path() / ("pimpl_sentinel_test_" + std::to_string(rd()));
            if (fs::create_directory(path_)) return;
        }
        throw std::runtime_error("cannot create temp directory");
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    fs::path path_;
};

inline void write_tree(const fs::path& root, const std::map<std::string, std::string>& files) {
    for (const auto& [rel, text] : files) {
        const fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << text;
    }
}

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = sentinel::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

/// In-memory modules for graph tests: {module id -> source}; ids ending in
/// ".__init__" are not used, pass is_package through `packages`.
inline std::vector<sentinel::SourceFile> sources(const std::map<std::string, std::string>& modules,
                                                 const std::vector<std::string>& packages = {}) {
    std::vector<sentinel::SourceFile> out;
    for (const auto& [id, text] : modules) {
        sentinel::SourceFile f;
        f.module_id = id;
        f.text = text;
        f.is_package = std::find(packages.begin(), packages.end(), id) != packages.end();
        std::string path = id;
        std::replace(path.begin(), path.end(), '.', '/');
        f.path = f.is_package ? path + "/__init__.py" : path + ".py";
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace testing
