#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pimpl_sentinel/api_surface.hpp"
#include "pimpl_sentinel/detector.hpp"
#include "pimpl_sentinel/module_graph.hpp"

namespace sentinel {

inline const std::vector<std::string> kRuleCodes = {"R001", "R002", "R003", "R004", "R005", "R006", "R007"};

bool is_rule_code(const std::string& code);
Severity rule_severity(const std::string& code);

struct LintConfig {
    std::set<std::string> rules{kRuleCodes.begin(), kRuleCodes.end()};
    std::string impl_attr_pattern = kDefaultImplPattern;
    std::vector<std::string> heavy_modules;
    double delegation_threshold = 0.5;
    std::vector<std::string> public_roots;  // empty: every module is client-facing
    bool strict = false;                    // R001 covers every `_name` attribute
    std::string suppress_marker = "pimpl:";
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses a JSON config document. Unknown keys, unknown rule ids, wrong
/// types, out-of-range thresholds and invalid patterns throw ConfigError.
LintConfig parse_config(const std::string& json_text);
LintConfig load_config(const std::string& path);

/// Rule diagnostics R001-R007 for the enabled rules, finalized and sorted.
std::vector<Diagnostic> lint_package(const ModuleGraph& graph, const ApiSurface& surface,
                                     const std::vector<ModuleDetections>& reports, const LintConfig& config);

struct SuppressionResult {
    std::vector<Diagnostic> kept;
    std::size_t suppressed = 0;
    std::vector<Diagnostic> marker_diagnostics;  // P013 for malformed markers
};

/// Drops diagnostics whose start line carries `# <marker> allow(CODE[,CODE...])`.
SuppressionResult apply_suppressions(const std::vector<Diagnostic>& diagnostics, const ModuleGraph& graph,
                                     const std::string& marker = "pimpl:");

struct LintResult {
    std::vector<Diagnostic> diagnostics;
    std::size_t suppressed = 0;

    bool has_errors() const;
};

/// Full pipeline over an analyzed graph: analysis diagnostics, rules,
/// suppressions and final ordering.
LintResult run_lint(const ModuleGraph& graph, const LintConfig& config);

inline constexpr int kLintSchemaVersion = 1;

std::string lint_to_json(const LintResult& result);
std::string lint_to_text(const LintResult& result);

}  // namespace sentinel
