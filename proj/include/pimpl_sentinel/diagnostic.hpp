#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

/// Byte offsets into the source text plus 1-based line/column positions.
/// Columns count bytes, not code points.
struct Span {
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    int start_line = 1;
    int start_col = 1;
    int end_line = 1;
    int end_col = 1;

    bool contains(const Span& other) const {
        return start_offset <= other.start_offset && other.end_offset <= end_offset;
    }

    friend bool operator==(const Span&, const Span&) = default;
};

/// Smallest span covering both arguments.
Span merge(const Span& a, const Span& b);

struct SourceFile {
    std::string path;       // package-relative, '/' separated
    std::string text;
    std::string module_id;  // dotted, e.g. "mylib._core"
    bool is_package = false;  // true for an __init__.py file
};

enum class Severity { Error, Warning, Info };

std::string_view to_string(Severity severity);
std::optional<Severity> severity_from_string(std::string_view text);

/// A finding from any stage. Rule codes are R001-R007; parse and analysis
/// issues use P-codes (see `codes` below).
struct Diagnostic {
    std::string code;
    Severity severity = Severity::Warning;
    std::string module;
    std::string path;
    Span span;
    std::string message;
    std::optional<std::string> suggestion;
    std::string fingerprint;
};

/// FNV-1a over (code, module, line:col-end_line:end_col, message), 16 hex digits.
std::string compute_fingerprint(const Diagnostic& diag);

/// Fills fingerprints and sorts by (module, span.start, code, message).
void finalize(std::vector<Diagnostic>& diags);

namespace codes {
inline constexpr const char* kIndentation = "P001";
inline constexpr const char* kUnterminatedString = "P002";
inline constexpr const char* kUnsupported = "P003";
inline constexpr const char* kEncoding = "P004";
inline constexpr const char* kFileTooLarge = "P005";
inline constexpr const char* kUnreadable = "P006";
inline constexpr const char* kNotAPackage = "P007";
inline constexpr const char* kRelativeBeyondTop = "P008";
inline constexpr const char* kUndecidableAll = "P009";
inline constexpr const char* kOpaqueLazy = "P010";
inline constexpr const char* kLazyConflict = "P011";
inline constexpr const char* kUnresolvedOrigin = "P012";
inline constexpr const char* kMalformedMarker = "P013";
}  // namespace codes

/// Default severity for a P-code.
Severity default_severity(std::string_view code);

Diagnostic make_diagnostic(std::string code, const SourceFile& file, const Span& span,
                           std::string message);

}  // namespace sentinel
