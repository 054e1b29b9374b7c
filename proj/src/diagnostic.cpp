#include "pimpl_sentinel/diagnostic.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <tuple>

namespace sentinel {

Span merge(const Span& a, const Span& b) {
    Span out = a;
    if (b.start_offset < a.start_offset) {
        out.start_offset = b.start_offset;
        out.start_line = b.start_line;
        out.start_col = b.start_col;
    }
    if (b.end_offset > a.end_offset) {
        out.end_offset = b.end_offset;
        out.end_line = b.end_line;
        out.end_col = b.end_col;
    }
    return out;
}

std::string_view to_string(Severity severity) {
    switch (severity) {
        case Severity::Error:
            return "error";
        case Severity::Warning:
            return "warning";
        case Severity::Info:
            return "info";
    }
    return "info";
}

std::optional<Severity> severity_from_string(std::string_view text) {
    if (text == "error") return Severity::Error;
    if (text == "warning") return Severity::Warning;
    if (text == "info") return Severity::Info;
    return std::nullopt;
}

Severity default_severity(std::string_view code) {
    if (code == codes::kIndentation || code == codes::kUnterminatedString) return Severity::Error;
    if (code == codes::kUnsupported || code == codes::kUndecidableAll ||
        code == codes::kOpaqueLazy || code == codes::kUnresolvedOrigin ||
        code == codes::kMalformedMarker)
        return Severity::Info;
    return Severity::Warning;
}

Diagnostic make_diagnostic(std::string code, const SourceFile& file, const Span& span,
                           std::string message) {
    Diagnostic d;
    d.severity = default_severity(code);
    d.code = std::move(code);
    d.module = file.module_id;
    d.path = file.path;
    d.span = span;
    d.message = std::move(message);
    return d;
}

namespace {

void fnv_feed(std::uint64_t& h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    // field separator so ("ab","c") and ("a","bc") differ
    h ^= 0xff;
    h *= 1099511628211ULL;
}

}  // namespace

std::string compute_fingerprint(const Diagnostic& diag) {
    std::uint64_t h = 14695981039346656037ULL;
    fnv_feed(h, diag.code);
    fnv_feed(h, diag.module);
    const std::string span = std::to_string(diag.span.start_line) + ":" +
                             std::to_string(diag.span.start_col) + "-" +
                             std::to_string(diag.span.end_line) + ":" +
                             std::to_string(diag.span.end_col);
    fnv_feed(h, span);
    fnv_feed(h, diag.message);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void finalize(std::vector<Diagnostic>& diags) {
    for (auto& d : diags) d.fingerprint = compute_fingerprint(d);
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.module, a.span.start_offset, a.code, a.message, a.path) <
               std::tie(b.module, b.span.start_offset, b.code, b.message, b.path);
    });
}

}  // namespace sentinel
