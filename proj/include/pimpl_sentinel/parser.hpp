#pragma once

#include <string>

#include "pimpl_sentinel/syntax.hpp"

namespace sentinel {

/// Parses the supported Python subset. Never fails: statements outside the
/// subset (or malformed ones) become Unsupported nodes with a P003
/// diagnostic and parsing resumes at the next statement.
ParsedModule parse_module(const SourceFile& source);

/// Convenience for tests and tools working on in-memory text.
ParsedModule parse_text(std::string text, std::string module_id = "main",
                        std::string path = "main.py");

/// Decodes the body of a single string literal token (prefix and quotes included).
std::string decode_string_literal(std::string_view lexeme);

}  // namespace sentinel
