#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pimpl_sentinel/diagnostic.hpp"

namespace sentinel {

enum class TokenKind { Name, Keyword, Number, String, Op, Newline, Indent, Dedent, EndMarker, Error };

std::string_view to_string(TokenKind kind);

struct Comment {
    std::string text;  // includes the leading '#'
    Span span;
};

struct Token {
    TokenKind kind = TokenKind::Error;
    std::string lexeme;
    Span span;
    /// Comments seen since the previous token.
    std::vector<Comment> trivia;
};

struct LexResult {
    std::vector<Token> tokens;
    std::vector<Comment> comments;
    std::vector<Diagnostic> diagnostics;
};

/// Maps byte offsets to 1-based line/column pairs.
class LineIndex {
public:
    explicit LineIndex(std::string_view text);

    Span span(std::size_t start, std::size_t end) const;
    int line_of(std::size_t offset) const;
    int col_of(std::size_t offset) const;
    std::size_t line_count() const { return starts_.size(); }
    std::size_t line_start(int line) const { return starts_.at(static_cast<std::size_t>(line - 1)); }

private:
    std::vector<std::size_t> starts_;
};

bool is_keyword(std::string_view word);
bool is_identifier(std::string_view word);

/// Indentation becomes matched INDENT/DEDENT pairs; comments ride along as
/// trivia on the next token. Errors are reported and lexing resumes on the
/// following line.
LexResult tokenize(const SourceFile& source);

}  // namespace sentinel
