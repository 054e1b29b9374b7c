#include "pimpl_sentinel/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

namespace sentinel {

std::string_view to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::Name:
            return "NAME";
        case TokenKind::Keyword:
            return "KEYWORD";
        case TokenKind::Number:
            return "NUMBER";
        case TokenKind::String:
            return "STRING";
        case TokenKind::Op:
            return "OP";
        case TokenKind::Newline:
            return "NEWLINE";
        case TokenKind::Indent:
            return "INDENT";
        case TokenKind::Dedent:
            return "DEDENT";
        case TokenKind::EndMarker:
            return "ENDMARKER";
        case TokenKind::Error:
            return "ERRORTOKEN";
    }
    return "ERRORTOKEN";
}

LineIndex::LineIndex(std::string_view text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            starts_.push_back(i + 1);
        } else if (text[i] == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            starts_.push_back(i + 1);
        }
    }
}

int LineIndex::line_of(std::size_t offset) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    return static_cast<int>(it - starts_.begin());
}

int LineIndex::col_of(std::size_t offset) const {
    const int line = line_of(offset);
    return static_cast<int>(offset - starts_[static_cast<std::size_t>(line - 1)]) + 1;
}

Span LineIndex::span(std::size_t start, std::size_t end) const {
    Span s;
    s.start_offset = start;
    s.end_offset = end;
    s.start_line = line_of(start);
    s.start_col = col_of(start);
    s.end_line = line_of(end);
    s.end_col = col_of(end);
    return s;
}

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

constexpr std::array<std::string_view, 4> kOps3 = {"**=", "//=", ">>=", "<<="};
constexpr std::array<std::string_view, 19> kOps2 = {"**", "//", ">>", "<<", "<=", ">=", "==",
                                                    "!=", "->", "+=", "-=", "*=", "/=", "%=",
                                                    "&=", "|=", "^=", "@=", ":="};
constexpr std::string_view kOps1 = "+-*/%&|^~<>()[]{},:.;@=";

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
    if (word.empty() || word.size() > 2) return false;
    std::string lower;
    for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower == "r" || lower == "b" || lower == "u" || lower == "f" || lower == "br" ||
           lower == "rb" || lower == "fr" || lower == "rf";
}

bool valid_utf8(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        if (c < 0x80) len = 1;
        else if ((c >> 5) == 0x6) len = 2;
        else if ((c >> 4) == 0xe) len = 3;
        else if ((c >> 3) == 0x1e) len = 4;
        else return false;
        if (i + len > text.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) >> 6) != 0x2) return false;
        }
        i += len;
    }
    return true;
}

class Lexer {
public:
    explicit Lexer(const SourceFile& source) : src_(source), text_(source.text), lines_(text_) {}

    LexResult run() {
        if (text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
        check_encoding();
        while (pos_ < text_.size()) {
            if (at_line_start_ && paren_depth_ == 0) {
                if (!handle_indentation()) continue;
            }
            scan_token();
        }
        finish();
        return std::move(out_);
    }

private:
    const SourceFile& src_;
    std::string_view text_;
    LineIndex lines_;
    std::size_t pos_ = 0;
    bool at_line_start_ = true;
    int paren_depth_ = 0;
    std::vector<int> indents_{0};
    std::vector<int> alt_indents_{0};
    std::vector<Comment> pending_;
    LexResult out_;

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void emit(TokenKind kind, std::size_t start, std::size_t end) {
        Token tok;
        tok.kind = kind;
        tok.lexeme = std::string(text_.substr(start, end - start));
        tok.span = lines_.span(start, end);
        tok.trivia = std::move(pending_);
        pending_.clear();
        out_.tokens.push_back(std::move(tok));
    }

    void report(const char* code, std::size_t start, std::size_t end, std::string message) {
        out_.diagnostics.push_back(make_diagnostic(code, src_, lines_.span(start, end), std::move(message)));
    }

    void check_encoding() {
        if (!valid_utf8(text_)) {
            report(codes::kEncoding, 0, 0, "source is not valid UTF-8");
        }
        static const std::regex coding(R"(^[ \t\f]*#.*?coding[:=][ \t]*([-\w.]+))");
        for (int line = 1; line <= 2 && static_cast<std::size_t>(line) <= lines_.line_count(); ++line) {
            const std::size_t start = lines_.line_start(line);
            std::size_t end = text_.find_first_of("\r\n", start);
            if (end == std::string_view::npos) end = text_.size();
            const std::string row(text_.substr(start, end - start));
            std::smatch m;
            if (std::regex_search(row, m, coding)) {
                std::string enc = m[1].str();
                std::transform(enc.begin(), enc.end(), enc.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                std::replace(enc.begin(), enc.end(), '_', '-');
                if (enc != "utf-8" && enc != "utf8" && enc.rfind("utf-8-", 0) != 0) {
                    report(codes::kEncoding, start, end, "unsupported source encoding '" + m[1].str() + "'");
                }
                break;
            }
            // only a comment line may precede the declaration
            if (row.find_first_not_of(" \t\f") != std::string::npos &&
                row[row.find_first_not_of(" \t\f")] != '#')
                break;
        }
    }

    std::size_t line_end(std::size_t from) const {
        const std::size_t end = text_.find_first_of("\r\n", from);
        return end == std::string_view::npos ? text_.size() : end;
    }

    std::size_t skip_newline(std::size_t at) const {
        if (at < text_.size() && text_[at] == '\r') {
            return at + 1 < text_.size() && text_[at + 1] == '\n' ? at + 2 : at + 1;
        }
        if (at < text_.size() && text_[at] == '\n') return at + 1;
        return at;
    }

    // Returns false when the whole line was blank/comment and has been consumed.
    bool handle_indentation() {
        const std::size_t line_begin = pos_;
        int col = 0;
        int alt = 0;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ' ') {
                ++col;
                ++alt;
            } else if (c == '\t') {
                col = (col / 8 + 1) * 8;
                ++alt;
            } else if (c == '\f') {
                col = alt = 0;
            } else {
                break;
            }
            ++pos_;
        }
        const char c = peek();
        if (c == '#' || c == '\n' || c == '\r' || pos_ >= text_.size()) {
            if (c == '#') {
                const std::size_t end = line_end(pos_);
                add_comment(pos_, end);
                pos_ = end;
            }
            pos_ = skip_newline(pos_);
            return false;
        }
        at_line_start_ = false;
        if (col == indents_.back()) {
            if (alt != alt_indents_.back()) inconsistent(line_begin);
        } else if (col > indents_.back()) {
            if (alt <= alt_indents_.back()) inconsistent(line_begin);
            indents_.push_back(col);
            alt_indents_.push_back(alt);
            emit(TokenKind::Indent, line_begin, pos_);
        } else {
            while (indents_.size() > 1 && indents_.back() > col) {
                indents_.pop_back();
                alt_indents_.pop_back();
                emit(TokenKind::Dedent, pos_, pos_);
            }
            if (indents_.back() != col) {
                report(codes::kIndentation, line_begin, pos_,
                       "unindent does not match any outer indentation level");
            } else if (alt != alt_indents_.back()) {
                inconsistent(line_begin);
            }
        }
        return true;
    }

    void inconsistent(std::size_t line_begin) {
        report(codes::kIndentation, line_begin, pos_, "inconsistent use of tabs and spaces in indentation");
    }

    void add_comment(std::size_t start, std::size_t end) {
        Comment c{std::string(text_.substr(start, end - start)), lines_.span(start, end)};
        out_.comments.push_back(c);
        pending_.push_back(std::move(c));
    }

    void scan_token() {
        const char c = peek();
        if (c == ' ' || c == '\t' || c == '\f') {
            ++pos_;
            return;
        }
        if (c == '#') {
            const std::size_t end = line_end(pos_);
            add_comment(pos_, end);
            pos_ = end;
            return;
        }
        if (c == '\\' && (peek(1) == '\n' || peek(1) == '\r')) {
            pos_ = skip_newline(pos_ + 1);
            return;
        }
        if (c == '\n' || c == '\r') {
            const std::size_t start = pos_;
            pos_ = skip_newline(pos_);
            if (paren_depth_ == 0) {
                emit(TokenKind::Newline, start, pos_);
                at_line_start_ = true;
            }
            return;
        }
        const auto uc = static_cast<unsigned char>(c);
        if (ident_start(uc)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && ident_char(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string_view word = text_.substr(start, pos_ - start);
            if (is_string_prefix(word) && (peek() == '"' || peek() == '\'')) {
                scan_string(start);
                return;
            }
            emit(is_keyword(word) ? TokenKind::Keyword : TokenKind::Name, start, pos_);
            return;
        }
        if (std::isdigit(uc) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            scan_number();
            return;
        }
        if (c == '"' || c == '\'') {
            scan_string(pos_);
            return;
        }
        scan_operator();
    }

    void scan_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
        };
        if (peek() == '0' && std::string_view("xXoObB").find(peek(1)) != std::string_view::npos &&
            peek(1) != '\0') {
            pos_ += 2;
            while (pos_ < text_.size() &&
                   (std::isxdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
        } else {
            digits();
            if (peek() == '.') {
                ++pos_;
                digits();
            }
            if ((peek() == 'e' || peek() == 'E') &&
                (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                 ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
                pos_ += 2;
                digits();
            }
            if (peek() == 'j' || peek() == 'J') ++pos_;
        }
        emit(TokenKind::Number, start, pos_);
    }

    void scan_string(std::size_t start) {
        const char quote = peek();
        const bool triple = peek(1) == quote && peek(2) == quote;
        pos_ += triple ? 3 : 1;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '\\') {
                pos_ = pos_ + 1 < text_.size() ? skip_newline_or_one(pos_ + 1) : pos_ + 1;
                continue;
            }
            if (!triple && (c == '\n' || c == '\r')) break;
            if (c == quote) {
                if (!triple) {
                    ++pos_;
                    emit(TokenKind::String, start, pos_);
                    return;
                }
                if (peek(1) == quote && peek(2) == quote) {
                    pos_ += 3;
                    emit(TokenKind::String, start, pos_);
                    return;
                }
            }
            ++pos_;
        }
        // Unterminated: report, mark the rest of the opening line as an error
        // token and resume on the next line.
        const std::size_t end = line_end(start);
        report(codes::kUnterminatedString, start, end,
               triple ? "unterminated triple-quoted string literal" : "unterminated string literal");
        pos_ = end;
        emit(TokenKind::Error, start, end);
    }

    std::size_t skip_newline_or_one(std::size_t at) const {
        const std::size_t next = skip_newline(at);
        return next == at ? at + 1 : next;
    }

    void scan_operator() {
        const std::size_t start = pos_;
        for (auto op : kOps3) {
            if (text_.substr(pos_, 3) == op) {
                pos_ += 3;
                emit(TokenKind::Op, start, pos_);
                return;
            }
        }
        if (text_.substr(pos_, 3) == "...") {
            pos_ += 3;
            emit(TokenKind::Op, start, pos_);
            return;
        }
        for (auto op : kOps2) {
            if (text_.substr(pos_, 2) == op) {
                pos_ += 2;
                emit(TokenKind::Op, start, pos_);
                return;
            }
        }
        const char c = peek();
        if (kOps1.find(c) != std::string_view::npos) {
            if (c == '(' || c == '[' || c == '{') ++paren_depth_;
            if ((c == ')' || c == ']' || c == '}') && paren_depth_ > 0) --paren_depth_;
            ++pos_;
            emit(TokenKind::Op, start, pos_);
            return;
        }
        // Unknown byte: consume a whole UTF-8 sequence as an error token.
        ++pos_;
        while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) >> 6) == 0x2) ++pos_;
        emit(TokenKind::Error, start, pos_);
    }

    void finish() {
        if (!out_.tokens.empty() && !at_line_start_) {
            emit(TokenKind::Newline, text_.size(), text_.size());
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit(TokenKind::Dedent, text_.size(), text_.size());
        }
        emit(TokenKind::EndMarker, text_.size(), text_.size());
    }
};

}  // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

bool is_identifier(std::string_view word) {
    if (word.empty() || !ident_start(static_cast<unsigned char>(word[0]))) return false;
    for (char c : word) {
        if (!ident_char(static_cast<unsigned char>(c))) return false;
    }
    return !is_keyword(word);
}

LexResult tokenize(const SourceFile& source) { return Lexer(source).run(); }

}  // namespace sentinel
