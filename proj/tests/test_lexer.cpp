#include <doctest.h>

#include "pimpl_sentinel/lexer.hpp"
#include "support.hpp"

using namespace sentinel;

namespace {

SourceFile file_of(std::string text) {
    SourceFile f;
    f.path = "t.py";
    f.module_id = "t";
    f.text = std::move(text);
    return f;
}

std::vector<std::string> kinds(const LexResult& r) {
    std::vector<std::string> out;
    for (const auto& t : r.tokens) {
        // the interpreter reports keywords as NAME tokens
        out.emplace_back(t.kind == TokenKind::Keyword ? "NAME" : std::string(to_string(t.kind)));
    }
    return out;
}

bool has_code(const LexResult& r, const std::string& code) {
    for (const auto& d : r.diagnostics) {
        if (d.code == code) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("token kinds of the mixed-indentation fixture match the interpreter's tokenizer") {
    const auto expected_lines = testing::split_words(testing::read_text(testing::oracle("mixed_ok.tokens")));
    // the oracle file ends with "compile: ok"
    std::vector<std::string> expected(expected_lines.begin(), expected_lines.end() - 2);
    const LexResult r = tokenize(file_of(testing::read_text(testing::fixture("tokens/mixed_ok.py"))));
    CHECK(r.diagnostics.empty());
    CHECK(kinds(r) == expected);
}

TEST_CASE("indentation the interpreter rejects with TabError is reported as P001") {
    const auto oracle = testing::read_text(testing::oracle("mixed_bad.tokens"));
    REQUIRE(oracle.find("compile: TabError") != std::string::npos);
    const LexResult r = tokenize(file_of(testing::read_text(testing::fixture("tokens/mixed_bad.py"))));
    CHECK(has_code(r, "P001"));
}

TEST_CASE("empty input yields only the end marker") {
    const LexResult r = tokenize(file_of(""));
    REQUIRE(r.tokens.size() == 1);
    CHECK(r.tokens[0].kind == TokenKind::EndMarker);
}

TEST_CASE("missing final newline still produces NEWLINE and DEDENTs") {
    const LexResult r = tokenize(file_of("if x:\n    y = 1"));
    const auto k = kinds(r);
    const std::vector<std::string> expected = {"NAME", "NAME", "OP", "NEWLINE", "INDENT", "NAME",
                                               "OP",   "NUMBER", "NEWLINE", "DEDENT", "ENDMARKER"};
    CHECK(k == expected);
}

TEST_CASE("brackets suppress newlines and comments become trivia") {
    const LexResult r = tokenize(file_of("x = [1,  # first\n     2]\n# tail\ny = 2\n"));
    CHECK(r.comments.size() == 2);
    CHECK(r.comments[0].text == "# first");
    int newlines = 0;
    for (const auto& t : r.tokens) newlines += t.kind == TokenKind::Newline;
    CHECK(newlines == 2);
    // "# tail" is attached to the token that follows it
    bool attached = false;
    for (const auto& t : r.tokens) {
        if (t.lexeme == "y") attached = !t.trivia.empty() && t.trivia.back().text == "# tail";
    }
    CHECK(attached);
}

TEST_CASE("string prefixes and triple quotes") {
    const LexResult r = tokenize(file_of("a = rb'x' + f\"{y}\" + '''multi\nline'''\n"));
    int strings = 0;
    for (const auto& t : r.tokens) strings += t.kind == TokenKind::String;
    CHECK(strings == 3);
    CHECK(r.diagnostics.empty());
}

TEST_CASE("unterminated string reports P002 and resumes on the next line") {
    const LexResult r = tokenize(file_of("a = 'open\nb = 2\n"));
    CHECK(has_code(r, "P002"));
    bool saw_b = false;
    for (const auto& t : r.tokens) saw_b = saw_b || t.lexeme == "b";
    CHECK(saw_b);
}

TEST_CASE("invalid UTF-8 is an encoding diagnostic") {
    const LexResult r = tokenize(file_of(std::string("x = '\xff'\n")));
    CHECK(has_code(r, "P004"));
}

TEST_CASE("a non-UTF-8 coding declaration is an encoding diagnostic") {
    CHECK(has_code(tokenize(file_of("# -*- coding: latin-1 -*-\nx = 1\n")), "P004"));
    CHECK_FALSE(has_code(tokenize(file_of("# -*- coding: utf-8 -*-\nx = 1\n")), "P004"));
}

TEST_CASE("byte order mark is skipped") {
    const LexResult r = tokenize(file_of("\xEF\xBB\xBFx = 1\n"));
    CHECK(r.diagnostics.empty());
    CHECK(r.tokens.front().lexeme == "x");
}

TEST_CASE("backslash continuation joins lines") {
    const LexResult r = tokenize(file_of("x = 1 + \\\n    2\n"));
    int newlines = 0;
    for (const auto& t : r.tokens) newlines += t.kind == TokenKind::Newline;
    CHECK(newlines == 1);
}

TEST_CASE("spans are 1-based lines and byte columns") {
    const LexResult r = tokenize(file_of("a\n  \nbc = 1\n"));
    const Token* bc = nullptr;
    for (const auto& t : r.tokens) {
        if (t.lexeme == "bc") bc = &t;
    }
    REQUIRE(bc != nullptr);
    CHECK(bc->span.start_line == 3);
    CHECK(bc->span.start_col == 1);
    CHECK(bc->span.end_col == 3);
}

TEST_CASE("keyword and identifier classification") {
    CHECK(is_keyword("lambda"));
    CHECK(is_keyword("None"));
    CHECK_FALSE(is_keyword("match"));
    CHECK(is_identifier("_x1"));
    CHECK_FALSE(is_identifier("1x"));
    CHECK_FALSE(is_identifier(""));
}
