#include "perflens/java_scan.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>

namespace perflens::scan {

std::string blank_comments_and_strings(std::string_view text) {
    std::string out(text);
    std::size_t i = 0;
    const std::size_t n = out.size();
    auto blank = [&out](std::size_t pos) {
        if (out[pos] != '\n' && out[pos] != '\r') out[pos] = ' ';
    };
    while (i < n) {
        const char c = out[i];
        if (c == '/' && i + 1 < n && out[i + 1] == '/') {
            while (i < n && out[i] != '\n') blank(i++);
        } else if (c == '/' && i + 1 < n && out[i + 1] == '*') {
            blank(i++);
            blank(i++);
            while (i < n && !(out[i] == '*' && i + 1 < n && out[i + 1] == '/')) blank(i++);
            if (i < n) {
                blank(i++);
                blank(i++);
            }
        } else if (c == '"' && text.substr(i, 3) == "\"\"\"") {
            for (int k = 0; k < 3; ++k) blank(i++);
            while (i < n && text.substr(i, 3) != "\"\"\"") {
                if (out[i] == '\\' && i + 1 < n) blank(i++);
                blank(i++);
            }
            for (int k = 0; k < 3 && i < n; ++k) blank(i++);
        } else if (c == '"' || c == '\'') {
            blank(i++);
            while (i < n && out[i] != c && out[i] != '\n') {
                if (out[i] == '\\' && i + 1 < n) blank(i++);
                blank(i++);
            }
            if (i < n && out[i] == c) blank(i++);
        } else {
            ++i;
        }
    }
    return out;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (std::isspace(c) != 0) {
            ++col;
            ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        const std::size_t start = i;
        if (std::isalpha(c) != 0 || c == '_' || c == '$' || c >= 0x80) {
            t.kind = TokenKind::Ident;
            while (i < n) {
                const auto d = static_cast<unsigned char>(text[i]);
                if (std::isalnum(d) == 0 && d != '_' && d != '$' && d < 0x80) break;
                ++i;
            }
        } else if (std::isdigit(c) != 0) {
            t.kind = TokenKind::Number;
            while (i < n) {
                const auto d = static_cast<unsigned char>(text[i]);
                if (std::isalnum(d) == 0 && d != '_') {
                    // "0..n" is a range, not a decimal point
                    if (d == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])) != 0) {
                        ++i;
                        continue;
                    }
                    break;
                }
                ++i;
            }
        } else {
            t.kind = TokenKind::Punct;
            ++i;
        }
        t.text = text.substr(start, i - start);
        col += static_cast<int>(i - start);
        tokens.push_back(t);
    }
    return tokens;
}

std::vector<Token> strip_annotations(const std::vector<Token>& tokens) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].is_punct('@') || i + 1 >= tokens.size() || tokens[i + 1].kind != TokenKind::Ident) {
            out.push_back(tokens[i]);
            continue;
        }
        if (tokens[i + 1].is("interface")) continue;  // keep `interface`
        std::size_t j = i + 2;
        while (j + 1 < tokens.size() && tokens[j].is_punct('.') && tokens[j + 1].kind == TokenKind::Ident) j += 2;
        if (j < tokens.size() && tokens[j].is_punct('(')) {
            int depth = 0;
            for (; j < tokens.size(); ++j) {
                if (tokens[j].is_punct('(')) ++depth;
                if (tokens[j].is_punct(')') && --depth == 0) {
                    ++j;
                    break;
                }
            }
        }
        i = j - 1;
    }
    return out;
}

bool is_control_keyword(std::string_view word) noexcept {
    static constexpr std::array<std::string_view, 14> words = {
        "if", "for", "while", "switch", "catch", "return", "synchronized", "do",
        "else", "try", "throw", "assert", "case", "instanceof"};
    for (const auto w : words) {
        if (w == word) return true;
    }
    return false;
}

bool is_reserved(std::string_view word) noexcept {
    static constexpr std::array<std::string_view, 30> words = {
        "abstract", "boolean", "break",   "byte",     "char",      "class",   "continue", "default",
        "double",   "enum",    "extends", "final",    "finally",   "float",   "implements", "import",
        "int",      "interface", "long",  "native",   "new",       "package", "private",  "protected",
        "public",   "short",   "static",  "strictfp", "transient", "volatile"};
    if (is_control_keyword(word)) return true;
    for (const auto w : words) {
        if (w == word) return true;
    }
    return word == "void" || word == "throws" || word == "super" || word == "this";
}

std::string content_hash(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace perflens::scan
