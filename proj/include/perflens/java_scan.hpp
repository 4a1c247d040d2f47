#pragma once

// Tolerant lexical layer for Java-like sources: comment/string blanking and a
// flat token stream with 1-based positions. Shared by the declaration scanner
// and the change analyzer.

#include <string>
#include <string_view>
#include <vector>

namespace perflens::scan {

enum class TokenKind { Ident, Number, Punct };

struct Token {
    TokenKind kind = TokenKind::Punct;
    std::string_view text;
    int line = 1;
    int col = 1;

    [[nodiscard]] bool is(std::string_view s) const noexcept { return text == s; }
    [[nodiscard]] bool is_punct(char c) const noexcept {
        return kind == TokenKind::Punct && text.size() == 1 && text[0] == c;
    }
};

/// Replaces comments, string, char and text-block literals with spaces.
/// Newlines are kept, so line/column positions stay valid.
[[nodiscard]] std::string blank_comments_and_strings(std::string_view text);

/// Tokens of already-blanked text. Views point into `text`.
[[nodiscard]] std::vector<Token> tokenize(std::string_view text);

/// Drops `@Name`, `@a.b.Name(...)` annotations; `@interface` is kept as the
/// `interface` keyword.
[[nodiscard]] std::vector<Token> strip_annotations(const std::vector<Token>& tokens);

/// Java keywords that can precede '(' without being a call.
[[nodiscard]] bool is_control_keyword(std::string_view word) noexcept;
[[nodiscard]] bool is_reserved(std::string_view word) noexcept;

/// Stable 64-bit FNV-1a, hex encoded.
[[nodiscard]] std::string content_hash(std::string_view text);

}  // namespace perflens::scan
