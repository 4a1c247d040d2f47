#pragma once

// Lightweight declaration scanning for Java-like sources (and MiniLang
// `.mini` files) and matching of declarations to cost report entries.

#include "perflens/error.hpp"
#include "perflens/report_ingest.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace perflens::source {

/// 1-based, inclusive on both ends.
struct Span {
    int start_line = 1;
    int start_col = 1;
    int end_line = 1;
    int end_col = 1;

    [[nodiscard]] bool contains_line(int line) const noexcept { return line >= start_line && line <= end_line; }

    friend bool operator==(const Span&, const Span&) = default;
    friend auto operator<=>(const Span&, const Span&) = default;
};

struct FunctionDecl {
    std::string simple_name;
    std::string fqn_guess;  // package + type chain + name
    std::size_t arity = 0;
    std::vector<std::string> param_types;
    Span decl_span;
    Span body_span;

    friend bool operator==(const FunctionDecl&, const FunctionDecl&) = default;
};

struct SourceIndex {
    std::string path;
    std::string content_hash;
    std::vector<FunctionDecl> decls;  // source order

    friend bool operator==(const SourceIndex&, const SourceIndex&) = default;
};

/// Total: a file that cannot be scanned (unbalanced braces) gives an empty
/// index and an error diagnostic. `.mini` paths use the MiniLang scanner.
[[nodiscard]] SourceIndex index_source(std::string_view path, std::string_view content, Diagnostics& diagnostics);
[[nodiscard]] SourceIndex index_source(std::string_view path, std::string_view content);

enum class MatchKind { ExactFqn, NameArityFile, NameFile, Unmatched };

[[nodiscard]] std::string_view match_kind_name(MatchKind k) noexcept;

struct MatchResult {
    FunctionDecl decl;
    const ingest::CostReportEntry* entry = nullptr;  // null iff Unmatched
    MatchKind matched_by = MatchKind::Unmatched;
};

/// Fallback chain per declaration: exact fqn (signature-disambiguated),
/// then same file + name + arity, then same file + name. A pairing is only
/// accepted when it is unique on both sides; each entry is used at most once.
/// Results follow declaration order.
[[nodiscard]] std::vector<MatchResult> match_decls(const SourceIndex& index, const ingest::CostDatabase& db);

/// "java.util.List<String>" -> "List", "String..." -> "String[]".
[[nodiscard]] std::string normalize_type(std::string_view type);

}  // namespace perflens::source
