#pragma once

// MiniLang: a tiny imperative language with size parameters, a parametric
// cost analyzer over it and a tick-counting interpreter used as an oracle.
//
//   program := funcdef*
//   funcdef := "fn" IDENT "(" [IDENT ("," IDENT)*] ")" block
//   block   := "{" stmt* "}"
//   stmt    := "tick" ";" | IDENT "=" ANYEXPR ";"
//            | "for" IDENT "in" "0" ".." (IDENT | NAT) block
//            | "while" ANYEXPR block | "if" ANYEXPR block ["else" block]
//            | "call" IDENT "(" [(IDENT | NAT) ("," (IDENT | NAT))*] ")" ";"
//            | "return" ";"
//
// `//` comments run to the end of the line.

#include "perflens/cost_model.hpp"
#include "perflens/error.hpp"
#include "perflens/report_ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace perflens::mini {

using Arg = std::variant<std::string, std::uint64_t>;  // symbol or natural

struct Stmt;
using Block = std::vector<Stmt>;

enum class StmtKind { Tick, Assign, For, While, If, Call, Return };

struct Stmt {
    StmtKind kind = StmtKind::Tick;
    int line = 1;
    std::string name;  // loop variable, assignment target or callee
    Arg bound;         // For
    std::string cond;  // While / If
    Block body;        // For / While / If-then
    std::optional<Block> else_body;
    std::vector<Arg> args;  // Call
};

struct FuncDef {
    std::string name;
    std::vector<std::string> params;
    Block body;
    int line = 1;
    std::string file;  // source path as given to the parser
};

struct Program {
    std::map<std::string, FuncDef> functions;
};

/// Throws ParseError (with line/column) on malformed text or a duplicate name.
[[nodiscard]] Program parse_program(std::string_view text, std::string_view file = {});

/// Parses every `*.mini` file below `root` (sorted by path, paths stored
/// relative to `root`). Duplicate function names across files are a ParseError.
[[nodiscard]] Program load_workspace(const std::filesystem::path& root);

/// "a/b/Prog.mini" + "f" -> "Prog.f"; "f" when the file is unknown.
[[nodiscard]] std::string function_fqn(const FuncDef& f);

class AnalysisError : public Error {
public:
    AnalysisError(std::string kind, const std::string& message) : Error(std::move(kind), message) {}
};

struct FunctionCost {
    cost::SymbolicCost cost;
    std::vector<ingest::TraceItem> trace;
};

struct CostResult {
    std::map<std::string, FunctionCost> per_function;
};

struct AnalyzeOptions {
    /// While loops cost 1 + body instead of Unknown. Recursion stays Unknown.
    bool risky_constant = false;
};

/// Throws AnalysisError with kind UndefinedCallee, InvalidBound or
/// InvalidArgument (call argument that is not a formal parameter or a
/// natural, or an arity mismatch).
[[nodiscard]] CostResult analyze_costs(const Program& program, AnalyzeOptions options = {});

/// Report entries keyed by function_fqn, located at the `fn` line.
[[nodiscard]] ingest::CostDatabase to_cost_database(const Program& program, const CostResult& result);

/// Tick count of running `entry`. Conditions are opaque: If always takes the
/// then-branch. Throws AnalysisError "OracleUnsupported" on While or
/// recursion and "UnboundSymbol" when a parameter has no binding.
[[nodiscard]] std::uint64_t interpret(const Program& program, std::string_view entry,
                                      const std::map<std::string, std::uint64_t>& bindings);

}  // namespace perflens::mini
