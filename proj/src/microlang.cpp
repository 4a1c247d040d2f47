#include "perflens/microlang.hpp"

#include "perflens/java_scan.hpp"
#include "perflens/paths.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace perflens::mini {

using scan::Token;
using scan::TokenKind;

namespace {

bool is_keyword(std::string_view w) {
    return w == "fn" || w == "tick" || w == "for" || w == "in" || w == "while" || w == "if" || w == "else" ||
           w == "call" || w == "return";
}

class Parser {
public:
    Parser(std::string_view text, std::string_view file)
        : blanked_(scan::blank_comments_and_strings(text)), toks_(scan::tokenize(blanked_)), file_(file) {
        const auto lines = std::count(text.begin(), text.end(), '\n');
        eof_line_ = static_cast<int>(lines) + 1;
    }

    Program run() {
        Program p;
        while (!done()) {
            FuncDef f = function();
            if (p.functions.contains(f.name)) fail("duplicate function '" + f.name + "'", f.line, 1);
            p.functions.emplace(f.name, std::move(f));
        }
        return p;
    }

private:
    bool done() const { return pos_ >= toks_.size(); }

    [[noreturn]] void fail(const std::string& msg, int line, int col) const {
        throw ParseError(file_.empty() ? msg : std::string(file_) + ": " + msg, static_cast<std::size_t>(line),
                         static_cast<std::size_t>(col));
    }

    [[noreturn]] void fail_here(const std::string& msg) const {
        if (done()) fail(msg + ", found end of input", eof_line_, 1);
        const Token& t = toks_[pos_];
        fail(msg + ", found '" + std::string(t.text) + "'", t.line, t.col);
    }

    const Token& peek() const { return toks_[pos_]; }

    bool accept(std::string_view s) {
        if (!done() && peek().text == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(std::string_view s) {
        if (!accept(s)) fail_here("expected '" + std::string(s) + "'");
    }

    std::string ident(const char* what) {
        if (done() || peek().kind != TokenKind::Ident || is_keyword(peek().text)) fail_here(std::string("expected ") + what);
        return std::string(toks_[pos_++].text);
    }

    std::string symbol(const char* what) {
        const Token& t = done() ? toks_.back() : peek();
        std::string name = ident(what);
        if (!cost::Symbol::is_valid(name)) fail("'" + name + "' cannot be used as a size symbol", t.line, t.col);
        return name;
    }

    Arg arg(const char* what) {
        if (!done() && peek().kind == TokenKind::Number) {
            const Token& t = toks_[pos_++];
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc{} || ptr != t.text.data() + t.text.size()) fail("invalid natural", t.line, t.col);
            return v;
        }
        return symbol(what);
    }

    FuncDef function() {
        const int line = done() ? eof_line_ : peek().line;
        expect("fn");
        FuncDef f;
        f.line = line;
        f.file = std::string(file_);
        f.name = ident("function name");
        expect("(");
        if (!accept(")")) {
            do {
                f.params.push_back(symbol("parameter name"));
            } while (accept(","));
            expect(")");
        }
        std::set<std::string> seen;
        for (const auto& p : f.params) {
            if (!seen.insert(p).second) fail("duplicate parameter '" + p + "' in '" + f.name + "'", line, 1);
        }
        f.body = block();
        return f;
    }

    Block block() {
        expect("{");
        Block b;
        while (!done() && !peek().is_punct('}')) b.push_back(statement());
        expect("}");
        return b;
    }

    // Opaque token run up to (not including) '{' or ';'.
    std::string any_expr(bool until_brace) {
        std::string text;
        while (!done() && !peek().is_punct(';') && !peek().is_punct('{')) {
            if (!text.empty()) text += ' ';
            text += toks_[pos_++].text;
        }
        if (done() || (until_brace != peek().is_punct('{'))) fail_here(until_brace ? "expected '{'" : "expected ';'");
        if (text.empty()) fail_here("expected an expression");
        return text;
    }

    Stmt statement() {
        Stmt s;
        s.line = peek().line;
        if (accept("tick")) {
            s.kind = StmtKind::Tick;
            expect(";");
        } else if (accept("return")) {
            s.kind = StmtKind::Return;
            expect(";");
        } else if (accept("for")) {
            s.kind = StmtKind::For;
            s.name = ident("loop variable");
            expect("in");
            if (done() || peek().text != "0") fail_here("expected '0'");
            ++pos_;
            expect(".");
            expect(".");
            s.bound = arg("loop bound");
            s.body = block();
        } else if (accept("while")) {
            s.kind = StmtKind::While;
            s.cond = any_expr(true);
            s.body = block();
        } else if (accept("if")) {
            s.kind = StmtKind::If;
            s.cond = any_expr(true);
            s.body = block();
            if (accept("else")) s.else_body = block();
        } else if (accept("call")) {
            s.kind = StmtKind::Call;
            s.name = ident("callee name");
            expect("(");
            if (!accept(")")) {
                do {
                    s.args.push_back(arg("argument"));
                } while (accept(","));
                expect(")");
            }
            expect(";");
        } else {
            s.kind = StmtKind::Assign;
            s.name = ident("statement");
            expect("=");
            s.cond = any_expr(false);
            expect(";");
        }
        return s;
    }

    std::string blanked_;
    std::vector<Token> toks_;
    std::string_view file_;
    std::size_t pos_ = 0;
    int eof_line_ = 1;
};

std::string arg_text(const Arg& a) {
    if (const auto* s = std::get_if<std::string>(&a)) return *s;
    return std::to_string(std::get<std::uint64_t>(a));
}

cost::SymbolicCost arg_cost(const Arg& a) {
    if (const auto* s = std::get_if<std::string>(&a)) return cost::SymbolicCost::symbol(cost::Symbol(*s));
    return cost::SymbolicCost::constant(cost::Rational(static_cast<std::int64_t>(std::get<std::uint64_t>(a))));
}

void collect_calls(const Block& b, std::set<std::string>& out) {
    for (const auto& s : b) {
        if (s.kind == StmtKind::Call) out.insert(s.name);
        collect_calls(s.body, out);
        if (s.else_body) collect_calls(*s.else_body, out);
    }
}

void validate(const Program& program, const FuncDef& f, const Block& b) {
    const auto is_param = [&](const std::string& s) {
        return std::find(f.params.begin(), f.params.end(), s) != f.params.end();
    };
    for (const auto& s : b) {
        const std::string where = "'" + f.name + "' line " + std::to_string(s.line);
        if (s.kind == StmtKind::For) {
            if (const auto* sym = std::get_if<std::string>(&s.bound); sym && !is_param(*sym)) {
                throw AnalysisError("InvalidBound", "InvalidBound: loop bound '" + *sym + "' in " + where +
                                                        " is not a parameter of the function");
            }
        }
        if (s.kind == StmtKind::Call) {
            const auto it = program.functions.find(s.name);
            if (it == program.functions.end()) {
                throw AnalysisError("UndefinedCallee", "UndefinedCallee: '" + s.name + "' called from " + where);
            }
            if (it->second.params.size() != s.args.size()) {
                throw AnalysisError("InvalidArgument", "InvalidArgument: '" + s.name + "' expects " +
                                                           std::to_string(it->second.params.size()) +
                                                           " arguments, " + where + " passes " +
                                                           std::to_string(s.args.size()));
            }
            for (const auto& a : s.args) {
                if (const auto* sym = std::get_if<std::string>(&a); sym && !is_param(*sym)) {
                    throw AnalysisError("InvalidArgument", "InvalidArgument: argument '" + *sym + "' in " + where +
                                                               " is not a parameter of the function");
                }
            }
        }
        validate(program, f, s.body);
        if (s.else_body) validate(program, f, *s.else_body);
    }
}

class Analyzer {
public:
    Analyzer(const Program& p, AnalyzeOptions o, const std::map<std::string, cost::SymbolicCost>& done)
        : program_(p), options_(o), done_(done) {}

    cost::SymbolicCost block(const FuncDef& f, const Block& b, std::vector<ingest::TraceItem>& trace) {
        auto total = cost::SymbolicCost::constant(cost::Rational(0));
        for (const auto& s : b) total = cost::add(total, stmt(f, s, trace));
        return total;
    }

private:
    static cost::SymbolicCost one() { return cost::SymbolicCost::constant(cost::Rational(1)); }

    cost::SymbolicCost stmt(const FuncDef& f, const Stmt& s, std::vector<ingest::TraceItem>& trace) {
        switch (s.kind) {
            case StmtKind::Tick:
            case StmtKind::Assign: return one();
            case StmtKind::Return: return cost::SymbolicCost::constant(cost::Rational(0));
            case StmtKind::If: {
                const auto then_cost = block(f, s.body, trace);
                const auto else_cost =
                    s.else_body ? block(f, *s.else_body, trace) : cost::SymbolicCost::constant(cost::Rational(0));
                return cost::add(one(), cost::join(then_cost, else_cost));
            }
            case StmtKind::For: {
                const std::size_t slot = trace.size();
                trace.push_back({"loop over 0.." + arg_text(s.bound) + " (" + s.name + ")", f.file, s.line, {}});
                const auto body = block(f, s.body, trace);
                const auto c = cost::add(cost::mul(arg_cost(s.bound), cost::add(one(), body)), one());
                trace[slot].inline_cost = c;
                return c;
            }
            case StmtKind::While: {
                const std::size_t slot = trace.size();
                trace.push_back({"while loop with unbounded condition '" + s.cond + "'", f.file, s.line, {}});
                const auto body = block(f, s.body, trace);
                const auto c = options_.risky_constant ? cost::add(one(), body) : cost::SymbolicCost::unknown();
                trace[slot].inline_cost = c;
                return c;
            }
            case StmtKind::Call: {
                const FuncDef& callee = program_.functions.at(s.name);
                cost::Bindings bindings;
                for (std::size_t i = 0; i < callee.params.size(); ++i) {
                    const Arg& a = s.args[i];
                    if (const auto* sym = std::get_if<std::string>(&a)) {
                        bindings.emplace(callee.params[i], cost::Symbol(*sym));
                    } else {
                        bindings.emplace(callee.params[i], std::get<std::uint64_t>(a));
                    }
                }
                const auto c = cost::add(one(), cost::substitute(done_.at(s.name), bindings));
                std::string args;
                for (const auto& a : s.args) args += (args.empty() ? "" : ", ") + arg_text(a);
                trace.push_back({"call " + s.name + "(" + args + ")", f.file, s.line, c});
                return c;
            }
        }
        return cost::SymbolicCost::unknown();
    }

    const Program& program_;
    AnalyzeOptions options_;
    const std::map<std::string, cost::SymbolicCost>& done_;
};

}  // namespace

Program parse_program(std::string_view text, std::string_view file) { return Parser(text, file).run(); }

Program load_workspace(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("not a directory: '" + root.string() + "'");
    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (it->is_regular_file() && it->path().extension() == ".mini") files.push_back(it->path());
    }
    if (ec) throw IoError("cannot list '" + root.string() + "': " + ec.message());
    std::sort(files.begin(), files.end());

    Program program;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw IoError("cannot read '" + file.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string rel = normalize_path(fs::relative(file, root).generic_string());
        Program part = parse_program(buf.str(), rel);
        for (auto& [name, f] : part.functions) {
            if (program.functions.contains(name)) {
                throw ParseError(rel + ": duplicate function '" + name + "' (also in " +
                                     program.functions.at(name).file + ")",
                                 static_cast<std::size_t>(f.line), 1);
            }
            program.functions.emplace(name, std::move(f));
        }
    }
    return program;
}

std::string function_fqn(const FuncDef& f) {
    if (f.file.empty()) return f.name;
    return path_stem(f.file) + "." + f.name;
}

CostResult analyze_costs(const Program& program, AnalyzeOptions options) {
    for (const auto& [name, f] : program.functions) validate(program, f, f.body);

    // Tarjan SCC; components come out callee-first.
    std::map<std::string, std::set<std::string>> calls;
    for (const auto& [name, f] : program.functions) collect_calls(f.body, calls[name]);

    std::map<std::string, int> index;
    std::map<std::string, int> low;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> components;
    int counter = 0;
    std::function<void(const std::string&)> connect = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : calls[v]) {
            if (!index.contains(w)) {
                connect(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.contains(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::string> comp;
            std::string w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                comp.push_back(w);
            } while (w != v);
            components.push_back(std::move(comp));
        }
    };
    for (const auto& [name, f] : program.functions) {
        if (!index.contains(name)) connect(name);
    }

    std::map<std::string, cost::SymbolicCost> done;
    CostResult result;
    for (const auto& comp : components) {
        const bool cyclic = comp.size() > 1 || calls[comp[0]].contains(comp[0]);
        for (const auto& name : comp) {
            const FuncDef& f = program.functions.at(name);
            FunctionCost fc;
            if (cyclic) {
                fc.cost = cost::SymbolicCost::unknown();
                fc.trace.push_back({"recursive call cycle", f.file, f.line, fc.cost});
            } else {
                Analyzer a(program, options, done);
                fc.cost = a.block(f, f.body, fc.trace);
            }
            done[name] = fc.cost;
            result.per_function[name] = std::move(fc);
        }
    }
    return result;
}

ingest::CostDatabase to_cost_database(const Program& program, const CostResult& result) {
    ingest::CostDatabase db;
    for (const auto& [name, fc] : result.per_function) {
        const FuncDef& f = program.functions.at(name);
        ingest::CostReportEntry e;
        e.fqn = function_fqn(f);
        e.file = f.file;
        e.line = f.line;
        e.exact_cost = fc.cost;
        e.declared_degree = cost::degree(fc.cost);
        e.declared_big_o = cost::big_o_text(fc.cost);
        e.trace = fc.trace;
        db.insert(std::move(e));
    }
    return db;
}

namespace {

class Interpreter {
public:
    explicit Interpreter(const Program& p) : program_(p) {}

    std::uint64_t run(const FuncDef& f, const std::map<std::string, std::uint64_t>& env) {
        if (active_.contains(f.name)) {
            throw AnalysisError("OracleUnsupported", "OracleUnsupported: recursion through '" + f.name + "'");
        }
        active_.insert(f.name);
        std::uint64_t ticks = 0;
        block(f, f.body, env, ticks);
        active_.erase(f.name);
        return ticks;
    }

private:
    std::uint64_t value(const Arg& a, const std::map<std::string, std::uint64_t>& env) const {
        if (const auto* v = std::get_if<std::uint64_t>(&a)) return *v;
        const auto& name = std::get<std::string>(a);
        const auto it = env.find(name);
        if (it == env.end()) throw AnalysisError("UnboundSymbol", "UnboundSymbol: '" + name + "'");
        return it->second;
    }

    // false once a `return` has executed
    bool block(const FuncDef& f, const Block& b, const std::map<std::string, std::uint64_t>& env,
               std::uint64_t& ticks) {
        for (const auto& s : b) {
            switch (s.kind) {
                case StmtKind::Tick:
                case StmtKind::Assign: ++ticks; break;
                case StmtKind::Return: return false;
                case StmtKind::If:
                    ++ticks;
                    if (!block(f, s.body, env, ticks)) return false;
                    break;
                case StmtKind::For: {
                    const std::uint64_t n = value(s.bound, env);
                    for (std::uint64_t i = 0; i < n; ++i) {
                        ++ticks;
                        if (!block(f, s.body, env, ticks)) return false;
                    }
                    ++ticks;
                    break;
                }
                case StmtKind::While:
                    throw AnalysisError("OracleUnsupported",
                                        "OracleUnsupported: while loop in '" + f.name + "' line " + std::to_string(s.line));
                case StmtKind::Call: {
                    const auto it = program_.functions.find(s.name);
                    if (it == program_.functions.end()) {
                        throw AnalysisError("UndefinedCallee", "UndefinedCallee: '" + s.name + "'");
                    }
                    const FuncDef& callee = it->second;
                    if (callee.params.size() != s.args.size()) {
                        throw AnalysisError("InvalidArgument", "InvalidArgument: arity mismatch calling '" + s.name + "'");
                    }
                    std::map<std::string, std::uint64_t> callee_env;
                    for (std::size_t i = 0; i < s.args.size(); ++i) callee_env[callee.params[i]] = value(s.args[i], env);
                    ticks += 1 + run(callee, callee_env);
                    break;
                }
            }
        }
        return true;
    }

    const Program& program_;
    std::set<std::string> active_;
};

}  // namespace

std::uint64_t interpret(const Program& program, std::string_view entry,
                        const std::map<std::string, std::uint64_t>& bindings) {
    const auto it = program.functions.find(std::string(entry));
    if (it == program.functions.end()) throw AnalysisError("UndefinedCallee", "UndefinedCallee: '" + std::string(entry) + "'");
    std::map<std::string, std::uint64_t> env;
    for (const auto& p : it->second.params) {
        const auto b = bindings.find(p);
        if (b == bindings.end()) throw AnalysisError("UnboundSymbol", "UnboundSymbol: '" + p + "'");
        env[p] = b->second;
    }
    return Interpreter(program).run(it->second, env);
}

}  // namespace perflens::mini
