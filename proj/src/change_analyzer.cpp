#include "perflens/change_analyzer.hpp"

#include "perflens/java_scan.hpp"

#include <algorithm>
#include <chrono>

namespace perflens::change {

using scan::Token;
using scan::TokenKind;

std::string_view change_kind_name(ChangeKind k) noexcept {
    switch (k) {
        case ChangeKind::LoopAdded: return "LoopAdded";
        case ChangeKind::LoopRemoved: return "LoopRemoved";
        case ChangeKind::NestingChanged: return "NestingChanged";
        case ChangeKind::CallAdded: return "CallAdded";
        case ChangeKind::CallRemoved: return "CallRemoved";
        case ChangeKind::CallMovedIntoLoop: return "CallMovedIntoLoop";
        case ChangeKind::CallMovedOutOfLoop: return "CallMovedOutOfLoop";
    }
    return "CallAdded";
}

int Weights::weight_of(ChangeKind k) const noexcept {
    switch (k) {
        case ChangeKind::LoopAdded:
        case ChangeKind::LoopRemoved: return loop;
        case ChangeKind::NestingChanged: return nesting;
        case ChangeKind::CallMovedIntoLoop:
        case ChangeKind::CallMovedOutOfLoop: return call_moved;
        case ChangeKind::CallAdded:
        case ChangeKind::CallRemoved: return call;
    }
    return call;
}

bool StalenessReport::any_significant() const noexcept {
    return std::any_of(per_function.begin(), per_function.end(), [](const auto& f) { return f.significant; });
}

namespace {

bool is_loop_keyword(const Token& t) { return t.is("for") || t.is("while") || t.is("do"); }

// Recursive statement walker over a token range. Loops are for/while/do,
// including braceless bodies; `ident(` is a call unless the ident is a
// control keyword. Calls in a loop header count as inside the loop.
class FeatureWalker {
public:
    FeatureWalker(const Token* begin, const Token* end) : toks_(begin), n_(static_cast<std::size_t>(end - begin)) {}

    BodyFeatures run() {
        std::size_t i = 0;
        while (i < n_) {
            if (toks_[i].is_punct('}')) {
                ++i;
                continue;
            }
            i = statement(i, 0);
        }
        return out_;
    }

private:
    bool at(std::size_t i, char c) const { return i < n_ && toks_[i].is_punct(c); }

    void call(std::string_view name, int depth) {
        ++out_.call_count;
        if (depth > 0) ++out_.calls_in_loops;
        ++out_.callee_names[std::string(name)];
    }

    // Index of the token after a `<...>` group starting at i, or i if none closes.
    std::size_t skip_type_args(std::size_t i) const {
        int depth = 0;
        for (std::size_t j = i; j < n_; ++j) {
            if (toks_[j].is_punct('<')) ++depth;
            else if (toks_[j].is_punct('>')) {
                if (--depth == 0) return j + 1;
            } else if (!(toks_[j].kind == TokenKind::Ident || toks_[j].is_punct('.') || toks_[j].is_punct(',') ||
                         toks_[j].is_punct('?') || toks_[j].is_punct('[') || toks_[j].is_punct(']'))) {
                return i;
            }
        }
        return i;
    }

    // Records a call when toks_[i] starts one; returns the next index to look at.
    std::size_t maybe_call(std::size_t i, int depth) {
        const Token& t = toks_[i];
        if (t.kind != TokenKind::Ident || scan::is_control_keyword(t.text)) return i + 1;
        if (at(i + 1, '(')) {
            call(t.text, depth);
            return i + 1;
        }
        if (i > 0 && toks_[i - 1].is("new") && at(i + 1, '<')) {
            const std::size_t after = skip_type_args(i + 1);
            if (after != i + 1 && at(after, '(')) {
                call(t.text, depth);
                return after;
            }
        }
        return i + 1;
    }

    // Parenthesised group at i (must be '('); calls inside are recorded.
    std::size_t paren_group(std::size_t i, int depth) {
        if (!at(i, '(')) return i;
        int nest = 0;
        while (i < n_) {
            if (toks_[i].is_punct('(')) ++nest;
            else if (toks_[i].is_punct(')')) {
                ++i;
                if (--nest == 0) return i;
                continue;
            } else if (toks_[i].is_punct('{')) {
                i = block(i, depth);  // lambda body inside an argument list
                continue;
            }
            i = maybe_call(i, depth);
        }
        return i;
    }

    // MiniLang style `for i in 0..n {` / `while cond {`: runs up to the '{'.
    std::size_t bare_header(std::size_t i, int depth) {
        while (i < n_ && !toks_[i].is_punct('{') && !toks_[i].is_punct(';') && !toks_[i].is_punct('}')) {
            i = maybe_call(i, depth);
        }
        return i;
    }

    std::size_t block(std::size_t i, int depth) {
        ++i;  // '{'
        while (i < n_ && !toks_[i].is_punct('}')) i = statement(i, depth);
        return i < n_ ? i + 1 : i;
    }

    std::size_t loop_body(std::size_t i, int depth) {
        ++out_.loop_count;
        out_.max_loop_nesting = std::max(out_.max_loop_nesting, depth);
        return i < n_ ? statement(i, depth) : i;
    }

    std::size_t statement(std::size_t i, int depth) {
        const Token& t = toks_[i];
        if (t.is_punct('{')) return block(i, depth);
        if (t.is_punct(';')) return i + 1;
        if (t.is("for") || t.is("while")) {
            const std::size_t body = at(i + 1, '(') ? paren_group(i + 1, depth + 1) : bare_header(i + 1, depth + 1);
            return loop_body(body, depth + 1);
        }
        if (t.is("do")) {
            std::size_t j = loop_body(i + 1, depth + 1);
            if (j < n_ && toks_[j].is("while")) j = paren_group(j + 1, depth + 1);
            return at(j, ';') ? j + 1 : j;
        }
        if (t.is("if")) {
            std::size_t j = at(i + 1, '(') ? paren_group(i + 1, depth) : bare_header(i + 1, depth);
            if (j < n_ && !toks_[j].is_punct('}')) j = statement(j, depth);
            if (j < n_ && toks_[j].is("else")) j = j + 1 < n_ ? statement(j + 1, depth) : j + 1;
            return j;
        }
        if (t.is("switch") || t.is("synchronized") || t.is("catch")) {
            const std::size_t j = paren_group(i + 1, depth);
            return j < n_ && !toks_[j].is_punct('}') ? statement(j, depth) : j;
        }
        if (t.is("try")) {
            std::size_t j = paren_group(i + 1, depth);
            if (j < n_ && !toks_[j].is_punct('}')) j = statement(j, depth);
            while (j < n_ && (toks_[j].is("catch") || toks_[j].is("finally"))) {
                if (toks_[j].is("catch")) j = paren_group(j + 1, depth);
                else ++j;
                if (j < n_ && !toks_[j].is_punct('}')) j = statement(j, depth);
            }
            return j;
        }
        if (t.is("else") || t.is("finally")) return i + 1 < n_ ? statement(i + 1, depth) : i + 1;
        return expression_statement(i, depth);
    }

    // Scans to the end of a simple statement: ';' or ':' at nesting 0, or an
    // enclosing '}' (left in place).
    std::size_t expression_statement(std::size_t i, int depth) {
        int nest = 0;
        while (i < n_) {
            const Token& t = toks_[i];
            if (nest == 0 && (t.is_punct(';') || t.is_punct(':'))) return i + 1;
            if (t.is_punct('}')) return i;
            if (t.is_punct('(') || t.is_punct('[')) {
                ++nest;
                ++i;
                continue;
            }
            if (t.is_punct(')') || t.is_punct(']')) {
                nest = std::max(0, nest - 1);
                ++i;
                continue;
            }
            if (t.is_punct('{')) {
                i = block(i, depth);
                if (nest == 0 && i < n_) {
                    if (toks_[i].is_punct(';')) return i + 1;
                    if (toks_[i].kind != TokenKind::Punct) return i;
                }
                continue;
            }
            if (nest == 0 && i > 0 && is_loop_keyword(t)) return i;
            i = maybe_call(i, depth);
        }
        return i;
    }

    const Token* toks_;
    std::size_t n_;
    BodyFeatures out_;
};

BodyFeatures features_of(const std::vector<Token>& toks, std::size_t from, std::size_t to) {
    if (from >= to) return {};
    return FeatureWalker(toks.data() + from, toks.data() + to).run();
}

}  // namespace

BodyFeatures extract_features(std::string_view body_text) {
    const std::string blanked = scan::blank_comments_and_strings(body_text);
    const auto toks = scan::strip_annotations(scan::tokenize(blanked));
    return features_of(toks, 0, toks.size());
}

FeatureDiff diff_features(const BodyFeatures& before, const BodyFeatures& after, const Weights& weights) {
    FeatureDiff diff;
    auto push = [&](ChangeKind kind, std::string detail) {
        const int w = weights.weight_of(kind);
        diff.changes.push_back({kind, std::move(detail), w});
        diff.score += w;
    };

    const int loops = after.loop_count - before.loop_count;
    for (int k = 0; k < loops; ++k) push(ChangeKind::LoopAdded, "loop added");
    for (int k = 0; k < -loops; ++k) push(ChangeKind::LoopRemoved, "loop removed");
    if (loops == 0 && after.max_loop_nesting != before.max_loop_nesting) {
        push(ChangeKind::NestingChanged, "loop nesting " + std::to_string(before.max_loop_nesting) + " -> " +
                                             std::to_string(after.max_loop_nesting));
    }

    const int d_in = after.calls_in_loops - before.calls_in_loops;
    const int d_out = (after.call_count - after.calls_in_loops) - (before.call_count - before.calls_in_loops);
    const int moved_in = std::min(std::max(d_in, 0), std::max(-d_out, 0));
    const int moved_out = std::min(std::max(-d_in, 0), std::max(d_out, 0));
    for (int k = 0; k < moved_in; ++k) push(ChangeKind::CallMovedIntoLoop, "call moved into a loop");
    for (int k = 0; k < moved_out; ++k) push(ChangeKind::CallMovedOutOfLoop, "call moved out of a loop");

    std::map<std::string, int> deltas;
    for (const auto& [name, n] : after.callee_names) deltas[name] += n;
    for (const auto& [name, n] : before.callee_names) deltas[name] -= n;
    for (const auto& [name, delta] : deltas) {
        for (int k = 0; k < delta; ++k) push(ChangeKind::CallAdded, "call to " + name + " added");
        for (int k = 0; k < -delta; ++k) push(ChangeKind::CallRemoved, "call to " + name + " removed");
    }
    return diff;
}

bool is_significant(const FeatureDiff& diff, const Weights& weights) noexcept {
    if (diff.score >= weights.threshold) return true;
    return std::any_of(diff.changes.begin(), diff.changes.end(), [](const SensitiveChange& c) {
        return c.kind == ChangeKind::LoopAdded || c.kind == ChangeKind::LoopRemoved ||
               c.kind == ChangeKind::NestingChanged;
    });
}

namespace {

struct Version {
    source::SourceIndex index;
    std::vector<Token> toks;
    std::string blanked;
};

bool before(const Token& t, int line, int col) { return t.line < line || (t.line == line && t.col < col); }

BodyFeatures body_features(const Version& v, const source::FunctionDecl& d) {
    const auto& toks = v.toks;
    const auto first = std::partition_point(toks.begin(), toks.end(), [&](const Token& t) {
        return before(t, d.body_span.start_line, d.body_span.start_col);
    });
    const auto last = std::partition_point(first, toks.end(), [&](const Token& t) {
        return !(t.line > d.body_span.end_line || (t.line == d.body_span.end_line && t.col > d.body_span.end_col));
    });
    return features_of(toks, static_cast<std::size_t>(first - toks.begin()),
                       static_cast<std::size_t>(last - toks.begin()));
}

void prepare(Version& v, std::string_view path, std::string_view content, Diagnostics& diag) {
    v.index = source::index_source(path, content, diag);
    v.blanked = scan::blank_comments_and_strings(content);
    v.toks = scan::strip_annotations(scan::tokenize(v.blanked));
}

}  // namespace

std::optional<StalenessReport> assess_file(std::string_view old_content, std::string_view new_content,
                                           std::string_view path, const Weights& weights,
                                           const std::function<bool()>& cancelled) {
    const auto start = std::chrono::steady_clock::now();
    auto stop = [&] { return cancelled && cancelled(); };

    StalenessReport report;
    report.path = std::string(path);
    Diagnostics diag;
    Version old_v;
    Version new_v;
    prepare(new_v, path, new_content, diag);
    if (stop()) return std::nullopt;
    const bool new_ok = diag.empty();
    if (new_ok) prepare(old_v, path, old_content, diag);
    if (stop()) return std::nullopt;

    if (new_ok) {
        const auto& olds = old_v.index.decls;
        const auto& news = new_v.index.decls;
        std::vector<int> partner(news.size(), -1);
        std::vector<bool> old_taken(olds.size(), false);

        // pair by key + occurrence index: fqn_guess first, then simple_name
        auto pair_by = [&](auto key) {
            std::map<std::string, std::vector<std::size_t>> free_old;
            for (std::size_t i = 0; i < olds.size(); ++i) {
                if (!old_taken[i]) free_old[key(olds[i])].push_back(i);
            }
            std::map<std::string, std::size_t> seen;
            for (std::size_t j = 0; j < news.size(); ++j) {
                if (partner[j] >= 0) continue;
                const std::string k = key(news[j]);
                const std::size_t occurrence = seen[k]++;
                const auto it = free_old.find(k);
                if (it == free_old.end() || occurrence >= it->second.size()) continue;
                const std::size_t i = it->second[occurrence];
                partner[j] = static_cast<int>(i);
                old_taken[i] = true;
            }
        };
        pair_by([](const source::FunctionDecl& d) { return d.fqn_guess; });
        pair_by([](const source::FunctionDecl& d) { return d.simple_name; });

        auto emit = [&](const source::FunctionDecl& d, const BodyFeatures& before_f, const BodyFeatures& after_f) {
            FeatureDiff diff = diff_features(before_f, after_f, weights);
            FunctionStaleness f;
            f.fqn_guess = d.fqn_guess;
            f.simple_name = d.simple_name;
            f.span = d.decl_span;
            f.significant = is_significant(diff, weights);
            f.score = diff.score;
            f.changes = std::move(diff.changes);
            report.per_function.push_back(std::move(f));
        };
        for (std::size_t j = 0; j < news.size(); ++j) {
            if (j % 64 == 0 && stop()) return std::nullopt;
            const BodyFeatures after_f = body_features(new_v, news[j]);
            const BodyFeatures before_f =
                partner[j] >= 0 ? body_features(old_v, olds[static_cast<std::size_t>(partner[j])]) : BodyFeatures{};
            emit(news[j], before_f, after_f);
        }
        for (std::size_t i = 0; i < olds.size(); ++i) {
            if (!old_taken[i]) emit(olds[i], body_features(old_v, olds[i]), BodyFeatures{});
        }
    }
    if (stop()) return std::nullopt;
    report.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace perflens::change
