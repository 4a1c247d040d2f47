#include "perflens/source_matcher.hpp"

#include "perflens/java_scan.hpp"
#include "perflens/paths.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

namespace perflens::source {

using scan::Token;
using scan::TokenKind;

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Index just past the bracket matching tokens[i] ('{', '(' or '['), or npos.
std::size_t skip_balanced(const std::vector<Token>& toks, std::size_t i) {
    const char open = toks[i].text[0];
    const char close = open == '{' ? '}' : open == '(' ? ')' : ']';
    int depth = 0;
    for (; i < toks.size(); ++i) {
        if (toks[i].is_punct(open)) ++depth;
        if (toks[i].is_punct(close) && --depth == 0) return i + 1;
    }
    return npos;
}

std::vector<std::string> parse_param_types(const std::vector<Token>& toks, std::size_t open, std::size_t close) {
    std::vector<std::vector<std::size_t>> groups(1);
    int depth = 0;
    for (std::size_t i = open + 1; i < close; ++i) {
        const auto& t = toks[i];
        if (t.is_punct('<') || t.is_punct('(') || t.is_punct('[')) ++depth;
        if (t.is_punct('>') || t.is_punct(')') || t.is_punct(']')) --depth;
        if (t.is_punct(',') && depth == 0) {
            groups.emplace_back();
            continue;
        }
        if (t.is("final")) continue;
        groups.back().push_back(i);
    }
    std::vector<std::string> types;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        // drop trailing "[]" pairs written after the name (C-style arrays)
        std::size_t end = g.size();
        std::string suffix;
        while (end >= 2 && toks[g[end - 1]].is_punct(']') && toks[g[end - 2]].is_punct('[')) {
            end -= 2;
            suffix += "[]";
        }
        std::string type;
        for (std::size_t k = 0; k + 1 < end; ++k) type += toks[g[k]].text;
        if (end == 1) type = std::string(toks[g[0]].text);  // bare type, e.g. lambda-less stubs
        types.push_back(type + suffix);
    }
    return types;
}

Span span_of(const Token& a, const Token& b) {
    return {a.line, a.col, b.line, b.col + static_cast<int>(b.text.size()) - 1};
}

class JavaScanner {
public:
    explicit JavaScanner(std::vector<Token> toks) : toks_(std::move(toks)) {}

    // false when braces do not balance
    bool run(std::vector<FunctionDecl>& out) {
        out_ = &out;
        if (!members(true)) return false;
        return pos_ >= toks_.size();
    }

private:
    std::string qualified(const std::string& name) const {
        std::string q = package_;
        for (const auto& t : types_) {
            if (!q.empty()) q += '.';
            q += t;
        }
        if (!q.empty()) q += '.';
        return q + name;
    }

    // Skips an enum's constant list up to the first top-level ';' (consumed)
    // or the closing '}' (left in place).
    bool skip_enum_constants() {
        while (pos_ < toks_.size()) {
            const auto& t = toks_[pos_];
            if (t.is_punct(';')) {
                ++pos_;
                return true;
            }
            if (t.is_punct('}')) return true;
            if (t.is_punct('{') || t.is_punct('(')) {
                pos_ = skip_balanced(toks_, pos_);
                if (pos_ == npos) return false;
                continue;
            }
            ++pos_;
        }
        return true;
    }

    bool members(bool top_level) {
        std::vector<std::size_t> header;
        int angle = 0;
        while (pos_ < toks_.size()) {
            const Token& t = toks_[pos_];
            if (angle > 0) {
                if (t.is_punct('<')) ++angle;
                if (t.is_punct('>')) --angle;
                if (t.is_punct('{') || t.is_punct(';')) {
                    angle = 0;  // stray '<', resynchronise
                    continue;
                }
                ++pos_;
                continue;
            }
            if (t.is_punct('}')) {
                if (top_level) return false;
                return true;
            }
            if (t.is_punct('<')) {
                angle = 1;
                ++pos_;
                continue;
            }
            if (t.is_punct(';')) {
                header.clear();
                ++pos_;
                continue;
            }
            if (top_level && header.empty() && (t.is("package") || t.is("import"))) {
                const bool is_package = t.is("package");
                std::string name;
                ++pos_;
                while (pos_ < toks_.size() && !toks_[pos_].is_punct(';')) {
                    name += toks_[pos_].text;
                    ++pos_;
                }
                if (is_package) package_ = name;
                continue;
            }
            if (t.is_punct('=')) {
                // field initializer: skip to the terminating ';'
                while (pos_ < toks_.size() && !toks_[pos_].is_punct(';')) {
                    if (toks_[pos_].is_punct('}')) break;
                    if (toks_[pos_].is_punct('{') || toks_[pos_].is_punct('(')) {
                        pos_ = skip_balanced(toks_, pos_);
                        if (pos_ == npos) return false;
                        continue;
                    }
                    ++pos_;
                }
                header.clear();
                continue;
            }
            if (t.is_punct('(')) {
                const std::size_t after = skip_balanced(toks_, pos_);
                if (after == npos) return false;
                header.push_back(pos_);
                header.push_back(after - 1);
                pos_ = after;
                continue;
            }
            if (t.is_punct('{')) {
                if (!open_brace(header)) return false;
                header.clear();
                continue;
            }
            header.push_back(pos_);
            ++pos_;
        }
        return top_level;
    }

    bool open_brace(const std::vector<std::size_t>& header) {
        const std::size_t brace = pos_;

        // nested type
        for (std::size_t k = 0; k + 1 < header.size(); ++k) {
            const Token& kw = toks_[header[k]];
            const Token& name = toks_[header[k + 1]];
            if ((kw.is("class") || kw.is("interface") || kw.is("enum") || kw.is("record")) &&
                name.kind == TokenKind::Ident && !scan::is_reserved(name.text)) {
                types_.emplace_back(name.text);
                ++pos_;
                if (kw.is("enum") && !skip_enum_constants()) return false;
                if (!members(false)) return false;
                if (pos_ >= toks_.size()) return false;
                ++pos_;  // '}'
                types_.pop_back();
                return true;
            }
        }

        const std::size_t end = skip_balanced(toks_, brace);
        if (end == npos) return false;

        std::optional<FunctionDecl> decl;
        if (header.size() == 1 && toks_[header[0]].is("static")) {
            decl.emplace();
            decl->simple_name = "<clinit>";
        } else {
            decl = method_header(header);
        }
        if (decl && !types_.empty()) {
            decl->fqn_guess = qualified(decl->simple_name);
            decl->decl_span = span_of(toks_[header.front()], toks_[brace]);
            decl->body_span = span_of(toks_[brace], toks_[end - 1]);
            out_->push_back(std::move(*decl));
        }
        pos_ = end;
        return true;
    }

    // `mods type name(params) [throws X, Y]` -> declaration, else nullopt.
    std::optional<FunctionDecl> method_header(const std::vector<std::size_t>& header) const {
        // find the last '(' whose ')' is followed only by a throws clause
        for (std::size_t k = header.size(); k-- > 0;) {
            if (!toks_[header[k]].is_punct('(')) continue;
            const std::size_t open = header[k];
            const std::size_t close = header[k + 1];
            bool tail_ok = true;
            for (std::size_t r = k + 2; r < header.size(); ++r) {
                const Token& t = toks_[header[r]];
                if (!(t.kind == TokenKind::Ident || t.is_punct('.') || t.is_punct(','))) tail_ok = false;
            }
            if (k + 2 < header.size() && !toks_[header[k + 2]].is("throws")) tail_ok = false;
            if (!tail_ok || k == 0) return std::nullopt;
            const Token& name = toks_[header[k - 1]];
            if (name.kind != TokenKind::Ident || scan::is_reserved(name.text)) return std::nullopt;
            FunctionDecl d;
            d.simple_name = std::string(name.text);
            d.param_types = parse_param_types(toks_, open, close);
            d.arity = d.param_types.size();
            return d;
        }
        return std::nullopt;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::string package_;
    std::vector<std::string> types_;
    std::vector<FunctionDecl>* out_ = nullptr;
};

bool scan_mini(const std::vector<Token>& toks, const std::string& stem, std::vector<FunctionDecl>& out) {
    std::size_t i = 0;
    while (i < toks.size()) {
        if (toks[i].is_punct('{')) {
            const auto end = skip_balanced(toks, i);
            if (end == npos) return false;
            i = end;
            continue;
        }
        if (toks[i].is_punct('}')) return false;
        if (!(toks[i].is("fn") && i + 2 < toks.size() && toks[i + 1].kind == TokenKind::Ident &&
              toks[i + 2].is_punct('('))) {
            ++i;
            continue;
        }
        const std::size_t fn = i;
        const std::size_t close = skip_balanced(toks, i + 2);
        if (close == npos) return false;
        if (close >= toks.size() || !toks[close].is_punct('{')) {
            i = close;
            continue;
        }
        const std::size_t end = skip_balanced(toks, close);
        if (end == npos) return false;
        FunctionDecl d;
        d.simple_name = std::string(toks[fn + 1].text);
        d.fqn_guess = stem + "." + d.simple_name;
        for (std::size_t k = fn + 3; k + 1 < close; ++k) {
            if (toks[k].kind == TokenKind::Ident) ++d.arity;
        }
        d.decl_span = span_of(toks[fn], toks[close]);
        d.body_span = span_of(toks[close], toks[end - 1]);
        out.push_back(std::move(d));
        i = end;
    }
    return true;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

SourceIndex index_source(std::string_view path, std::string_view content, Diagnostics& diagnostics) {
    SourceIndex index;
    index.path = normalize_path(path);
    index.content_hash = scan::content_hash(content);

    // MiniLang shares Java's `//` comments, so one blanker serves both.
    const std::string blanked = scan::blank_comments_and_strings(content);
    auto toks = scan::tokenize(blanked);
    std::vector<FunctionDecl> decls;
    bool ok = false;
    if (ends_with(path, ".mini")) {
        ok = scan_mini(toks, path_stem(path), decls);
    } else {
        ok = JavaScanner(scan::strip_annotations(toks)).run(decls);
    }
    if (!ok) {
        diagnostics.error("cannot scan '" + index.path + "': unbalanced braces or parentheses");
        return index;
    }
    std::stable_sort(decls.begin(), decls.end(),
                     [](const FunctionDecl& a, const FunctionDecl& b) { return a.decl_span < b.decl_span; });
    index.decls = std::move(decls);
    return index;
}

SourceIndex index_source(std::string_view path, std::string_view content) {
    Diagnostics ignored;
    return index_source(path, content, ignored);
}

std::string_view match_kind_name(MatchKind k) noexcept {
    switch (k) {
        case MatchKind::ExactFqn: return "ExactFqn";
        case MatchKind::NameArityFile: return "NameArityFile";
        case MatchKind::NameFile: return "NameFile";
        case MatchKind::Unmatched: return "Unmatched";
    }
    return "Unmatched";
}

std::string normalize_type(std::string_view type) {
    std::string flat;
    int depth = 0;
    for (const char c : type) {
        if (c == '<') {
            ++depth;
            continue;
        }
        if (c == '>') {
            --depth;
            continue;
        }
        if (depth > 0 || c == ' ' || c == '\t') continue;
        flat += c;
    }
    if (ends_with(flat, "...")) flat = flat.substr(0, flat.size() - 3) + "[]";
    const auto bracket = flat.find('[');
    std::string base = flat.substr(0, bracket);
    const std::string dims = bracket == std::string::npos ? "" : flat.substr(bracket);
    const auto dot = base.rfind('.');
    if (dot != std::string::npos) base = base.substr(dot + 1);
    return base + dims;
}

namespace {

bool signature_compatible(const FunctionDecl& d, const ingest::CostReportEntry& e) {
    const auto sig = ingest::signature_params(e.fqn);
    if (!sig) return true;
    if (sig->size() != d.arity) return false;
    for (std::size_t i = 0; i < sig->size(); ++i) {
        if (i >= d.param_types.size() || d.param_types[i].empty() || (*sig)[i].empty()) continue;
        if (normalize_type((*sig)[i]) != normalize_type(d.param_types[i])) return false;
    }
    return true;
}

}  // namespace

std::vector<MatchResult> match_decls(const SourceIndex& index, const ingest::CostDatabase& db) {
    using Entry = ingest::CostReportEntry;
    std::vector<MatchResult> results;
    results.reserve(index.decls.size());
    for (const auto& d : index.decls) results.push_back({d, nullptr, MatchKind::Unmatched});

    std::set<std::string_view> wanted;
    for (const auto& d : index.decls) wanted.insert(d.fqn_guess);
    std::vector<const Entry*> by_fqn;
    std::vector<const Entry*> same_file;
    for (const auto& [fqn, e] : db.entries()) {
        if (wanted.contains(ingest::base_fqn(fqn))) by_fqn.push_back(&e);
        if (paths_match(e.file, index.path)) same_file.push_back(&e);
    }

    std::set<const Entry*> consumed;
    auto stage = [&](const std::vector<const Entry*>& pool, MatchKind kind, auto&& candidate) {
        std::vector<std::vector<const Entry*>> cands(results.size());
        std::map<const Entry*, int> claims;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].entry != nullptr) continue;
            for (const Entry* e : pool) {
                if (consumed.contains(e) || !candidate(results[i].decl, *e)) continue;
                cands[i].push_back(e);
                ++claims[e];
            }
        }
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (cands[i].size() != 1 || claims[cands[i][0]] != 1) continue;
            results[i].entry = cands[i][0];
            results[i].matched_by = kind;
            consumed.insert(cands[i][0]);
        }
    };

    stage(by_fqn, MatchKind::ExactFqn, [](const FunctionDecl& d, const Entry& e) {
        return ingest::base_fqn(e.fqn) == d.fqn_guess && signature_compatible(d, e);
    });
    stage(same_file, MatchKind::NameArityFile, [](const FunctionDecl& d, const Entry& e) {
        const auto sig = ingest::signature_params(e.fqn);
        return sig && ingest::simple_name(e.fqn) == d.simple_name && sig->size() == d.arity;
    });
    stage(same_file, MatchKind::NameFile, [](const FunctionDecl& d, const Entry& e) {
        return ingest::simple_name(e.fqn) == d.simple_name;
    });
    return results;
}

}  // namespace perflens::source
