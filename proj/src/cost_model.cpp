#include "perflens/cost_model.hpp"

#include "perflens/error.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace perflens::cost {

namespace {

std::int64_t narrow(__int128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error("cost coefficient overflow");
    }
    return static_cast<std::int64_t>(v);
}

}  // namespace

struct RationalAccess {
    static Rational make(std::int64_t num, std::int64_t den) {
        Rational r;
        r.num_ = num;
        r.den_ = den;
        return r;
    }
};

namespace {

Rational make_reduced(__int128 num, __int128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    return RationalAccess::make(narrow(num), narrow(den));
}

Rational pow_int(std::uint64_t base, unsigned exp) {
    Rational r{1};
    for (unsigned i = 0; i < exp; ++i) {
        r = r * Rational(narrow(static_cast<__int128>(base)));
    }
    return r;
}

bool is_symbol_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

bool is_symbol_body(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$' || c == '.';
}

bool is_bracket_body(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '*';
}

}  // namespace

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
    if (denominator == 0) {
        throw std::invalid_argument("zero denominator");
    }
    *this = make_reduced(numerator, denominator);
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    const __int128 num = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
    const __int128 den = static_cast<__int128>(a.den_) * b.den_;
    return make_reduced(num, den);
}

Rational operator*(const Rational& a, const Rational& b) {
    return make_reduced(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Symbol

Symbol::Symbol(std::string name) : name_(std::move(name)) {
    if (!is_valid(name_)) {
        throw std::invalid_argument("invalid symbol: '" + name_ + "'");
    }
}

bool Symbol::is_valid(std::string_view name) noexcept {
    if (name.empty() || !is_symbol_start(name.front()) || name == "log") return false;
    for (std::size_t i = 1; i < name.size(); ++i) {
        const char c = name[i];
        if (c == '[') {
            const auto close = name.find(']', i + 1);
            if (close == std::string_view::npos) return false;
            for (std::size_t j = i + 1; j < close; ++j) {
                if (!is_bracket_body(name[j])) return false;
            }
            i = close;
            continue;
        }
        if (!is_symbol_body(c)) return false;
    }
    return name.back() != '.';
}

// ---------------------------------------------------------------------------
// Factors

DegreePair Factors::degree() const noexcept {
    DegreePair d;
    for (const auto& [_, e] : powers) d.poly_degree += e;
    for (const auto& [_, e] : log_powers) d.log_degree += e;
    return d;
}

bool Factors::dominates(const Factors& other) const noexcept {
    auto covers = [](const std::map<std::string, unsigned>& mine, const std::map<std::string, unsigned>& theirs) {
        for (const auto& [sym, e] : theirs) {
            const auto it = mine.find(sym);
            if (it == mine.end() || it->second < e) return false;
        }
        return true;
    };
    return covers(powers, other.powers) && covers(log_powers, other.log_powers);
}

std::string Factors::render() const {
    std::string out;
    auto emit = [&out](const std::string& piece) {
        if (!out.empty()) out += " × ";
        out += piece;
    };
    for (const auto& [sym, e] : powers) {
        emit(e == 1 ? sym : sym + " ^ " + std::to_string(e));
    }
    for (const auto& [sym, e] : log_powers) {
        for (unsigned i = 0; i < e; ++i) emit("log(" + sym + ")");
    }
    return out;
}

namespace {

bool canonical_less(const Factors& a, const Factors& b) {
    const auto da = a.degree();
    const auto db = b.degree();
    if (da != db) return da > db;
    return a < b;
}

Factors multiply_factors(const Factors& a, const Factors& b) {
    Factors r = a;
    for (const auto& [sym, e] : b.powers) r.powers[sym] += e;
    for (const auto& [sym, e] : b.log_powers) r.log_powers[sym] += e;
    return r;
}

void accumulate(std::map<Factors, Rational>& terms, const Factors& f, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms.try_emplace(f, c);
    if (!inserted) {
        it->second = it->second + c;
        if (it->second.is_zero()) terms.erase(it);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// SymbolicCost

SymbolicCost SymbolicCost::unknown() {
    SymbolicCost c;
    c.unknown_ = true;
    return c;
}

SymbolicCost SymbolicCost::constant(Rational value) {
    return from_monomials({Monomial{value, {}}});
}

SymbolicCost SymbolicCost::symbol(const Symbol& s, unsigned power) {
    Monomial m;
    if (power > 0) m.factors.powers[s.name()] = power;
    return from_monomials({m});
}

SymbolicCost SymbolicCost::log_of(const Symbol& s) {
    Monomial m;
    m.factors.log_powers[s.name()] = 1;
    return from_monomials({m});
}

SymbolicCost SymbolicCost::from_monomials(const std::vector<Monomial>& monomials) {
    SymbolicCost c;
    for (const auto& m : monomials) {
        if (m.coefficient < Rational(0)) {
            throw std::invalid_argument("negative cost coefficient");
        }
        Factors f;
        for (const auto& [sym, e] : m.factors.powers) {
            if (e > 0) f.powers[sym] = e;
        }
        for (const auto& [sym, e] : m.factors.log_powers) {
            if (e > 0) f.log_powers[sym] = e;
        }
        accumulate(c.terms_, f, m.coefficient);
    }
    return c;
}

std::vector<Monomial> SymbolicCost::monomials() const {
    std::vector<Monomial> out;
    out.reserve(terms_.size());
    for (const auto& [f, c] : terms_) out.push_back({c, f});
    std::sort(out.begin(), out.end(),
              [](const Monomial& a, const Monomial& b) { return canonical_less(a.factors, b.factors); });
    return out;
}

std::string SymbolicCost::render() const {
    if (unknown_) return "unknown";
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& m : monomials()) {
        if (!out.empty()) out += " + ";
        if (m.factors.is_constant()) {
            out += m.coefficient.to_string();
        } else if (m.coefficient == Rational(1)) {
            out += m.factors.render();
        } else {
            out += m.coefficient.to_string() + " × " + m.factors.render();
        }
    }
    return out;
}

SymbolicCost add(const SymbolicCost& a, const SymbolicCost& b) {
    if (a.unknown_ || b.unknown_) return SymbolicCost::unknown();
    SymbolicCost r = a;
    for (const auto& [f, c] : b.terms_) accumulate(r.terms_, f, c);
    return r;
}

SymbolicCost mul(const SymbolicCost& a, const SymbolicCost& b) {
    if (a.unknown_ || b.unknown_) return SymbolicCost::unknown();
    SymbolicCost r;
    for (const auto& [fa, ca] : a.terms_) {
        for (const auto& [fb, cb] : b.terms_) {
            accumulate(r.terms_, multiply_factors(fa, fb), ca * cb);
        }
    }
    return r;
}

SymbolicCost join(const SymbolicCost& a, const SymbolicCost& b) {
    if (a.unknown_ || b.unknown_) return SymbolicCost::unknown();
    SymbolicCost r = a;
    for (const auto& [f, c] : b.terms_) {
        auto [it, inserted] = r.terms_.try_emplace(f, c);
        if (!inserted && it->second < c) it->second = c;
    }
    return r;
}

std::uint64_t folded_log(std::uint64_t v) noexcept {
    // ceil(log2(v + 1)) is the bit width of v.
    std::uint64_t bits = 0;
    while (v != 0) {
        ++bits;
        v >>= 1U;
    }
    return std::max<std::uint64_t>(1, bits);
}

SymbolicCost substitute(const SymbolicCost& c, const Bindings& bindings) {
    if (c.is_unknown()) return c;
    std::vector<Monomial> out;
    for (const auto& m : c.monomials()) {
        Monomial r{m.coefficient, {}};
        for (const auto& [sym, e] : m.factors.powers) {
            const auto it = bindings.find(sym);
            if (it == bindings.end()) {
                r.factors.powers[sym] += e;
            } else if (const auto* renamed = std::get_if<Symbol>(&it->second)) {
                r.factors.powers[renamed->name()] += e;
            } else {
                r.coefficient = r.coefficient * pow_int(std::get<std::uint64_t>(it->second), e);
            }
        }
        for (const auto& [sym, e] : m.factors.log_powers) {
            const auto it = bindings.find(sym);
            if (it == bindings.end()) {
                r.factors.log_powers[sym] += e;
            } else if (const auto* renamed = std::get_if<Symbol>(&it->second)) {
                r.factors.log_powers[renamed->name()] += e;
            } else {
                r.coefficient = r.coefficient * pow_int(folded_log(std::get<std::uint64_t>(it->second)), e);
            }
        }
        out.push_back(std::move(r));
    }
    return SymbolicCost::from_monomials(out);
}

std::optional<Rational> evaluate(const SymbolicCost& c, const Valuation& valuation) {
    if (c.is_unknown()) return std::nullopt;
    Rational total{0};
    for (const auto& [f, coeff] : c.terms()) {
        Rational term = coeff;
        for (const auto& [sym, e] : f.powers) {
            const auto it = valuation.find(sym);
            if (it == valuation.end()) return std::nullopt;
            term = term * pow_int(it->second, e);
        }
        for (const auto& [sym, e] : f.log_powers) {
            const auto it = valuation.find(sym);
            if (it == valuation.end()) return std::nullopt;
            term = term * pow_int(folded_log(it->second), e);
        }
        total = total + term;
    }
    return total;
}

std::optional<DegreePair> degree(const SymbolicCost& c) {
    if (c.is_unknown()) return std::nullopt;
    DegreePair best;
    for (const auto& [f, _] : c.terms()) best = std::max(best, f.degree());
    return best;
}

// ---------------------------------------------------------------------------
// Big-O

BigO::BigO(std::vector<Factors> leading) {
    std::erase_if(leading, [](const Factors& f) { return f.is_constant(); });
    std::sort(leading.begin(), leading.end(), canonical_less);
    leading.erase(std::unique(leading.begin(), leading.end()), leading.end());
    for (const auto& f : leading) {
        const bool dominated = std::any_of(leading.begin(), leading.end(), [&](const Factors& g) {
            return g != f && g.dominates(f);
        });
        if (!dominated) leading_.push_back(f);
    }
}

bool BigO::covers(const BigO& other) const noexcept {
    if (other.is_constant()) return true;
    return std::all_of(other.leading_.begin(), other.leading_.end(), [this](const Factors& f) {
        return std::any_of(leading_.begin(), leading_.end(), [&f](const Factors& g) { return g.dominates(f); });
    });
}

SymbolicCost BigO::to_cost() const {
    if (leading_.empty()) return SymbolicCost::constant(1);
    std::vector<Monomial> ms;
    for (const auto& f : leading_) ms.push_back({Rational(1), f});
    return SymbolicCost::from_monomials(ms);
}

std::string BigO::render() const {
    if (leading_.empty()) return "O(1)";
    std::string out = "O(";
    for (std::size_t i = 0; i < leading_.size(); ++i) {
        if (i != 0) out += " + ";
        out += leading_[i].render();
    }
    return out + ")";
}

std::optional<BigO> big_o(const SymbolicCost& c) {
    if (c.is_unknown()) return std::nullopt;
    std::vector<Factors> keys;
    for (const auto& [f, _] : c.terms()) keys.push_back(f);
    return BigO(std::move(keys));
}

std::string big_o_text(const SymbolicCost& c) {
    const auto b = big_o(c);
    return b ? b->render() : std::string("unknown");
}

// ---------------------------------------------------------------------------
// Severity

Severity severity(const SymbolicCost& c) {
    const auto d = degree(c);
    if (!d) return Severity::Unknown;
    if (*d == DegreePair{0, 0}) return Severity::Constant;
    if (*d == DegreePair{1, 0}) return Severity::Linear;
    return Severity::Polynomial;
}

std::string_view severity_color(Severity s) noexcept {
    switch (s) {
        case Severity::Constant: return "green";
        case Severity::Linear: return "yellow";
        case Severity::Polynomial: return "red";
        case Severity::Unknown: return "gray";
    }
    return "gray";
}

std::string_view severity_name(Severity s) noexcept {
    switch (s) {
        case Severity::Constant: return "constant";
        case Severity::Linear: return "linear";
        case Severity::Polynomial: return "polynomial";
        case Severity::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Severity> parse_severity(std::string_view name) noexcept {
    for (auto s : {Severity::Constant, Severity::Linear, Severity::Polynomial, Severity::Unknown}) {
        if (severity_name(s) == name) return s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Evolution

namespace {

// Every monomial of `a` appears in `b` with a coefficient at least as large.
bool keywise_le(const SymbolicCost& a, const SymbolicCost& b) {
    for (const auto& [f, c] : a.terms()) {
        const auto it = b.terms().find(f);
        if (it == b.terms().end() || it->second < c) return false;
    }
    return true;
}

}  // namespace

EvolutionStep compare_evolution(const SymbolicCost& old_cost, const SymbolicCost& new_cost) {
    EvolutionStep step{old_cost, new_cost, Verdict::Same};
    if (old_cost.is_unknown() || new_cost.is_unknown()) {
        step.verdict = old_cost.is_unknown() && new_cost.is_unknown() ? Verdict::Same : Verdict::Indeterminate;
        return step;
    }
    if (old_cost == new_cost) return step;

    const auto d_old = *degree(old_cost);
    const auto d_new = *degree(new_cost);
    if (d_new != d_old) {
        step.verdict = d_new < d_old ? Verdict::Improved : Verdict::Regressed;
        return step;
    }

    const auto o_old = *big_o(old_cost);
    const auto o_new = *big_o(new_cost);
    const bool old_covers_new = o_old.covers(o_new);
    const bool new_covers_old = o_new.covers(o_old);
    if (old_covers_new != new_covers_old) {
        step.verdict = old_covers_new ? Verdict::Improved : Verdict::Regressed;
    } else if (!old_covers_new) {
        step.verdict = Verdict::Changed;
    } else if (keywise_le(new_cost, old_cost)) {
        // Same growth class; fall back to the exact coefficients.
        step.verdict = Verdict::Improved;
    } else if (keywise_le(old_cost, new_cost)) {
        step.verdict = Verdict::Regressed;
    } else {
        step.verdict = Verdict::Changed;
    }
    return step;
}

std::string EvolutionStep::text() const {
    return big_o_text(old_cost) + " → " + big_o_text(new_cost);
}

std::string_view verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::Improved: return "Improved";
        case Verdict::Regressed: return "Regressed";
        case Verdict::Same: return "Same";
        case Verdict::Changed: return "Changed";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

Verdict mirror(Verdict v) noexcept {
    if (v == Verdict::Improved) return Verdict::Regressed;
    if (v == Verdict::Regressed) return Verdict::Improved;
    return v;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class TokKind { Number, Symbol, Log, Plus, Mul, Caret, End };

struct Tok {
    TokKind kind = TokKind::End;
    std::string text;
    Rational value;
    std::size_t pos = 0;
};

class PolyLexer {
public:
    explicit PolyLexer(std::string_view text) : text_(text) {}

    Tok next() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
        Tok t;
        t.pos = pos_;
        if (pos_ >= text_.size()) return t;
        const char c = text_[pos_];
        if (c == '+') {
            ++pos_;
            t.kind = TokKind::Plus;
            return t;
        }
        if (c == '*') {
            ++pos_;
            t.kind = TokKind::Mul;
            return t;
        }
        if (c == '^') {
            ++pos_;
            t.kind = TokKind::Caret;
            return t;
        }
        if (text_.substr(pos_, 3) == "⋅") {
            pos_ += 3;
            t.kind = TokKind::Mul;
            return t;
        }
        if (text_.substr(pos_, 2) == "×") {
            pos_ += 2;
            t.kind = TokKind::Mul;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
            t.kind = TokKind::Number;
            const auto num = read_digits();
            if (pos_ < text_.size() && text_[pos_] == '/') {
                ++pos_;
                if (pos_ >= text_.size() || std::isdigit(static_cast<unsigned char>(text_[pos_])) == 0) {
                    throw ParseError("expected denominator", 1, pos_ + 1);
                }
                const auto den = read_digits();
                if (den == 0) throw ParseError("zero denominator", 1, t.pos + 1);
                t.value = Rational(num, den);
            } else {
                t.value = Rational(num);
            }
            return t;
        }
        if (is_symbol_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size()) {
                const char d = text_[pos_];
                if (d == '[') {
                    const auto close = text_.find(']', pos_);
                    if (close == std::string_view::npos) throw ParseError("unterminated '['", 1, pos_ + 1);
                    pos_ = close + 1;
                } else if (is_symbol_body(d)) {
                    ++pos_;
                } else {
                    break;
                }
            }
            t.text = std::string(text_.substr(start, pos_ - start));
            if (t.text == "log" && pos_ < text_.size() && text_[pos_] == '(') {
                ++pos_;
                Tok inner = next();
                if (inner.kind != TokKind::Symbol) throw ParseError("expected symbol inside log()", 1, inner.pos + 1);
                if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError("expected ')'", 1, pos_ + 1);
                ++pos_;
                t.kind = TokKind::Log;
                t.text = inner.text;
                return t;
            }
            if (!Symbol::is_valid(t.text)) throw ParseError("invalid symbol '" + t.text + "'", 1, start + 1);
            t.kind = TokKind::Symbol;
            return t;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", 1, pos_ + 1);
    }

private:
    std::int64_t read_digits() {
        const std::size_t start = pos_;
        __int128 v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > std::numeric_limits<std::int64_t>::max()) throw ParseError("number too large", 1, start + 1);
            ++pos_;
        }
        return static_cast<std::int64_t>(v);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

class PolyParser {
public:
    explicit PolyParser(std::string_view text) : lexer_(text) { advance(); }

    SymbolicCost parse() {
        std::vector<Monomial> terms;
        terms.push_back(term());
        while (cur_.kind == TokKind::Plus) {
            advance();
            terms.push_back(term());
        }
        if (cur_.kind != TokKind::End) throw ParseError("unexpected token", 1, cur_.pos + 1);
        return SymbolicCost::from_monomials(terms);
    }

private:
    void advance() { cur_ = lexer_.next(); }

    Monomial term() {
        Monomial m;
        factor(m);
        while (cur_.kind == TokKind::Mul) {
            advance();
            factor(m);
        }
        return m;
    }

    void factor(Monomial& m) {
        switch (cur_.kind) {
            case TokKind::Number:
                m.coefficient = m.coefficient * cur_.value;
                advance();
                return;
            case TokKind::Log:
                m.factors.log_powers[cur_.text] += 1;
                advance();
                return;
            case TokKind::Symbol: {
                const std::string name = cur_.text;
                advance();
                unsigned exp = 1;
                if (cur_.kind == TokKind::Caret) {
                    advance();
                    if (cur_.kind != TokKind::Number || !cur_.value.is_integer() || cur_.value.is_zero()) {
                        throw ParseError("expected positive integer exponent", 1, cur_.pos + 1);
                    }
                    exp = static_cast<unsigned>(cur_.value.numerator());
                    advance();
                }
                m.factors.powers[name] += exp;
                return;
            }
            case TokKind::End: throw ParseError("unexpected end of input", 1, cur_.pos + 1);
            default: throw ParseError("expected coefficient or symbol", 1, cur_.pos + 1);
        }
    }

    PolyLexer lexer_;
    Tok cur_;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
    return s;
}

}  // namespace

SymbolicCost parse_polynomial(std::string_view text) {
    const auto t = trim(text);
    if (t == "unknown" || t == "⊤" || t == "Top") return SymbolicCost::unknown();
    return PolyParser(text).parse();
}

}  // namespace perflens::cost
