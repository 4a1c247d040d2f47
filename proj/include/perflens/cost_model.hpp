#pragma once

// Symbolic worst-case cost calculus: exact multivariate polynomials with
// optional log factors, an absorbing Unknown, Big-O abstraction, severity
// classification and run-to-run evolution verdicts.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace perflens::cost {

/// Exact non-negative-friendly rational with 64-bit parts; always reduced and
/// with a positive denominator. Arithmetic throws std::overflow_error rather
/// than wrapping.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
    Rational(std::int64_t numerator, std::int64_t denominator);

    [[nodiscard]] std::int64_t numerator() const noexcept { return num_; }
    [[nodiscard]] std::int64_t denominator() const noexcept { return den_; }
    [[nodiscard]] bool is_zero() const noexcept { return num_ == 0; }
    [[nodiscard]] bool is_integer() const noexcept { return den_ == 1; }

    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    friend struct RationalAccess;

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// A named size parameter such as `n`, `indices.length` or
/// `indicesSplit[*].length`.
class Symbol {
public:
    /// Throws std::invalid_argument when `name` is not a valid symbol.
    explicit Symbol(std::string name);

    [[nodiscard]] static bool is_valid(std::string_view name) noexcept;
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    friend bool operator==(const Symbol&, const Symbol&) = default;
    friend auto operator<=>(const Symbol&, const Symbol&) = default;

private:
    std::string name_;
};

/// Lexicographic (poly_degree, log_degree) classification key.
struct DegreePair {
    unsigned poly_degree = 0;
    unsigned log_degree = 0;

    friend bool operator==(const DegreePair&, const DegreePair&) = default;
    friend auto operator<=>(const DegreePair&, const DegreePair&) = default;
};

/// The symbol part of a monomial. Exponents are always positive; a symbol with
/// exponent zero is simply absent.
struct Factors {
    std::map<std::string, unsigned> powers;
    std::map<std::string, unsigned> log_powers;

    [[nodiscard]] bool is_constant() const noexcept { return powers.empty() && log_powers.empty(); }
    [[nodiscard]] DegreePair degree() const noexcept;
    /// True when every exponent of `other` (plain and log) is <= ours.
    [[nodiscard]] bool dominates(const Factors& other) const noexcept;
    [[nodiscard]] std::string render() const;

    friend bool operator==(const Factors&, const Factors&) = default;
    friend auto operator<=>(const Factors&, const Factors&) = default;
};

struct Monomial {
    Rational coefficient{1};
    Factors factors;

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

class SymbolicCost {
public:
    /// The zero cost (empty polynomial).
    SymbolicCost() = default;

    [[nodiscard]] static SymbolicCost unknown();
    [[nodiscard]] static SymbolicCost constant(Rational value);
    [[nodiscard]] static SymbolicCost symbol(const Symbol& s, unsigned power = 1);
    [[nodiscard]] static SymbolicCost log_of(const Symbol& s);
    /// Builds a canonical polynomial; monomials with equal factors are merged
    /// and zero coefficients dropped. Negative coefficients are rejected.
    [[nodiscard]] static SymbolicCost from_monomials(const std::vector<Monomial>& monomials);

    [[nodiscard]] bool is_unknown() const noexcept { return unknown_; }
    [[nodiscard]] bool is_zero() const noexcept { return !unknown_ && terms_.empty(); }
    /// Canonical order: degree descending, then factors ascending.
    [[nodiscard]] std::vector<Monomial> monomials() const;
    [[nodiscard]] const std::map<Factors, Rational>& terms() const noexcept { return terms_; }

    /// Grammar-conforming text; "unknown" for Unknown and "0" for zero.
    [[nodiscard]] std::string render() const;

    friend bool operator==(const SymbolicCost&, const SymbolicCost&) = default;

private:
    bool unknown_ = false;
    std::map<Factors, Rational> terms_;

    friend SymbolicCost add(const SymbolicCost&, const SymbolicCost&);
    friend SymbolicCost mul(const SymbolicCost&, const SymbolicCost&);
    friend SymbolicCost join(const SymbolicCost&, const SymbolicCost&);
};

using Binding = std::variant<Symbol, std::uint64_t>;
using Bindings = std::map<std::string, Binding>;
using Valuation = std::map<std::string, std::uint64_t>;

[[nodiscard]] SymbolicCost add(const SymbolicCost& a, const SymbolicCost& b);
[[nodiscard]] SymbolicCost mul(const SymbolicCost& a, const SymbolicCost& b);
[[nodiscard]] SymbolicCost join(const SymbolicCost& a, const SymbolicCost& b);
/// Simultaneous substitution. Unbound symbols pass through unchanged.
[[nodiscard]] SymbolicCost substitute(const SymbolicCost& c, const Bindings& bindings);
/// Integer value used for log(v) when v is substituted numerically:
/// max(1, ceil(log2(v + 1))).
[[nodiscard]] std::uint64_t folded_log(std::uint64_t v) noexcept;
/// nullopt for Unknown or when a symbol has no value in `valuation`.
[[nodiscard]] std::optional<Rational> evaluate(const SymbolicCost& c, const Valuation& valuation);

[[nodiscard]] std::optional<DegreePair> degree(const SymbolicCost& c);

/// Dominance-maximal monomials with coefficients dropped.
class BigO {
public:
    BigO() = default;  // O(1)
    explicit BigO(std::vector<Factors> leading);

    [[nodiscard]] const std::vector<Factors>& leading() const noexcept { return leading_; }
    [[nodiscard]] bool is_constant() const noexcept { return leading_.empty(); }
    /// Every member of `other` is dominated by some member of this set.
    [[nodiscard]] bool covers(const BigO& other) const noexcept;
    [[nodiscard]] SymbolicCost to_cost() const;
    /// e.g. "O(indices.length × indicesSplit[*].length)" or "O(1)".
    [[nodiscard]] std::string render() const;

    friend bool operator==(const BigO&, const BigO&) = default;

private:
    std::vector<Factors> leading_;  // canonical order, constant never present
};

[[nodiscard]] std::optional<BigO> big_o(const SymbolicCost& c);
/// big_o(c).render(), or "unknown".
[[nodiscard]] std::string big_o_text(const SymbolicCost& c);

enum class Severity { Constant, Linear, Polynomial, Unknown };

[[nodiscard]] Severity severity(const SymbolicCost& c);
/// Fixed display mapping: green, yellow, red, gray.
[[nodiscard]] std::string_view severity_color(Severity s) noexcept;
/// Lowercase level name: "constant", "linear", "polynomial", "unknown".
[[nodiscard]] std::string_view severity_name(Severity s) noexcept;
[[nodiscard]] std::optional<Severity> parse_severity(std::string_view name) noexcept;

enum class Verdict { Improved, Regressed, Same, Changed, Indeterminate };

struct EvolutionStep {
    SymbolicCost old_cost;
    SymbolicCost new_cost;
    Verdict verdict = Verdict::Same;

    /// "O(m × n) → O(n)"
    [[nodiscard]] std::string text() const;
};

[[nodiscard]] EvolutionStep compare_evolution(const SymbolicCost& old_cost, const SymbolicCost& new_cost);
[[nodiscard]] std::string_view verdict_name(Verdict v) noexcept;
[[nodiscard]] Verdict mirror(Verdict v) noexcept;

/// Parses the polynomial text grammar; "unknown" and "⊤" give Unknown.
/// Throws ParseError (line 1, column = byte offset + 1) on malformed input.
[[nodiscard]] SymbolicCost parse_polynomial(std::string_view text);

}  // namespace perflens::cost
