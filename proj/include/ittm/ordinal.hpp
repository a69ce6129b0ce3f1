// Ordinals below epsilon_0 in Cantor normal form.
//
// An ordinal is a finite sum  w^e1*c1 + w^e2*c2 + ... + w^ek*ck  with the
// exponents e1 > e2 > ... > ek themselves ordinals of the same kind and the
// coefficients positive integers.  The empty sum is 0.  This canonical shape
// is the simulator's clock: stages, block limits and reported halting stages
// are all values of this type.

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ittm {

using BigNat = boost::multiprecision::cpp_int;

enum class Cmp { Less, Equal, Greater };

struct Term;

class Ordinal {
public:
    Ordinal() = default;                       // zero
    explicit Ordinal(std::uint64_t n);         // finite ordinal n
    explicit Ordinal(const BigNat& n);

    static Ordinal omega();                    // w
    static Ordinal omega_power(const Ordinal& e);  // w^e
    static Ordinal omega_power(std::uint64_t e);

    bool is_zero() const { return terms_.empty(); }
    bool is_finite() const;
    // Value as a natural number; only valid when is_finite().
    BigNat finite_value() const;

    const std::vector<Term>& terms() const { return terms_; }

    // Total order consistent with ordinal order.
    static Cmp compare(const Ordinal& a, const Ordinal& b);

    // Ordinal sum (left absorption: 1 + w == w).
    static Ordinal add(const Ordinal& a, const Ordinal& b);

    Ordinal successor() const;                 // a + 1
    bool is_limit() const;                     // a != 0 and last exponent != 0

    // Least ordinal of the form gamma + w^level strictly above this one:
    // drop all terms with exponent < level, then add w^level.
    Ordinal block_limit(std::uint32_t level) const;

    bool operator==(const Ordinal& o) const { return compare(*this, o) == Cmp::Equal; }
    bool operator!=(const Ordinal& o) const { return !(*this == o); }
    bool operator<(const Ordinal& o) const { return compare(*this, o) == Cmp::Less; }
    bool operator<=(const Ordinal& o) const { return compare(*this, o) != Cmp::Greater; }
    bool operator>(const Ordinal& o) const { return compare(*this, o) == Cmp::Greater; }
    bool operator>=(const Ordinal& o) const { return compare(*this, o) != Cmp::Less; }

    // Builds from raw terms; asserts canonical shape in debug builds.
    static Ordinal from_terms(std::vector<Term> terms);

private:
    std::vector<Term> terms_;  // strictly descending exponents, coefficients >= 1
};

struct Term {
    Ordinal exponent;
    BigNat coefficient;  // >= 1
};

// Text form.  Grammar (docs/asm.md):
//   ordinal := "0" | term ("+" term)*
//   term    := "w" ["^" exp] ["*" nat] | nat
//   exp     := nat | "w" | "(" ordinal ")"
// Examples: "w^2+w*3+1", "w", "42".
std::string format_cnf(const Ordinal& a);

// Throws CnfParseError with a byte offset on malformed input.
Ordinal parse_cnf(const std::string& text);

struct CnfParseError {
    std::string message;
    std::size_t position;
};

}  // namespace ittm
