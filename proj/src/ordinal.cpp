#include "ittm/ordinal.hpp"

#include <cassert>
#include <cctype>
#include <stdexcept>

namespace ittm {

Ordinal::Ordinal(std::uint64_t n) : Ordinal(BigNat(n)) {}

Ordinal::Ordinal(const BigNat& n) {
    if (n > 0) terms_.push_back(Term{Ordinal(), n});
}

Ordinal Ordinal::omega() { return omega_power(Ordinal(std::uint64_t{1})); }

Ordinal Ordinal::omega_power(const Ordinal& e) {
    Ordinal r;
    r.terms_.push_back(Term{e, 1});
    return r;
}

Ordinal Ordinal::omega_power(std::uint64_t e) { return omega_power(Ordinal(e)); }

bool Ordinal::is_finite() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent.is_zero());
}

BigNat Ordinal::finite_value() const {
    if (terms_.empty()) return 0;
    assert(is_finite());
    return terms_[0].coefficient;
}

Cmp Ordinal::compare(const Ordinal& a, const Ordinal& b) {
    const std::size_t n = std::min(a.terms_.size(), b.terms_.size());
    for (std::size_t i = 0; i < n; ++i) {
        Cmp e = compare(a.terms_[i].exponent, b.terms_[i].exponent);
        if (e != Cmp::Equal) return e;
        if (a.terms_[i].coefficient != b.terms_[i].coefficient)
            return a.terms_[i].coefficient < b.terms_[i].coefficient ? Cmp::Less : Cmp::Greater;
    }
    if (a.terms_.size() == b.terms_.size()) return Cmp::Equal;
    return a.terms_.size() < b.terms_.size() ? Cmp::Less : Cmp::Greater;
}

Ordinal Ordinal::add(const Ordinal& a, const Ordinal& b) {
    if (b.is_zero()) return a;
    const Ordinal& lead_exp = b.terms_[0].exponent;
    Ordinal r;
    // Keep the terms of a that survive addition of b: those with exponent >= lead_exp.
    std::size_t i = 0;
    while (i < a.terms_.size() && compare(a.terms_[i].exponent, lead_exp) == Cmp::Greater) {
        r.terms_.push_back(a.terms_[i]);
        ++i;
    }
    if (i < a.terms_.size() && compare(a.terms_[i].exponent, lead_exp) == Cmp::Equal) {
        r.terms_.push_back(Term{lead_exp, a.terms_[i].coefficient + b.terms_[0].coefficient});
    } else {
        r.terms_.push_back(b.terms_[0]);
    }
    for (std::size_t j = 1; j < b.terms_.size(); ++j) r.terms_.push_back(b.terms_[j]);
    return r;
}

Ordinal Ordinal::successor() const { return add(*this, Ordinal(std::uint64_t{1})); }

bool Ordinal::is_limit() const {
    return !terms_.empty() && !terms_.back().exponent.is_zero();
}

Ordinal Ordinal::block_limit(std::uint32_t level) const {
    assert(level >= 1);
    const Ordinal lv(std::uint64_t{level});
    Ordinal r;
    for (const Term& t : terms_) {
        if (compare(t.exponent, lv) != Cmp::Less) r.terms_.push_back(t);
    }
    return add(r, omega_power(lv));
}

Ordinal Ordinal::from_terms(std::vector<Term> terms) {
    Ordinal r;
    r.terms_ = std::move(terms);
#ifndef NDEBUG
    for (std::size_t i = 0; i < r.terms_.size(); ++i) {
        assert(r.terms_[i].coefficient >= 1);
        if (i + 1 < r.terms_.size())
            assert(compare(r.terms_[i].exponent, r.terms_[i + 1].exponent) == Cmp::Greater);
    }
#endif
    return r;
}

namespace {

void format_term(const Term& t, std::string& out) {
    if (t.exponent.is_zero()) {
        out += t.coefficient.str();
        return;
    }
    out += 'w';
    const Ordinal& e = t.exponent;
    bool exp_is_one = e.is_finite() && e.finite_value() == 1;
    if (!exp_is_one) {
        out += '^';
        if (e.is_finite()) {
            out += e.finite_value().str();
        } else if (e.terms().size() == 1 && e.terms()[0].coefficient == 1 &&
                   e.terms()[0].exponent.is_finite() && e.terms()[0].exponent.finite_value() == 1) {
            out += 'w';  // w^w prints without parentheses
        } else {
            out += '(';
            out += format_cnf(e);
            out += ')';
        }
    }
    if (t.coefficient != 1) {
        out += '*';
        out += t.coefficient.str();
    }
}

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw CnfParseError{msg, pos}; }

    bool eof() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }

    BigNat number() {
        if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digit");
        std::size_t start = pos;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
        return BigNat(s.substr(start, pos - start));
    }

    Ordinal exponent() {
        if (eof()) fail("expected exponent");
        if (peek() == '(') {
            ++pos;
            Ordinal e = ordinal();
            if (eof() || peek() != ')') fail("expected ')'");
            ++pos;
            return e;
        }
        if (peek() == 'w') {
            ++pos;
            return Ordinal::omega();
        }
        return Ordinal(number());
    }

    Ordinal term() {
        if (eof()) fail("expected term");
        if (peek() == 'w') {
            ++pos;
            Ordinal e(std::uint64_t{1});
            if (!eof() && peek() == '^') {
                ++pos;
                e = exponent();
            }
            BigNat c = 1;
            if (!eof() && peek() == '*') {
                ++pos;
                c = number();
                if (c == 0) fail("coefficient must be positive");
            }
            if (e.is_zero()) return Ordinal(c);
            return Ordinal::from_terms({Term{e, c}});
        }
        return Ordinal(number());
    }

    Ordinal ordinal() {
        // Terms are summed with ordinal addition, so non-canonical input
        // such as "1+w" or "w+w" parses to its canonical form.
        Ordinal acc = term();
        while (!eof() && peek() == '+') {
            ++pos;
            acc = Ordinal::add(acc, term());
        }
        return acc;
    }
};

}  // namespace

std::string format_cnf(const Ordinal& a) {
    if (a.is_zero()) return "0";
    std::string out;
    for (std::size_t i = 0; i < a.terms().size(); ++i) {
        if (i) out += '+';
        format_term(a.terms()[i], out);
    }
    return out;
}

Ordinal parse_cnf(const std::string& text) {
    Parser p{text};
    // Skip surrounding whitespace; none allowed inside.
    while (!p.eof() && std::isspace(static_cast<unsigned char>(p.peek()))) ++p.pos;
    Ordinal a = p.ordinal();
    while (!p.eof() && std::isspace(static_cast<unsigned char>(p.peek()))) ++p.pos;
    if (!p.eof()) p.fail("trailing input");
    return a;
}

}  // namespace ittm
