#include "ittm/real.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace ittm {

Cell pair_index(Cell n, Cell m) {
    Cell s = n + m;
    return s * (s + 1) / 2 + m;
}

std::pair<Cell, Cell> unpair(Cell k) {
    // s = largest s with s(s+1)/2 <= k
    Cell s = static_cast<Cell>((std::sqrt(8.0L * static_cast<long double>(k) + 1.0L) - 1.0L) / 2.0L);
    while (s * (s + 1) / 2 > k) --s;
    while ((s + 1) * (s + 2) / 2 <= k) ++s;
    Cell m = k - s * (s + 1) / 2;
    return {s - m, m};
}

namespace {

std::map<std::string, GeneratorInfo>& registry() {
    static std::map<std::string, GeneratorInfo> r;
    return r;
}

}  // namespace

void register_generator(const std::string& name, GeneratorInfo info) {
    registry()[name] = std::move(info);
}

bool has_generator(const std::string& name) { return registry().count(name) > 0; }

const GeneratorInfo& generator(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw std::runtime_error("unknown generator: " + name);
    return it->second;
}

void register_builtin_generators() {
    if (has_generator("desc_chain")) return;
    // Successor-link chain: n <| m  iff  n == m+1.  Ill-founded by
    // construction (… <| 2 <| 1 <| 0) and not transitive.
    register_generator("desc_chain", GeneratorInfo{[](Cell k) {
                                                       auto [n, m] = unpair(k);
                                                       return n == m + 1;
                                                   },
                                                   std::nullopt});
    // Alternating bits with a declared period, exercising shift acceleration
    // over a generated base.
    register_generator("alt01", GeneratorInfo{[](Cell k) { return k % 2 == 1; },
                                              std::make_pair(Cell{0}, std::vector<bool>{false, true})});
}

RealPtr RealSpec::finite_support(std::set<Cell> ones) {
    auto r = std::shared_ptr<RealSpec>(new RealSpec());
    r->kind_ = Kind::FiniteSupport;
    r->ones_ = std::move(ones);
    return r;
}

RealPtr RealSpec::eventually_periodic(std::vector<bool> prefix, std::vector<bool> period) {
    if (period.empty()) throw std::invalid_argument("eventually periodic real needs a nonempty period");
    // Minimal period: the smallest divisor that reproduces the word.
    for (std::size_t p = 1; p < period.size(); ++p) {
        if (period.size() % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < period.size() && ok; ++i) ok = period[i] == period[i % p];
        if (ok) {
            period.resize(p);
            break;
        }
    }
    // Minimal prefix: fold prefix bits that already match the periodic
    // extension, rotating the period right as the boundary moves left.
    while (!prefix.empty() && prefix.back() == period.back()) {
        prefix.pop_back();
        std::rotate(period.rbegin(), period.rbegin() + 1, period.rend());
    }
    // An all-zero period is a finite-support real.
    if (std::none_of(period.begin(), period.end(), [](bool b) { return b; })) {
        std::set<Cell> ones;
        for (std::size_t i = 0; i < prefix.size(); ++i)
            if (prefix[i]) ones.insert(i);
        return finite_support(std::move(ones));
    }
    auto r = std::shared_ptr<RealSpec>(new RealSpec());
    r->kind_ = Kind::EventuallyPeriodic;
    r->prefix_ = std::move(prefix);
    r->period_ = std::move(period);
    return r;
}

RealPtr RealSpec::generated(const std::string& name) {
    register_builtin_generators();
    if (!has_generator(name)) throw std::runtime_error("unknown generator: " + name);
    auto r = std::shared_ptr<RealSpec>(new RealSpec());
    r->kind_ = Kind::Generated;
    r->name_ = name;
    return r;
}

bool RealSpec::bit(Cell n) const {
    switch (kind_) {
        case Kind::FiniteSupport:
            return ones_.count(n) > 0;
        case Kind::EventuallyPeriodic:
            if (n < prefix_.size()) return prefix_[n];
            return period_[(n - prefix_.size()) % period_.size()];
        case Kind::Generated: {
            auto it = memo_.find(n);
            if (it != memo_.end()) return it->second;
            bool b = generator(name_).fn(n);
            memo_.emplace(n, b);
            return b;
        }
    }
    return false;
}

bool RealSpec::operator==(const RealSpec& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
        case Kind::FiniteSupport: return ones_ == o.ones_;
        case Kind::EventuallyPeriodic: return prefix_ == o.prefix_ && period_ == o.period_;
        case Kind::Generated: return name_ == o.name_;
    }
    return false;
}

bool RealSpec::shift_invariant_beyond(Cell from, Cell k) const {
    if (k == 0) return true;
    switch (kind_) {
        case Kind::FiniteSupport:
            // Finite support closed under +k beyond `from` forces emptiness there.
            return ones_.empty() || *ones_.rbegin() < from;
        case Kind::EventuallyPeriodic: {
            // Check the prefix region directly, then one full period window;
            // periodicity extends the window conclusion to all larger cells.
            Cell pl = prefix_.size();
            Cell upto = std::max(from, pl) + period_.size();
            for (Cell c = from; c < upto; ++c)
                if (bit(c) != bit(c + k)) return false;
            return true;
        }
        case Kind::Generated: {
            const auto& decl = generator(name_).declared_periodic;
            if (!decl) return false;
            const auto& [pl, word] = *decl;
            // Spot-check the declaration before trusting it.
            for (Cell c = 0; c < pl + 3 * word.size(); ++c) {
                bool expected = c < pl ? bit(c) : word[(c - pl) % word.size()];
                if (c >= pl && bit(c) != expected) return false;
            }
            Cell upto = std::max(from, pl) + word.size();
            for (Cell c = from; c < upto; ++c)
                if (bit(c) != bit(c + k)) return false;
            return true;
        }
    }
    return false;
}

bool RealSpec::memo_consistent() const {
    if (kind_ != Kind::Generated) return true;
    for (const auto& [n, b] : memo_)
        if (generator(name_).fn(n) != b) return false;
    return true;
}

std::size_t RealSpec::memo_size() const { return memo_.size(); }

bool TapeView::bit_at(Cell n) {
    touched_max = std::max(touched_max, n);
    auto it = delta.find(n);
    if (it != delta.end()) return it->second;
    return base->bit(n);
}

bool TapeView::peek(Cell n) const {
    auto it = delta.find(n);
    if (it != delta.end()) return it->second;
    return base->bit(n);
}

void TapeView::write(Cell n, bool b) {
    touched_max = std::max(touched_max, n);
    if (base->bit(n) == b)
        delta.erase(n);
    else
        delta[n] = b;
}

std::vector<std::pair<Cell, bool>> TapeView::sorted_delta() const {
    std::vector<std::pair<Cell, bool>> v(delta.begin(), delta.end());
    std::sort(v.begin(), v.end());
    return v;
}

bool TapeView::same_base(const TapeView& o) const {
    return base == o.base || *base == *o.base;
}

bool TapeView::bits_equal(const TapeView& o) const {
    return same_base(o) && delta == o.delta;
}

std::unordered_map<Cell, bool> limsup_delta(const std::vector<TapeView>& snapshots,
                                            const TapeView& stable) {
    if (snapshots.empty()) throw std::invalid_argument("limsup over empty cycle");
    for (const TapeView& s : snapshots)
        if (!s.same_base(stable)) throw std::invalid_argument("limsup over mismatched bases");

    std::unordered_map<Cell, bool> out = stable.delta;
    std::set<Cell> touched;
    for (const TapeView& s : snapshots)
        for (const auto& [c, b] : s.delta) touched.insert(c);
    for (Cell c : touched) {
        bool hi = false;
        for (const TapeView& s : snapshots) hi = hi || s.peek(c);
        if (hi == stable.base->bit(c))
            out.erase(c);
        else
            out[c] = hi;
    }
    return out;
}

namespace {

// Represent a view as explicit bits [0, n) plus an eventually periodic tail,
// when the base allows it.
bool ep_representable(const TapeView& v) {
    return v.base->kind() != RealSpec::Kind::Generated;
}

RealPtr materialize_or(const TapeView& a, const TapeView& b) {
    auto tail_period = [](const TapeView& v) -> std::size_t {
        return v.base->kind() == RealSpec::Kind::EventuallyPeriodic ? v.base->period().size() : 1;
    };
    auto tail_start = [](const TapeView& v) -> Cell {
        Cell s = v.base->kind() == RealSpec::Kind::EventuallyPeriodic ? v.base->prefix().size() : 0;
        if (v.base->kind() == RealSpec::Kind::FiniteSupport && !v.base->ones().empty())
            s = *v.base->ones().rbegin() + 1;
        for (const auto& [c, bit] : v.delta) s = std::max(s, c + 1);
        return s;
    };
    Cell start = std::max(tail_start(a), tail_start(b));
    std::size_t q = std::lcm(tail_period(a), tail_period(b));
    std::vector<bool> prefix, period;
    for (Cell c = 0; c < start; ++c) prefix.push_back(a.peek(c) || b.peek(c));
    for (Cell c = start; c < start + q; ++c) period.push_back(a.peek(c) || b.peek(c));
    return RealSpec::eventually_periodic(std::move(prefix), std::move(period));
}

}  // namespace

TapeView view_or(const TapeView& a, const TapeView& b) {
    if (a.same_base(b)) {
        TapeView out = a;
        std::set<Cell> cells;
        for (const auto& [c, bit] : a.delta) cells.insert(c);
        for (const auto& [c, bit] : b.delta) cells.insert(c);
        for (Cell c : cells) out.write(c, a.peek(c) || b.peek(c));
        out.touched_max = std::max(a.touched_max, b.touched_max);
        return out;
    }
    if (ep_representable(a) && ep_representable(b)) {
        TapeView out(materialize_or(a, b));
        out.touched_max = std::max(a.touched_max, b.touched_max);
        return out;
    }
    // Generated base on one side: only a finite set of extra ones on the
    // other side can be folded in.
    const TapeView& gen = a.base->kind() == RealSpec::Kind::Generated ? a : b;
    const TapeView& oth = a.base->kind() == RealSpec::Kind::Generated ? b : a;
    if (oth.base->kind() == RealSpec::Kind::EventuallyPeriodic)
        throw std::logic_error("view_or: generated base vs periodic tail is not representable");
    TapeView out = gen;
    for (Cell c : oth.base->ones())
        if (oth.peek(c)) out.write(c, true);
    for (const auto& [c, bit] : oth.delta)
        if (bit) out.write(c, true);
    out.touched_max = std::max(a.touched_max, b.touched_max);
    return out;
}

RealPtr encode_relation(const std::set<std::pair<Cell, Cell>>& pairs) {
    std::set<Cell> ones;
    for (const auto& [n, m] : pairs) ones.insert(pair_index(n, m));
    return RealSpec::finite_support(std::move(ones));
}

bool relation_bit(const RealSpec& x, Cell n, Cell m) { return x.bit(pair_index(n, m)); }
bool relation_bit(const TapeView& x, Cell n, Cell m) { return x.peek(pair_index(n, m)); }

std::string format_real_literal(const RealSpec& r) {
    switch (r.kind()) {
        case RealSpec::Kind::FiniteSupport: {
            std::string s = "fs{";
            bool first = true;
            for (Cell c : r.ones()) {
                if (!first) s += ',';
                s += std::to_string(c);
                first = false;
            }
            return s + "}";
        }
        case RealSpec::Kind::EventuallyPeriodic: {
            std::string s = "ep{";
            for (bool b : r.prefix()) s += b ? '1' : '0';
            s += '|';
            for (bool b : r.period()) s += b ? '1' : '0';
            return s + "}";
        }
        case RealSpec::Kind::Generated:
            return "gen{" + r.generator_name() + "}";
    }
    return "fs{}";
}

RealPtr parse_real_literal(const std::string& text) {
    auto body = [&](const std::string& prefix) -> std::optional<std::string> {
        if (text.size() >= prefix.size() + 2 && text.compare(0, prefix.size(), prefix) == 0 &&
            text[prefix.size()] == '{' && text.back() == '}')
            return text.substr(prefix.size() + 1, text.size() - prefix.size() - 2);
        return std::nullopt;
    };
    if (auto b = body("fs")) {
        std::set<Cell> ones;
        std::size_t i = 0;
        while (i < b->size()) {
            std::size_t j = i;
            while (j < b->size() && (*b)[j] != ',') ++j;
            std::string tok = b->substr(i, j - i);
            if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
                throw RealParseError{"bad cell index in fs literal: '" + tok + "'"};
            ones.insert(std::stoull(tok));
            i = j + 1;
        }
        return RealSpec::finite_support(std::move(ones));
    }
    if (auto b = body("ep")) {
        auto bar = b->find('|');
        if (bar == std::string::npos) throw RealParseError{"ep literal needs 'prefix|period'"};
        auto bits = [](const std::string& s) {
            std::vector<bool> v;
            for (char ch : s) {
                if (ch != '0' && ch != '1') throw RealParseError{"ep literal bits must be 0/1"};
                v.push_back(ch == '1');
            }
            return v;
        };
        std::vector<bool> period = bits(b->substr(bar + 1));
        if (period.empty()) throw RealParseError{"ep literal needs a nonempty period"};
        return RealSpec::eventually_periodic(bits(b->substr(0, bar)), std::move(period));
    }
    if (auto b = body("gen")) {
        register_builtin_generators();
        if (!has_generator(*b)) throw RealParseError{"unknown generator: " + *b};
        return RealSpec::generated(*b);
    }
    throw RealParseError{"expected fs{...}, ep{...|...} or gen{...}: '" + text + "'"};
}

}  // namespace ittm
