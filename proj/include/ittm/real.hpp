// Finitely-representable infinite binary strings (points of Cantor space) and
// tape views over them.
//
// A RealSpec is one of:
//   FiniteSupport       -- an explicit finite set of 1-cells
//   EventuallyPeriodic  -- explicit prefix bits, then a repeating period word
//   Generated           -- a named total bit function from the registry, with
//                          a memo of computed bits
// Constructors canonicalize (minimal period, minimal prefix, all-zero periods
// collapse to finite support), so structural equality is semantic equality.
//
// A TapeView is a RealSpec base plus a finite overlay of written cells.  The
// overlay never stores a bit equal to the base bit, so two views over equal
// bases are bit-for-bit equal exactly when their overlays are equal.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ittm {

using Cell = std::uint64_t;

// Cantor diagonal pairing; the single pairing shared by all machine programs
// and host-side oracles.  pair_index(0,0) == 0.
Cell pair_index(Cell n, Cell m);
std::pair<Cell, Cell> unpair(Cell k);

class RealSpec;
using RealPtr = std::shared_ptr<const RealSpec>;

// Registered named generators.  Traces and test cases replay, so generated
// reals are always named registry entries, never ad-hoc closures.
struct GeneratorInfo {
    std::function<bool(Cell)> fn;
    // Present when the generator promises an eventually periodic bit stream:
    // prefix length and period word.  Used to license shift acceleration over
    // generated bases; verified by spot checks before trusting.
    std::optional<std::pair<Cell, std::vector<bool>>> declared_periodic;
};

void register_generator(const std::string& name, GeneratorInfo info);
bool has_generator(const std::string& name);
const GeneratorInfo& generator(const std::string& name);
// Installs the built-in generators (idempotent): desc_chain, alt01.
void register_builtin_generators();

class RealSpec {
public:
    enum class Kind { FiniteSupport, EventuallyPeriodic, Generated };

    static RealPtr finite_support(std::set<Cell> ones);
    static RealPtr eventually_periodic(std::vector<bool> prefix, std::vector<bool> period);
    static RealPtr generated(const std::string& name);
    static RealPtr zeros() { return finite_support({}); }

    Kind kind() const { return kind_; }
    bool bit(Cell n) const;  // memoizes generated bits

    const std::set<Cell>& ones() const { return ones_; }
    const std::vector<bool>& prefix() const { return prefix_; }
    const std::vector<bool>& period() const { return period_; }
    const std::string& generator_name() const { return name_; }

    // Structural equality; by canonicalization this is semantic equality for
    // finite-support and eventually periodic reals, and name equality for
    // generated ones.
    bool operator==(const RealSpec& o) const;

    // True when bit(c + k) == bit(c) for every c >= from.  Returns false when
    // this cannot be established (undeclared generated bases).
    bool shift_invariant_beyond(Cell from, Cell k) const;

    // Memo cache agrees with the generator on every cached index.
    bool memo_consistent() const;
    std::size_t memo_size() const;

private:
    RealSpec() = default;
    Kind kind_ = Kind::FiniteSupport;
    std::set<Cell> ones_;
    std::vector<bool> prefix_, period_;
    std::string name_;
    mutable std::unordered_map<Cell, bool> memo_;  // single-writer per run
};

struct TapeView {
    RealPtr base;
    std::unordered_map<Cell, bool> delta;  // canonical: entry bit != base bit
    Cell touched_max = 0;

    TapeView() : base(RealSpec::zeros()) {}
    explicit TapeView(RealPtr b) : base(std::move(b)) {}

    bool bit_at(Cell n);              // records the touch
    bool peek(Cell n) const;          // no bookkeeping
    void write(Cell n, bool b);       // canonicalizing
    std::vector<std::pair<Cell, bool>> sorted_delta() const;

    bool same_base(const TapeView& o) const;
    bool bits_equal(const TapeView& o) const;  // same base, equal deltas
};

// Limsup of the tape over one detected repeating cycle: a cell touched in the
// cycle gets 1 exactly when some snapshot shows 1 there (a recurring bit in a
// forever-repeating cycle occurs cofinally); untouched cells keep the stable
// view's bit.  All views must share one base.
std::unordered_map<Cell, bool> limsup_delta(const std::vector<TapeView>& snapshots,
                                            const TapeView& stable);

// Bitwise OR of two views (used for held-one covers across blocks).
TapeView view_or(const TapeView& a, const TapeView& b);

// Relation coding: n <| m  iff  bit pair_index(n, m) is 1.
RealPtr encode_relation(const std::set<std::pair<Cell, Cell>>& pairs);
bool relation_bit(const RealSpec& x, Cell n, Cell m);
bool relation_bit(const TapeView& x, Cell n, Cell m);

// Real literals used by the CLI and tests: fs{1,3,8}  ep{10|01}  gen{name}.
std::string format_real_literal(const RealSpec& r);
RealPtr parse_real_literal(const std::string& text);  // throws RealParseError

struct RealParseError {
    std::string message;
};

}  // namespace ittm
