// Machine programs: finite transition tables over three tapes (four in
// oracle mode) with distinguished start, limit and halt states.
//
// A program reads one bit per tape at the shared head column and reacts with
// a write per tape, a head move and a successor state.  Validation makes the
// table total for every non-halt state; the halt state has no outgoing rows.
// States are kept in a canonical order (start, limit, halt, then first use)
// so that the index codec is reproducible.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ittm {

enum class Move : std::uint8_t { Left, Right, Stay };

struct Transition {
    std::uint8_t writes = 0;  // bit t = bit written to tape t
    Move move = Move::Stay;
    std::uint32_t next = 0;
    bool query = false;  // request a set-oracle membership answer for the next read
};

class Program {
public:
    int arity() const { return arity_; }
    unsigned read_count() const { return 1u << arity_; }
    std::uint32_t state_count() const { return static_cast<std::uint32_t>(names_.size()); }
    std::uint32_t start_state() const { return start_; }
    std::uint32_t limit_state() const { return limit_; }
    std::uint32_t halt_state() const { return halt_; }
    const std::string& state_name(std::uint32_t s) const { return names_[s]; }
    std::optional<std::uint32_t> state_by_name(const std::string& n) const;

    const Transition& transition(std::uint32_t state, unsigned read) const {
        return table_[state * read_count() + read];
    }

    bool uses_query() const;

private:
    friend struct ProgramFactory;
    int arity_ = 3;
    std::uint32_t start_ = 0, limit_ = 1, halt_ = 2;
    std::vector<std::string> names_;
    std::vector<Transition> table_;  // state-major; halt rows present but unused
};

// Internal constructor used by the assembler and the index codec; everything
// else obtains programs through those paths.
struct ProgramFactory {
    int arity = 3;
    std::uint32_t start = 0, limit = 1, halt = 2;
    std::vector<std::string> names;
    std::vector<Transition> table;
    Program build() const;
};

// The immediate-halt program every structurally invalid index decodes to.
Program canonical_noop();

}  // namespace ittm
