#include "ittm/program.hpp"

#include <stdexcept>

namespace ittm {

std::optional<std::uint32_t> Program::state_by_name(const std::string& n) const {
    for (std::uint32_t i = 0; i < names_.size(); ++i)
        if (names_[i] == n) return i;
    return std::nullopt;
}

bool Program::uses_query() const {
    for (std::uint32_t s = 0; s < state_count(); ++s) {
        if (s == halt_) continue;
        for (unsigned r = 0; r < read_count(); ++r)
            if (transition(s, r).query) return true;
    }
    return false;
}

Program ProgramFactory::build() const {
    Program p;
    p.arity_ = arity;
    p.start_ = start;
    p.limit_ = limit;
    p.halt_ = halt;
    p.names_ = names;
    p.table_ = table;
    if (p.table_.size() != p.names_.size() * p.read_count())
        throw std::logic_error("program table size mismatch");
    for (const Transition& t : p.table_)
        if (t.next >= p.names_.size()) throw std::logic_error("transition target out of range");
    return p;
}

Program canonical_noop() {
    ProgramFactory f;
    f.arity = 3;
    f.names = {"start", "limit", "halt"};
    f.start = 0;
    f.limit = 1;
    f.halt = 2;
    f.table.assign(3 * 8, Transition{0, Move::Stay, 2, false});
    return f.build();
}

}  // namespace ittm
