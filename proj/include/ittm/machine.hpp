// The machine core: successor steps, the limit rule, loop-detected limit
// acceleration, oracle modes, halting and eventual-output runs under ordinal
// and step budgets.
//
// A run alternates successor stepping with cycle detection.  When the
// configurations inside the current omega-block repeat exactly, or repeat
// translated rightward over shift-invariant tape bases, determinism carries
// the repetition through the rest of the block and the run jumps to the next
// limit stage: limit state, head at the first cell, each tape cell updated
// with the limsup of its earlier values.  Sequences of limit configurations
// are watched the same way, one level per omega power, up to the configured
// acceleration level.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ittm/ordinal.hpp"
#include "ittm/program.hpp"
#include "ittm/real.hpp"

namespace ittm {

struct Configuration {
    std::uint32_t state = 0;
    Cell head = 0;
    std::vector<TapeView> tapes;  // input, scratch, output [, oracle]
    Ordinal stage;
    std::optional<bool> pending_oracle_answer;  // set-oracle reply for the next read

    bool bits_equal(const Configuration& o) const;
};

struct Budgets {
    Ordinal clock_bound = parse_cnf("w^4");  // hard stop
    std::uint64_t steps_per_block = 1'000'000;  // successor steps per omega-block
    std::uint32_t max_accel_level = 3;          // highest omega^k acceleration
};

struct RunOutcome {
    enum class Kind { Halted, BudgetExhausted, NoLoopFound, Stabilized, NotStabilized };
    Kind kind;
    Ordinal stage;                // Halted: halting stage; others: last definite stage
    TapeView output;              // Halted / Stabilized
    Ordinal since;                // Stabilized: stage of the last output change
    std::optional<Configuration> partial;  // BudgetExhausted
    std::string diagnostics;

    bool halted() const { return kind == Kind::Halted; }
};

struct TraceEvent {
    enum class Kind { Step, LoopDetected, LimitJump, OracleQuery, Halt };
    Kind kind;
    std::string stage;  // CNF text
    std::string state;
    Cell head = 0;
    std::vector<Cell> changed_cells;
    std::uint32_t level = 0;            // LoopDetected / LimitJump
    std::optional<Cell> shift;          // LoopDetected: translation distance
    std::uint64_t length = 0;           // LoopDetected: cycle length
    std::optional<bool> answer;         // OracleQuery

    bool operator==(const TraceEvent&) const = default;
};

using TraceSink = std::function<void(const TraceEvent&)>;

std::string trace_event_to_json(const TraceEvent& e);
TraceEvent trace_event_from_json(const std::string& line);

// Host-level failures (oracle predicate threw, generator failed, program
// queried outside set-oracle mode).
struct RunError {
    std::string message;
};

// Set oracles are registered named predicates so runs replay.
using SetOraclePredicate = std::function<bool(const TapeView&)>;
void register_set_oracle(const std::string& name, SetOraclePredicate pred);
const SetOraclePredicate& set_oracle(const std::string& name);
bool has_set_oracle(const std::string& name);
void register_builtin_set_oracles();

// One successor step in exactly the classical manner; a Left move at cell 0
// stays at cell 0.  Precondition: c.state != halt.
Configuration step(const Program& p, const Configuration& c);

Configuration initial_configuration(const Program& p, RealPtr input,
                                    std::optional<RealPtr> oracle_real = std::nullopt);

struct RunOptions {
    TraceSink sink;                 // event stream, optional
    int soundness_check_cycles = 0; // >0: brute-force check every level-1 cycle
                                    // for this many extra periods before jumping
};

RunOutcome run(const Program& p, RealPtr input, const Budgets& b, const RunOptions& opts = {});
RunOutcome run_with_real_oracle(const Program& p, RealPtr input, RealPtr oracle, const Budgets& b,
                                const RunOptions& opts = {});
RunOutcome run_with_set_oracle(const Program& p, RealPtr input, SetOraclePredicate member,
                               const Budgets& b, const RunOptions& opts = {});
RunOutcome run_eventual(const Program& p, RealPtr input, const Budgets& b,
                        const RunOptions& opts = {});

// Accept-by-halting view of a run: never produces a rejecting value.
enum class SemiDecision { Accepted, Indeterminate };
SemiDecision semi_decide(const Program& p, RealPtr input, const Budgets& b);

}  // namespace ittm
