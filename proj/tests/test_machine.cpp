#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ittm/machine.hpp"

using namespace ittm;

namespace {

// Compact table builder for hand-written test machines.  Rows cover every
// (state, read) pair; unspecified pairs fall back to a self-halt.
struct TestProgram {
    ProgramFactory f;

    explicit TestProgram(std::vector<std::string> names, int arity = 3) {
        f.arity = arity;
        f.names = std::move(names);
        f.start = 0;
        f.limit = 1;
        f.halt = 2;
        f.table.assign(f.names.size() * (1u << arity), Transition{0, Move::Stay, f.halt, false});
    }

    std::uint32_t id(const std::string& n) const {
        for (std::uint32_t i = 0; i < f.names.size(); ++i)
            if (f.names[i] == n) return i;
        throw std::runtime_error("no state " + n);
    }

    // read/write patterns: one char per tape; read '0'/'1'/'*', write '0'/'1'/'-'.
    void row(const std::string& st, const std::string& read, const std::string& write, Move mv,
             const std::string& next, bool query = false) {
        unsigned n = 1u << f.arity;
        for (unsigned r = 0; r < n; ++r) {
            bool match = true;
            for (int t = 0; t < f.arity; ++t) {
                bool bit = (r >> t) & 1;
                if (read[t] == '0' && bit) match = false;
                if (read[t] == '1' && !bit) match = false;
            }
            if (!match) continue;
            std::uint8_t w = 0;
            for (int t = 0; t < f.arity; ++t) {
                bool bit = (r >> t) & 1;
                bool out = write[t] == '1' || (write[t] == '-' && bit);
                if (out) w |= 1u << t;
            }
            f.table[id(st) * n + r] = Transition{w, mv, id(next), query};
        }
    }

    Program build() const { return f.build(); }
};

Ordinal ord(const std::string& s) { return parse_cnf(s); }

}  // namespace

TEST_CASE("single step semantics") {
    TestProgram tp({"start", "limit", "halt", "go"});
    tp.row("start", "***", "--1", Move::Stay, "halt");
    Program p = tp.build();

    Configuration c = initial_configuration(p, RealSpec::zeros());
    Configuration n = step(p, c);
    CHECK(n.state == p.halt_state());
    CHECK(n.tapes[2].peek(0));
    CHECK(n.stage == ord("1"));

    // left at cell 0 stays put
    TestProgram tl({"start", "limit", "halt"});
    tl.row("start", "***", "---", Move::Left, "start");
    Program pl = tl.build();
    Configuration cl = initial_configuration(pl, RealSpec::zeros());
    cl = step(pl, cl);
    CHECK(cl.head == 0);

    // rightward motion advances the head one cell per step
    TestProgram tr({"start", "limit", "halt"});
    tr.row("start", "***", "---", Move::Right, "start");
    Program pr = tr.build();
    Configuration cr = initial_configuration(pr, RealSpec::zeros());
    for (int i = 0; i < 5; ++i) cr = step(pr, cr);
    CHECK(cr.head == 5);
}

TEST_CASE("write-and-halt on empty input") {
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "***", "--1", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("1"));
    CHECK(o.output.peek(0));
    CHECK(!o.output.peek(1));
}

TEST_CASE("identity copy halts with the input's bits") {
    // copy the input's first 8 cells to the output, then halt
    std::vector<std::string> names = {"start", "limit", "halt"};
    for (int i = 1; i < 8; ++i) names.push_back("c" + std::to_string(i));
    TestProgram tp(names);
    auto copy_row = [&](const std::string& st, const std::string& next) {
        tp.row(st, "0**", "0-0", Move::Right, next);
        tp.row(st, "1**", "1-1", Move::Right, next);
    };
    copy_row("start", "c1");
    for (int i = 1; i < 7; ++i) copy_row("c" + std::to_string(i), "c" + std::to_string(i + 1));
    tp.row("c7", "***", "---", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run(p, RealSpec::finite_support({0, 2}), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("8"));
    CHECK(o.output.peek(0));
    CHECK(!o.output.peek(1));
    CHECK(o.output.peek(2));
    CHECK(!o.output.peek(3));
}

TEST_CASE("move-right-forever reaches the first limit and halts") {
    // the omega clock: scan right until the limit rule fires, then halt
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "***", "---", Move::Right, "start");
    tp.row("limit", "***", "---", Move::Stay, "halt");
    Program p = tp.build();

    RunOutcome o = run(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("w+1"));

    // the same program over an eventually periodic input still cycles
    RunOutcome o2 = run(p, RealSpec::eventually_periodic({true}, {false, true, true}), Budgets{});
    REQUIRE(o2.halted());
    CHECK(o2.stage == ord("w+1"));

    // and over a declared-periodic generated input
    RunOutcome o3 = run(p, RealSpec::generated("alt01"), Budgets{});
    REQUIRE(o3.halted());
    CHECK(o3.stage == ord("w+1"));
}

TEST_CASE("limsup of a toggling cell is one") {
    // toggle scratch cell 0 forever; at the limit, report it on the output
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "*0*", "-1-", Move::Stay, "start");
    tp.row("start", "*1*", "-0-", Move::Stay, "start");
    tp.row("limit", "*1*", "--1", Move::Stay, "halt");
    tp.row("limit", "*0*", "--0", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("w+1"));
    CHECK(o.output.peek(0));  // limsup of 0,1,0,1,... is 1
}

TEST_CASE("quiescent cell keeps its value through the limit") {
    // write 1 at scratch cell 5, come back, then loop in place
    TestProgram tp({"start", "limit", "halt", "r1", "r2", "r3", "r4", "w", "b1", "b2", "b3", "b4",
                    "spin"});
    tp.row("start", "***", "---", Move::Right, "r1");
    tp.row("r1", "***", "---", Move::Right, "r2");
    tp.row("r2", "***", "---", Move::Right, "r3");
    tp.row("r3", "***", "---", Move::Right, "r4");
    tp.row("r4", "***", "---", Move::Right, "w");
    tp.row("w", "***", "-1-", Move::Left, "b1");
    tp.row("b1", "***", "---", Move::Left, "b2");
    tp.row("b2", "***", "---", Move::Left, "b3");
    tp.row("b3", "***", "---", Move::Left, "b4");
    tp.row("b4", "***", "---", Move::Left, "spin");
    tp.row("spin", "***", "---", Move::Stay, "spin");
    tp.row("limit", "*0*", "--0", Move::Stay, "halt");
    tp.row("limit", "*1*", "--1", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("w+1"));
    // the limit handler reported scratch cell 0 (which is 0); cell 5 retained
    REQUIRE(o.partial.has_value() == false);
    CHECK(!o.output.peek(0));
}

TEST_CASE("writing scanner produces a periodic limit tape") {
    // write 1 at every cell while scanning right; at the limit the scratch
    // tape reads 111..., which the limit handler reports
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "***", "-1-", Move::Right, "start");
    tp.row("limit", "*1*", "--1", Move::Stay, "halt");
    tp.row("limit", "*0*", "--0", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("w+1"));
    CHECK(o.output.peek(0));
}

TEST_CASE("alternating writer merges into an eventually periodic tape") {
    // write 0 at even cells, 1 at odd cells, forever
    TestProgram tp({"start", "limit", "halt", "odd"});
    tp.row("start", "***", "-0-", Move::Right, "odd");
    tp.row("odd", "***", "-1-", Move::Right, "start");
    tp.row("limit", "***", "---", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("w+1"));
    // output is untouched; the scratch pattern lived on tape 1, checked via
    // a second machine below.  Here we at least require the run halted.

    // same writer, but the limit handler inspects scratch cell 0 (written 0)
    TestProgram tq({"start", "limit", "halt", "odd"});
    tq.row("start", "***", "-0-", Move::Right, "odd");
    tq.row("odd", "***", "-1-", Move::Right, "start");
    tq.row("limit", "*0*", "--1", Move::Stay, "halt");
    tq.row("limit", "*1*", "--0", Move::Stay, "halt");
    RunOutcome o2 = run(tq.build(), RealSpec::zeros(), Budgets{});
    REQUIRE(o2.halted());
    CHECK(o2.output.peek(0));  // scratch cell 0 held 0 at the limit
}

TEST_CASE("growing zig-zag run exhausts the block budget") {
    // extend a block of ones by one cell per sweep, returning to cell 0 in
    // between: the sweep period grows, so no fixed-period repeat exists
    TestProgram tp({"start", "limit", "halt", "out", "back"});
    tp.row("start", "***", "--1", Move::Right, "out");  // wall marker at cell 0
    tp.row("out", "*1*", "---", Move::Right, "out");    // skip existing ones
    tp.row("out", "*0*", "-1-", Move::Left, "back");    // extend, turn around
    tp.row("back", "**1", "---", Move::Right, "out");   // bounce off the wall
    tp.row("back", "**0", "---", Move::Left, "back");   // run back leftward
    Program p = tp.build();
    Budgets b;
    b.steps_per_block = 20000;
    RunOutcome o = run(p, RealSpec::zeros(), b);
    CHECK(o.kind == RunOutcome::Kind::NoLoopFound);
}

TEST_CASE("clock bound stops the run") {
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "***", "---", Move::Right, "start");
    tp.row("limit", "***", "---", Move::Stay, "halt");
    Program p = tp.build();

    Budgets b;
    b.clock_bound = ord("w");
    RunOutcome o = run(p, RealSpec::zeros(), b);
    CHECK(o.kind == RunOutcome::Kind::BudgetExhausted);
    CHECK(o.stage == ord("w"));

    b.clock_bound = ord("w+1");
    RunOutcome o2 = run(p, RealSpec::zeros(), b);
    CHECK(o2.halted());
    CHECK(o2.stage == ord("w+1"));

    b.clock_bound = ord("20");
    RunOutcome o3 = run(p, RealSpec::zeros(), b);
    CHECK(o3.kind == RunOutcome::Kind::BudgetExhausted);
    CHECK(o3.stage == ord("20"));
    REQUIRE(o3.partial.has_value());
    CHECK(o3.partial->head == 20);
}

TEST_CASE("real oracle is readable on the fourth tape") {
    TestProgram tp({"start", "limit", "halt"}, 4);
    tp.row("start", "***0", "--0-", Move::Stay, "halt");
    tp.row("start", "***1", "--1-", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o1 = run_with_real_oracle(p, RealSpec::zeros(), RealSpec::finite_support({0}), Budgets{});
    REQUIRE(o1.halted());
    CHECK(o1.output.peek(0));
    RunOutcome o2 = run_with_real_oracle(p, RealSpec::zeros(), RealSpec::zeros(), Budgets{});
    REQUIRE(o2.halted());
    CHECK(!o2.output.peek(0));

    CHECK_THROWS_AS((void)run_with_real_oracle(canonical_noop(), RealSpec::zeros(),
                                               RealSpec::zeros(), Budgets{}),
                    RunError);
}

TEST_CASE("set oracle answers arrive on the next read") {
    register_builtin_set_oracles();
    // write 1 on the oracle tape, query, then report the answer
    TestProgram tp({"start", "limit", "halt", "ask"}, 4);
    tp.row("start", "****", "---1", Move::Stay, "ask", true);
    tp.row("ask", "***1", "--1-", Move::Stay, "halt");
    tp.row("ask", "***0", "--0-", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run_with_set_oracle(p, RealSpec::zeros(), set_oracle("cell0_is_1"), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.output.peek(0));

    // empty query at the start: the oracle tape starts empty
    TestProgram tq({"start", "limit", "halt", "ask"}, 4);
    tq.row("start", "****", "----", Move::Stay, "ask", true);
    tq.row("ask", "***1", "--1-", Move::Stay, "halt");
    tq.row("ask", "***0", "--0-", Move::Stay, "halt");
    RunOutcome o2 = run_with_set_oracle(tq.build(), RealSpec::zeros(),
                                        [](const TapeView& v) { return !v.peek(0); }, Budgets{});
    REQUIRE(o2.halted());
    CHECK(o2.output.peek(0));  // member(empty real) was consulted
}

TEST_CASE("eventual runs") {
    // write output 1 then loop silently
    TestProgram tp({"start", "limit", "halt", "spin"});
    tp.row("start", "***", "--1", Move::Stay, "spin");
    tp.row("spin", "***", "---", Move::Stay, "spin");
    tp.row("limit", "***", "---", Move::Stay, "spin");
    Program p = tp.build();
    RunOutcome o = run_eventual(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.kind == RunOutcome::Kind::Stabilized);
    CHECK(o.output.peek(0));
    CHECK(o.since == ord("1"));

    // output toggler never stabilizes
    TestProgram tq({"start", "limit", "halt"});
    tq.row("start", "**0", "--1", Move::Stay, "start");
    tq.row("start", "**1", "--0", Move::Stay, "start");
    tq.row("limit", "**0", "--1", Move::Stay, "limit");
    tq.row("limit", "**1", "--0", Move::Stay, "limit");
    RunOutcome o2 = run_eventual(tq.build(), RealSpec::zeros(), Budgets{});
    CHECK(o2.kind == RunOutcome::Kind::NotStabilized);

    // halting programs stabilize at their output
    TestProgram th({"start", "limit", "halt"});
    th.row("start", "***", "--1", Move::Stay, "halt");
    RunOutcome o3 = run_eventual(th.build(), RealSpec::zeros(), Budgets{});
    CHECK(o3.kind == RunOutcome::Kind::Stabilized);
    CHECK(o3.output.peek(0));
}

TEST_CASE("semi-decision never rejects") {
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "***", "---", Move::Stay, "halt");
    CHECK(semi_decide(tp.build(), RealSpec::zeros(), Budgets{}) == SemiDecision::Accepted);

    TestProgram tq({"start", "limit", "halt"});
    tq.row("start", "***", "---", Move::Stay, "start");
    tq.row("limit", "***", "---", Move::Stay, "start");
    Budgets b;
    b.clock_bound = ord("w^2");
    CHECK(semi_decide(tq.build(), RealSpec::zeros(), b) == SemiDecision::Indeterminate);
}

TEST_CASE("determinism: identical runs give identical traces") {
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "*0*", "-1-", Move::Right, "start");
    tp.row("start", "*1*", "-0-", Move::Stay, "start");
    tp.row("limit", "***", "---", Move::Stay, "halt");
    Program p = tp.build();

    auto collect = [&] {
        std::vector<std::string> lines;
        RunOptions opts;
        opts.sink = [&](const TraceEvent& e) { lines.push_back(trace_event_to_json(e)); };
        RunOutcome o = run(p, RealSpec::finite_support({1}), Budgets{}, opts);
        lines.push_back(format_cnf(o.stage));
        return lines;
    };
    CHECK(collect() == collect());
}

TEST_CASE("trace JSON round-trips losslessly") {
    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "***", "--1", Move::Right, "start");
    tp.row("limit", "***", "---", Move::Stay, "halt");
    Program p = tp.build();

    std::vector<TraceEvent> events;
    RunOptions opts;
    opts.sink = [&](const TraceEvent& e) { events.push_back(e); };
    (void)run(p, RealSpec::zeros(), Budgets{}, opts);
    REQUIRE(!events.empty());
    bool saw_jump = false;
    for (const TraceEvent& e : events) {
        TraceEvent back = trace_event_from_json(trace_event_to_json(e));
        CHECK(back == e);
        if (e.kind == TraceEvent::Kind::LimitJump) saw_jump = true;
    }
    CHECK(saw_jump);
}

TEST_CASE("soundness-checked acceleration passes on simple cyclers") {
    RunOptions opts;
    opts.soundness_check_cycles = 10;

    TestProgram tp({"start", "limit", "halt"});
    tp.row("start", "*0*", "-1-", Move::Stay, "start");
    tp.row("start", "*1*", "-0-", Move::Stay, "start");
    tp.row("limit", "***", "---", Move::Stay, "halt");
    CHECK(run(tp.build(), RealSpec::zeros(), Budgets{}, opts).halted());

    TestProgram tq({"start", "limit", "halt", "odd"});
    tq.row("start", "***", "-0-", Move::Right, "odd");
    tq.row("odd", "***", "-1-", Move::Right, "start");
    tq.row("limit", "***", "---", Move::Stay, "halt");
    CHECK(run(tq.build(), RealSpec::zeros(), Budgets{}, opts).halted());
}

TEST_CASE("two-level acceleration reaches omega squared") {
    // parity pair on scratch/output cell 0: (1,0) and (0,1) alternate at
    // successive limits; at omega^2 the limsup shows (1,1) and the machine
    // halts one step later
    TestProgram tp({"start", "limit", "halt", "scan"});
    tp.row("start", "***", "-10", Move::Right, "scan");
    tp.row("scan", "***", "---", Move::Right, "scan");
    tp.row("limit", "*10", "-01", Move::Right, "scan");
    tp.row("limit", "*01", "-10", Move::Right, "scan");
    tp.row("limit", "*11", "---", Move::Stay, "halt");
    Program p = tp.build();
    RunOutcome o = run(p, RealSpec::zeros(), Budgets{});
    REQUIRE(o.halted());
    CHECK(o.stage == ord("w^2+1"));
}
