#include "ittm/machine.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace ittm {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t delta_token(unsigned tape, Cell cell, bool bit) {
    return splitmix(cell * 8 + tape * 2 + (bit ? 1 : 0) + 0x51ULL);
}

std::uint64_t hash_real(const RealSpec& r) {
    std::uint64_t h = splitmix(static_cast<std::uint64_t>(r.kind()) + 0xABCDULL);
    switch (r.kind()) {
        case RealSpec::Kind::FiniteSupport:
            for (Cell c : r.ones()) h ^= splitmix(c + 7);
            break;
        case RealSpec::Kind::EventuallyPeriodic:
            for (std::size_t i = 0; i < r.prefix().size(); ++i)
                h = h * 1099511628211ULL + (r.prefix()[i] ? 2 : 1);
            h = h * 31 + 0x7E;
            for (std::size_t i = 0; i < r.period().size(); ++i)
                h = h * 1099511628211ULL + (r.period()[i] ? 2 : 1);
            break;
        case RealSpec::Kind::Generated:
            for (char c : r.generator_name()) h = h * 131 + static_cast<unsigned char>(c);
            break;
    }
    return h;
}

std::uint64_t hash_config(const Configuration& c) {
    std::uint64_t h = splitmix(c.state) ^ splitmix(c.head + 0x1234567ULL);
    if (c.pending_oracle_answer) h ^= splitmix(*c.pending_oracle_answer ? 0xAAA : 0xBBB);
    for (unsigned t = 0; t < c.tapes.size(); ++t) {
        h ^= splitmix(hash_real(*c.tapes[t].base) + t);
        for (const auto& [cell, bit] : c.tapes[t].delta) h ^= delta_token(t, cell, bit);
    }
    return h;
}

std::map<std::string, SetOraclePredicate>& oracle_registry() {
    static std::map<std::string, SetOraclePredicate> r;
    return r;
}

// Finite number of successor steps from `base` to `clock`, when the two
// differ only in the finite tail; nullopt when a limit lies in between.
std::optional<std::uint64_t> finite_gap(const Ordinal& base, const Ordinal& clock) {
    auto split = [](const Ordinal& x) -> std::pair<Ordinal, BigNat> {
        std::vector<Term> ts = x.terms();
        BigNat fin = 0;
        if (!ts.empty() && ts.back().exponent.is_zero()) {
            fin = ts.back().coefficient;
            ts.pop_back();
        }
        return {Ordinal::from_terms(std::move(ts)), fin};
    };
    auto [lb, fb] = split(base);
    auto [lc, fc] = split(clock);
    if (!(lb == lc) || fc <= fb) return std::nullopt;
    BigNat gap = fc - fb;
    if (gap > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(gap);
}

}  // namespace

bool Configuration::bits_equal(const Configuration& o) const {
    if (state != o.state || head != o.head || pending_oracle_answer != o.pending_oracle_answer ||
        tapes.size() != o.tapes.size())
        return false;
    for (std::size_t t = 0; t < tapes.size(); ++t)
        if (!tapes[t].bits_equal(o.tapes[t])) return false;
    return true;
}

void register_set_oracle(const std::string& name, SetOraclePredicate pred) {
    oracle_registry()[name] = std::move(pred);
}

bool has_set_oracle(const std::string& name) { return oracle_registry().count(name) > 0; }

const SetOraclePredicate& set_oracle(const std::string& name) {
    auto it = oracle_registry().find(name);
    if (it == oracle_registry().end()) throw RunError{"unknown set oracle: " + name};
    return it->second;
}

Configuration initial_configuration(const Program& p, RealPtr input,
                                    std::optional<RealPtr> oracle_real) {
    Configuration c;
    c.state = p.start_state();
    c.head = 0;
    c.stage = Ordinal();
    c.tapes.emplace_back(std::move(input));
    c.tapes.emplace_back(RealSpec::zeros());
    c.tapes.emplace_back(RealSpec::zeros());
    if (p.arity() == 4)
        c.tapes.emplace_back(oracle_real ? TapeView(*oracle_real) : TapeView(RealSpec::zeros()));
    return c;
}

Configuration step(const Program& p, const Configuration& c) {
    assert(c.state != p.halt_state());
    Configuration n = c;
    unsigned read = 0;
    for (unsigned t = 0; t < n.tapes.size(); ++t)
        if (n.tapes[t].bit_at(n.head)) read |= 1u << t;
    if (n.pending_oracle_answer) {
        if (*n.pending_oracle_answer)
            read |= 1u << 3;
        else
            read &= ~(1u << 3);
        n.pending_oracle_answer.reset();
    }
    const Transition& tr = p.transition(n.state, read);
    for (unsigned t = 0; t < n.tapes.size(); ++t) n.tapes[t].write(n.head, (tr.writes >> t) & 1);
    if (tr.move == Move::Left) {
        if (n.head > 0) --n.head;
    } else if (tr.move == Move::Right) {
        ++n.head;
    }
    n.state = tr.next;
    n.stage = c.stage.successor();
    return n;
}

namespace {

struct PackedEvent {
    std::uint32_t state;
    std::uint8_t read;
    std::uint8_t writes;
    std::int8_t move;  // -1, +1, 0
    std::uint8_t query;
    bool operator==(const PackedEvent&) const = default;
};

struct CycleInfo {
    std::uint64_t t0 = 0;     // step index of the cycle start within the block
    std::uint64_t length = 0;
    Cell shift = 0;           // 0 = exact repeat
    Cell frontier = 0;        // min head over the cycle (shift cycles)
};

struct LimitEntry {
    Configuration config;        // configuration at the limit stage
    std::uint64_t config_hash;
    std::vector<TapeView> cover; // per tape: cells that held a 1 inside the block
    bool output_changed = false;
};

class Runner {
public:
    Runner(const Program& p, RealPtr input, std::optional<RealPtr> oracle_real,
           std::optional<SetOraclePredicate> oracle_set, const Budgets& b, const RunOptions& opts,
           bool eventual)
        : p_(p),
          b_(b),
          opts_(opts),
          eventual_(eventual),
          oracle_set_(std::move(oracle_set)) {
        if (p_.uses_query() && !oracle_set_)
            throw RunError{"program issues oracle queries but no set oracle is attached"};
        cur_ = initial_configuration(p_, std::move(input), oracle_real);
        windows_.resize(b_.max_accel_level + 2);
    }

    RunOutcome execute();

private:
    // --- live state ---
    const Program& p_;
    Budgets b_;
    RunOptions opts_;
    bool eventual_;
    std::optional<SetOraclePredicate> oracle_set_;

    Configuration cur_;
    Ordinal block_base_;
    Configuration block_start_;
    std::uint64_t steps_ = 0;  // steps taken inside the current block

    std::uint64_t hash_ = 0;
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> seen_;
    std::vector<PackedEvent> events_;
    std::vector<std::unordered_set<Cell>> written_one_;  // per tape, this block
    bool block_output_changed_ = false;
    std::unordered_map<std::uint64_t, std::uint64_t> shift_retry_at_;

    std::vector<std::vector<LimitEntry>> windows_;  // index = level, used from 2 up
    Ordinal last_output_change_;

    static constexpr std::uint64_t kScanInterval = 64;
    static constexpr std::uint64_t kMaxShiftPeriod = 4096;
    static constexpr std::size_t kMaxWindow = 1 << 16;

    // --- helpers ---
    Ordinal stage_now() const { return Ordinal::add(block_base_, Ordinal(steps_)); }

    void emit(TraceEvent e) {
        if (opts_.sink) opts_.sink(e);
    }

    void begin_block() {
        block_start_ = cur_;
        steps_ = 0;
        hash_ = hash_config(cur_);
        seen_.clear();
        seen_[hash_].push_back(0);
        events_.clear();
        written_one_.assign(cur_.tapes.size(), {});
        block_output_changed_ = false;
        shift_retry_at_.clear();
    }

    // One successor step of `c`.  When `track` is set, updates the incremental
    // hash, the event log, the written-one cover and output-change bookkeeping.
    void exec_step(Configuration& c, bool track) {
        unsigned read = 0;
        for (unsigned t = 0; t < c.tapes.size(); ++t)
            if (c.tapes[t].bit_at(c.head)) read |= 1u << t;
        if (c.pending_oracle_answer) {
            if (*c.pending_oracle_answer)
                read |= 1u << 3;
            else
                read &= ~(1u << 3);
            if (track) hash_ ^= splitmix(*c.pending_oracle_answer ? 0xAAA : 0xBBB);
            c.pending_oracle_answer.reset();
        }
        const Transition& tr = p_.transition(c.state, read);
        std::vector<Cell> changed;
        for (unsigned t = 0; t < c.tapes.size(); ++t) {
            bool newbit = (tr.writes >> t) & 1;
            bool oldbit = c.tapes[t].peek(c.head);
            if (track && newbit) written_one_[t].insert(c.head);
            if (oldbit != newbit) {
                if (track) {
                    auto it = c.tapes[t].delta.find(c.head);
                    if (it != c.tapes[t].delta.end()) hash_ ^= delta_token(t, c.head, it->second);
                }
                c.tapes[t].write(c.head, newbit);
                if (track) {
                    auto it = c.tapes[t].delta.find(c.head);
                    if (it != c.tapes[t].delta.end()) hash_ ^= delta_token(t, c.head, it->second);
                    if (t == 2) {
                        block_output_changed_ = true;
                        last_output_change_ = Ordinal::add(block_base_, Ordinal(steps_ + 1));
                    }
                    changed.push_back(c.head);
                }
            } else {
                c.tapes[t].write(c.head, newbit);  // refresh touched_max
            }
        }
        if (track) hash_ ^= splitmix(c.state) ^ splitmix(c.head + 0x1234567ULL);
        Cell oldhead = c.head;
        if (tr.move == Move::Left) {
            if (c.head > 0) --c.head;
        } else if (tr.move == Move::Right) {
            ++c.head;
        }
        c.state = tr.next;
        if (track) hash_ ^= splitmix(c.state) ^ splitmix(c.head + 0x1234567ULL);
        std::optional<bool> answer;
        if (tr.query) {
            if (!oracle_set_) throw RunError{"oracle query without a set oracle"};
            try {
                answer = (*oracle_set_)(c.tapes[3]);
            } catch (const std::exception& e) {
                throw RunError{std::string("set oracle predicate failed: ") + e.what()};
            }
            c.pending_oracle_answer = answer;
        }
        if (track) {
            if (answer) hash_ ^= splitmix(*answer ? 0xAAA : 0xBBB);
            std::int8_t mv = tr.move == Move::Left ? std::int8_t{-1}
                           : tr.move == Move::Right ? std::int8_t{1}
                                                    : std::int8_t{0};
            events_.push_back(PackedEvent{c.state, static_cast<std::uint8_t>(read), tr.writes, mv,
                                          static_cast<std::uint8_t>(tr.query ? 1 : 0)});
            ++steps_;
            if (opts_.sink) {
                TraceEvent ev;
                ev.kind = TraceEvent::Kind::Step;
                ev.stage = format_cnf(stage_now());
                ev.state = p_.state_name(c.state);
                ev.head = c.head;
                ev.changed_cells = std::move(changed);
                emit(std::move(ev));
                if (answer) {
                    TraceEvent q;
                    q.kind = TraceEvent::Kind::OracleQuery;
                    q.stage = format_cnf(stage_now());
                    q.state = p_.state_name(c.state);
                    q.head = c.head;
                    q.answer = answer;
                    emit(std::move(q));
                }
            }
        }
        (void)oldhead;
    }

    Configuration replay_to(std::uint64_t t) {
        Configuration c = block_start_;
        for (std::uint64_t i = 0; i < t; ++i) exec_step(c, false);
        return c;
    }

    // Exact-repeat check between the materialized config at t0 and cur_.
    bool verify_exact(const Configuration& at_t0) const { return at_t0.bits_equal(cur_); }

    // Translated-repeat check: bits agree on the half line [frontier, ...)
    // after shifting by k, and every base is k-shift-invariant there.  Cells
    // below frontier+k are never visited again, so they impose nothing.
    bool verify_shift(const Configuration& at_t0, Cell k, Cell frontier) const {
        if (at_t0.state != cur_.state || cur_.head != at_t0.head + k) return false;
        if (at_t0.pending_oracle_answer != cur_.pending_oracle_answer) return false;
        for (std::size_t t = 0; t < cur_.tapes.size(); ++t) {
            const TapeView& a = at_t0.tapes[t];
            const TapeView& b = cur_.tapes[t];
            if (!a.base->shift_invariant_beyond(frontier, k)) return false;
            for (const auto& [c, bit] : a.delta)
                if (c >= frontier && b.peek(c + k) != bit) return false;
            for (const auto& [c, bit] : b.delta)
                if (c >= frontier + k && a.peek(c - k) != bit) return false;
        }
        return true;
    }

    struct VerifiedCycle {
        CycleInfo info;
        Configuration at_t0;
        std::vector<Configuration> snapshots;  // configs t0 .. t0+L-1
        Cell max_head = 0;
        std::vector<bool> tape_changed;  // any bit changed on the tape during the cycle
    };

    // Materializes and formally verifies a candidate cycle ending at the
    // current step.  Returns nullopt if the candidate does not hold up.
    std::optional<VerifiedCycle> check_candidate(std::uint64_t t0) {
        VerifiedCycle v;
        v.info.t0 = t0;
        v.info.length = steps_ - t0;
        Configuration c = replay_to(t0);
        v.at_t0 = c;
        v.tape_changed.assign(c.tapes.size(), false);
        Cell minh = c.head, maxh = c.head;
        v.snapshots.push_back(c);
        for (std::uint64_t i = t0; i < steps_; ++i) {
            for (unsigned t = 0; t < c.tapes.size(); ++t) {
                bool newbit = (events_[i].writes >> t) & 1;
                if (c.tapes[t].peek(c.head) != newbit) v.tape_changed[t] = true;
            }
            exec_step(c, false);
            minh = std::min(minh, c.head);
            maxh = std::max(maxh, c.head);
            if (i + 1 < steps_) v.snapshots.push_back(c);
        }
        v.max_head = maxh;
        if (verify_exact(v.at_t0)) {
            v.info.shift = 0;
            v.info.frontier = minh;
            return v;
        }
        if (cur_.head > v.at_t0.head) {
            Cell k = cur_.head - v.at_t0.head;
            if (verify_shift(v.at_t0, k, minh)) {
                v.info.shift = k;
                v.info.frontier = minh;
                return v;
            }
        }
        return std::nullopt;
    }

    // --- limit synthesis ---

    // Final value of every cell >= frontier after the translated cycle runs
    // forever, plus the set of cells ever holding 1 in the tail.  Simulates
    // forward until the pattern stabilizes over a probe window.
    struct TailPattern {
        Cell explicit_end = 0;          // bits below this are listed explicitly
        std::vector<bool> final_bits;   // [0, explicit_end)
        std::vector<bool> word;         // repeating unit of length k from explicit_end
        std::vector<bool> cover_word;   // held-one unit of length k from explicit_end
        std::vector<bool> cover_bits;   // [0, explicit_end)
    };

    TailPattern tail_pattern(const VerifiedCycle& v, unsigned tape) {
        const Cell k = v.info.shift;
        const Cell F = v.info.frontier;
        const Cell R = v.max_head >= F ? v.max_head - F : 0;
        const Cell W = F + R + 3 * k;  // explicit region end; word taken at [W, W+k)
        // Simulate enough periods that every cell below W + 2k is final.
        std::uint64_t periods = (R + 5 * k) / k + 2;
        Configuration c = cur_;
        std::unordered_set<Cell> held1;
        for (std::uint64_t j = 0; j < periods; ++j)
            for (std::uint64_t i = 0; i < v.info.length; ++i) {
                unsigned read = 0;
                for (unsigned t = 0; t < c.tapes.size(); ++t)
                    if (c.tapes[t].bit_at(c.head)) read |= 1u << t;
                if (c.pending_oracle_answer) {
                    if (*c.pending_oracle_answer)
                        read |= 1u << 3;
                    else
                        read &= ~(1u << 3);
                    c.pending_oracle_answer.reset();
                }
                const Transition& tr = p_.transition(c.state, read);
                for (unsigned t = 0; t < c.tapes.size(); ++t) {
                    if (t == tape && ((tr.writes >> t) & 1)) held1.insert(c.head);
                    c.tapes[t].write(c.head, (tr.writes >> t) & 1);
                }
                if (tr.move == Move::Left) {
                    if (c.head > 0) --c.head;
                } else if (tr.move == Move::Right) {
                    ++c.head;
                }
                c.state = tr.next;
                if (tr.query && oracle_set_) c.pending_oracle_answer = (*oracle_set_)(c.tapes[3]);
            }
        TailPattern tp;
        tp.explicit_end = W;
        const TapeView& tv = c.tapes[tape];
        const TapeView& start = cur_.tapes[tape];
        for (Cell cell = 0; cell < W; ++cell) {
            tp.final_bits.push_back(tv.peek(cell));
            bool held = start.peek(cell) || held1.count(cell) > 0;
            tp.cover_bits.push_back(held);
        }
        for (Cell cell = W; cell < W + k; ++cell) {
            tp.word.push_back(tv.peek(cell));
            tp.cover_word.push_back(start.base->bit(cell) || held1.count(cell) > 0);
        }
        // The repeating unit must indeed repeat over the probe window.
        for (Cell i = 0; i < k; ++i)
            if (tv.peek(W + i) != tv.peek(W + k + i)) throw RunError{"shift tail failed to stabilize"};
        return tp;
    }

    // Limit configuration and block cover for a verified level-1 cycle.
    LimitEntry level1_limit(const VerifiedCycle& v) {
        LimitEntry e;
        e.config.state = p_.limit_state();
        e.config.head = 0;
        e.config.stage = stage_now().block_limit(1);
        e.output_changed = block_output_changed_;
        const unsigned ntapes = static_cast<unsigned>(cur_.tapes.size());
        for (unsigned t = 0; t < ntapes; ++t) {
            TapeView limit_view;
            if (v.info.shift == 0) {
                std::vector<TapeView> snaps;
                snaps.reserve(v.snapshots.size());
                for (const auto& s : v.snapshots) snaps.push_back(s.tapes[t]);
                TapeView stable = v.at_t0.tapes[t];
                limit_view = stable;
                limit_view.delta = limsup_delta(snaps, stable);
            } else if (!v.tape_changed[t]) {
                // Nothing on this tape changes during one period, so by
                // translation nothing ever changes again.
                limit_view = cur_.tapes[t];
            } else {
                TailPattern tp = tail_pattern(v, t);
                limit_view = TapeView(RealSpec::eventually_periodic(tp.final_bits, tp.word));
            }
            e.config.tapes.push_back(limit_view);
        }
        // Cover: block-start bits, ones written during the block, and for
        // writing shift-tails the marching periodic ones.
        for (unsigned t = 0; t < ntapes; ++t) {
            TapeView cov = block_start_.tapes[t];
            for (Cell c : written_one_[t]) cov.write(c, true);
            if (v.info.shift != 0 && v.tape_changed[t]) {
                bool tail_writes_one = false;
                for (std::uint64_t i = v.info.t0; i < steps_; ++i)
                    if (((events_[i].writes >> t) & 1) != 0) tail_writes_one = true;
                if (tail_writes_one) {
                    TailPattern tp = tail_pattern(v, t);
                    TapeView tailcov(RealSpec::eventually_periodic(tp.cover_bits, tp.cover_word));
                    cov = view_or(cov, tailcov);
                }
            }
            e.cover.push_back(cov);
        }
        if (!e.config.tapes[2].bits_equal(cur_.tapes[2])) {
            e.output_changed = true;
            last_output_change_ = e.config.stage;
        }
        e.config_hash = hash_config(e.config);
        return e;
    }

    // Brute-force soundness check: K extra cycles stay inside the cycle
    // (translated as required) and the limsup matches the limit view.
    void soundness_check(const VerifiedCycle& v, const LimitEntry& limit) {
        const int K = opts_.soundness_check_cycles;
        Configuration c = cur_;
        const Cell k = v.info.shift;
        std::vector<TapeView> seen_tapes;
        for (int pass = 1; pass <= K; ++pass) {
            for (std::uint64_t i = 0; i < v.info.length; ++i) {
                const Configuration& want = v.snapshots[i];
                Cell total = k * static_cast<Cell>(pass);
                if (c.state != want.state || c.head != want.head + total)
                    throw RunError{"acceleration soundness: configuration left the cycle"};
                for (unsigned t = 0; t < c.tapes.size(); ++t) {
                    for (const auto& [cell, bit] : want.tapes[t].delta)
                        if (cell >= v.info.frontier && c.tapes[t].peek(cell + total) != bit)
                            throw RunError{"acceleration soundness: tape mismatch"};
                }
                exec_step(c, false);
            }
        }
        // Limsup agreement on cells that are final within the brute window.
        if (k == 0) {
            for (unsigned t = 0; t < c.tapes.size(); ++t) {
                std::set<Cell> cells;
                for (const auto& s : v.snapshots)
                    for (const auto& [cell, bit] : s.tapes[t].delta) cells.insert(cell);
                for (Cell cell : cells) {
                    bool hi = false;
                    for (const auto& s : v.snapshots) hi = hi || s.tapes[t].peek(cell);
                    if (limit.config.tapes[t].peek(cell) != hi)
                        throw RunError{"acceleration soundness: limsup mismatch"};
                }
            }
        } else {
            // Cells the brute window has already finished writing must show
            // their final value in the limit view.
            Cell safe = v.info.frontier + k * static_cast<Cell>(std::max(1, K - 2));
            for (unsigned t = 0; t < c.tapes.size(); ++t)
                for (Cell cell = 0; cell < safe; ++cell)
                    if (limit.config.tapes[t].peek(cell) != c.tapes[t].peek(cell))
                        throw RunError{"acceleration soundness: stabilized bit mismatch"};
        }
    }

    // --- outcome helpers ---
    RunOutcome halted(Ordinal stage) {
        RunOutcome o;
        o.kind = RunOutcome::Kind::Halted;
        o.stage = std::move(stage);
        o.output = cur_.tapes[2];
        o.since = last_output_change_;
        if (opts_.sink) {
            TraceEvent e;
            e.kind = TraceEvent::Kind::Halt;
            e.stage = format_cnf(o.stage);
            e.state = p_.state_name(cur_.state);
            e.head = cur_.head;
            emit(std::move(e));
        }
        if (eventual_) {
            o.kind = RunOutcome::Kind::Stabilized;
            o.diagnostics = "halted";
        }
        return o;
    }

    RunOutcome exhausted(Ordinal stage, std::string diag) {
        RunOutcome o;
        o.kind = eventual_ ? RunOutcome::Kind::NotStabilized : RunOutcome::Kind::BudgetExhausted;
        o.stage = std::move(stage);
        o.partial = cur_;
        o.partial->stage = o.stage;
        o.diagnostics = std::move(diag);
        return o;
    }

    RunOutcome no_loop(std::string diag) {
        RunOutcome o;
        o.kind = eventual_ ? RunOutcome::Kind::NotStabilized : RunOutcome::Kind::NoLoopFound;
        o.stage = block_base_;
        o.partial = cur_;
        o.partial->stage = stage_now();
        o.diagnostics = std::move(diag);
        return o;
    }

    RunOutcome stabilized() {
        RunOutcome o;
        o.kind = RunOutcome::Kind::Stabilized;
        o.stage = cur_.stage;
        o.output = cur_.tapes[2];
        o.since = last_output_change_;
        return o;
    }

    RunOutcome diverging(std::uint32_t level, bool output_clean) {
        if (eventual_) {
            if (output_clean) return stabilized();
            RunOutcome o;
            o.kind = RunOutcome::Kind::NotStabilized;
            o.stage = cur_.stage;
            o.partial = cur_;
            o.diagnostics = "output keeps changing through a repeating level-" +
                            std::to_string(level) + " configuration";
            return o;
        }
        RunOutcome o;
        o.kind = RunOutcome::Kind::BudgetExhausted;
        o.stage = cur_.stage;
        o.partial = cur_;
        o.diagnostics = "diverges: level-" + std::to_string(level) +
                        " limit configuration repeats and no further acceleration is allowed";
        return o;
    }
};

RunOutcome Runner::execute() {
    begin_block();
    cur_.stage = block_base_;
    while (true) {
        if (block_base_ >= b_.clock_bound)
            return exhausted(block_base_, "clock bound reached");
        std::optional<std::uint64_t> cap = finite_gap(block_base_, b_.clock_bound);

        std::optional<VerifiedCycle> cycle;
        while (true) {
            if (cur_.state == p_.halt_state()) return halted(stage_now());
            if (cap && steps_ >= *cap) return exhausted(b_.clock_bound, "clock bound reached");
            if (steps_ >= b_.steps_per_block)
                return no_loop("no repeating configuration within " +
                               std::to_string(b_.steps_per_block) + " steps of block at stage " +
                               format_cnf(block_base_));
            exec_step(cur_, true);

            // exact repeats via incremental full-configuration hashing
            auto& hits = seen_[hash_];
            if (!hits.empty()) {
                auto v = check_candidate(hits.back());
                if (v) {
                    cycle = std::move(v);
                    break;
                }
            }
            hits.push_back(steps_);

            // translated repeats via event periodicity
            if (steps_ % kScanInterval == 0 && steps_ >= 8) {
                std::uint64_t found = 0;
                for (std::uint64_t P = 1; P <= std::min(kMaxShiftPeriod, steps_ / 2); ++P) {
                    auto retry = shift_retry_at_.find(P);
                    if (retry != shift_retry_at_.end() && steps_ < retry->second) continue;
                    bool match = true;
                    int net = 0;
                    for (std::uint64_t i = 0; i < P; ++i) {
                        if (!(events_[steps_ - 1 - i] == events_[steps_ - 1 - P - i])) {
                            match = false;
                            break;
                        }
                        net += events_[steps_ - 1 - i].move;
                    }
                    if (match && net > 0) {
                        found = P;
                        break;
                    }
                }
                if (found) {
                    auto v = check_candidate(steps_ - found);
                    if (v) {
                        cycle = std::move(v);
                        break;
                    }
                    shift_retry_at_[found] = steps_ + found;
                }
            }
        }

        // A cycle was found; accelerate to the next limit stage.
        if (stage_now().block_limit(1) > b_.clock_bound)
            return exhausted(b_.clock_bound, "clock bound reached");  // unreachable; caps handle it
        if (opts_.sink) {
            TraceEvent e;
            e.kind = TraceEvent::Kind::LoopDetected;
            e.stage = format_cnf(stage_now());
            e.state = p_.state_name(cur_.state);
            e.head = cur_.head;
            e.level = 1;
            e.length = cycle->info.length;
            if (cycle->info.shift) e.shift = cycle->info.shift;
            emit(std::move(e));
        }
        LimitEntry entry = level1_limit(*cycle);
        if (opts_.soundness_check_cycles > 0) soundness_check(*cycle, entry);

        std::uint32_t level = 1;
        while (true) {
            cur_ = entry.config;
            block_base_ = entry.config.stage;
            if (opts_.sink) {
                TraceEvent e;
                e.kind = TraceEvent::Kind::LimitJump;
                e.stage = format_cnf(block_base_);
                e.state = p_.state_name(cur_.state);
                e.head = 0;
                e.level = level;
                emit(std::move(e));
            }
            std::uint32_t wl = level + 1;  // window holding level-`level` limit configs
            if (wl > b_.max_accel_level + 1) break;
            auto& W = windows_[wl];
            if (W.size() >= kMaxWindow)
                return no_loop("limit-configuration window overflow at level " + std::to_string(wl));
            std::size_t match = W.size();
            for (std::size_t j = 0; j < W.size(); ++j)
                if (W[j].config_hash == entry.config_hash &&
                    W[j].config.bits_equal(entry.config)) {
                    match = j;
                    break;
                }
            W.push_back(entry);
            if (match == W.size() - 1) break;  // no repeat; run the next block

            bool output_clean = true;
            for (std::size_t j = match + 1; j < W.size(); ++j)
                output_clean = output_clean && !W[j].output_changed;

            Ordinal jump_stage = block_base_.block_limit(wl);
            bool allowed = wl <= b_.max_accel_level && jump_stage <= b_.clock_bound;
            if (!allowed) return diverging(wl, output_clean);

            if (opts_.sink) {
                TraceEvent e;
                e.kind = TraceEvent::Kind::LoopDetected;
                e.stage = format_cnf(block_base_);
                e.state = p_.state_name(cur_.state);
                e.head = cur_.head;
                e.level = wl;
                e.length = W.size() - 1 - match;
                emit(std::move(e));
            }
            LimitEntry up;
            up.config.state = p_.limit_state();
            up.config.head = 0;
            up.config.stage = jump_stage;
            up.output_changed = false;
            const std::size_t ntapes = cur_.tapes.size();
            for (std::size_t t = 0; t < ntapes; ++t) {
                TapeView v = W[match + 1].cover[t];
                for (std::size_t j = match + 2; j < W.size(); ++j) v = view_or(v, W[j].cover[t]);
                up.config.tapes.push_back(v);
            }
            for (std::size_t t = 0; t < ntapes; ++t) {
                TapeView v = W[0].cover[t];
                for (std::size_t j = 1; j < W.size(); ++j) v = view_or(v, W[j].cover[t]);
                up.cover.push_back(v);
            }
            for (std::size_t j = 0; j < W.size(); ++j)
                up.output_changed = up.output_changed || W[j].output_changed;
            if (!up.config.tapes[2].bits_equal(cur_.tapes[2])) {
                up.output_changed = true;
                last_output_change_ = jump_stage;
            }
            up.config_hash = hash_config(up.config);
            for (std::uint32_t m = 2; m <= wl; ++m) windows_[m].clear();
            entry = std::move(up);
            level = wl;
        }
        begin_block();
    }
}

}  // namespace

RunOutcome run(const Program& p, RealPtr input, const Budgets& b, const RunOptions& opts) {
    Runner r(p, std::move(input), std::nullopt, std::nullopt, b, opts, false);
    return r.execute();
}

RunOutcome run_with_real_oracle(const Program& p, RealPtr input, RealPtr oracle, const Budgets& b,
                                const RunOptions& opts) {
    if (p.arity() != 4) throw RunError{"real-oracle run requires a four-tape program"};
    if (p.uses_query()) throw RunError{"program issues set-oracle queries in real-oracle mode"};
    Runner r(p, std::move(input), std::move(oracle), std::nullopt, b, opts, false);
    return r.execute();
}

RunOutcome run_with_set_oracle(const Program& p, RealPtr input, SetOraclePredicate member,
                               const Budgets& b, const RunOptions& opts) {
    if (p.arity() != 4) throw RunError{"set-oracle run requires a four-tape program"};
    Runner r(p, std::move(input), std::nullopt, std::move(member), b, opts, false);
    return r.execute();
}

RunOutcome run_eventual(const Program& p, RealPtr input, const Budgets& b, const RunOptions& opts) {
    Runner r(p, std::move(input), std::nullopt, std::nullopt, b, opts, true);
    return r.execute();
}

SemiDecision semi_decide(const Program& p, RealPtr input, const Budgets& b) {
    return run(p, std::move(input), b).halted() ? SemiDecision::Accepted
                                                : SemiDecision::Indeterminate;
}

// --- trace JSON ---

namespace {
const char* kind_name(TraceEvent::Kind k) {
    switch (k) {
        case TraceEvent::Kind::Step: return "step";
        case TraceEvent::Kind::LoopDetected: return "loop-detected";
        case TraceEvent::Kind::LimitJump: return "limit-jump";
        case TraceEvent::Kind::OracleQuery: return "oracle-query";
        case TraceEvent::Kind::Halt: return "halt";
    }
    return "?";
}
}  // namespace

std::string trace_event_to_json(const TraceEvent& e) {
    nlohmann::ordered_json j;
    j["event"] = kind_name(e.kind);
    j["stage"] = e.stage;
    j["state"] = e.state;
    j["head"] = e.head;
    if (e.kind == TraceEvent::Kind::Step) j["changed_cells"] = e.changed_cells;
    if (e.kind == TraceEvent::Kind::LoopDetected || e.kind == TraceEvent::Kind::LimitJump)
        j["level"] = e.level;
    if (e.kind == TraceEvent::Kind::LoopDetected) {
        j["length"] = e.length;
        if (e.shift) j["shift"] = *e.shift;
    }
    if (e.answer) j["answer"] = *e.answer;
    return j.dump();
}

TraceEvent trace_event_from_json(const std::string& line) {
    auto j = nlohmann::ordered_json::parse(line);
    TraceEvent e;
    std::string k = j.at("event");
    if (k == "step") e.kind = TraceEvent::Kind::Step;
    else if (k == "loop-detected") e.kind = TraceEvent::Kind::LoopDetected;
    else if (k == "limit-jump") e.kind = TraceEvent::Kind::LimitJump;
    else if (k == "oracle-query") e.kind = TraceEvent::Kind::OracleQuery;
    else if (k == "halt") e.kind = TraceEvent::Kind::Halt;
    else throw std::runtime_error("unknown trace event kind: " + k);
    e.stage = j.at("stage");
    e.state = j.at("state");
    e.head = j.at("head");
    if (j.contains("changed_cells")) e.changed_cells = j["changed_cells"].get<std::vector<Cell>>();
    if (j.contains("level")) e.level = j["level"];
    if (j.contains("length")) e.length = j["length"];
    if (j.contains("shift")) e.shift = j["shift"].get<Cell>();
    if (j.contains("answer")) e.answer = j["answer"].get<bool>();
    return e;
}

void register_builtin_set_oracles() {
    if (has_set_oracle("cell0_is_1")) return;
    register_set_oracle("cell0_is_1", [](const TapeView& v) { return v.peek(0); });
}

}  // namespace ittm
