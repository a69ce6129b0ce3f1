#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ittm/real.hpp"

using namespace ittm;

TEST_CASE("pairing is the diagonal bijection") {
    CHECK(pair_index(0, 0) == 0);
    auto [n, m] = unpair(pair_index(3, 5));
    CHECK(n == 3);
    CHECK(m == 5);

    // surjective (and injective) on 0..99
    std::set<Cell> seen;
    for (Cell k = 0; k < 100; ++k) {
        auto [a, b] = unpair(k);
        CHECK(pair_index(a, b) == k);
        seen.insert(k);
    }
    CHECK(seen.size() == 100);
}

TEST_CASE("bit_at basics") {
    TapeView fs(RealSpec::finite_support({1, 3}));
    CHECK(fs.bit_at(3));
    CHECK(!fs.bit_at(2));

    // prefix 10 then 010101...; unrolled: 1,0,0,1,0,1 -> bit 5 is 1
    TapeView ep(RealSpec::eventually_periodic({true, false}, {false, true}));
    CHECK(ep.bit_at(0));
    CHECK(!ep.bit_at(1));
    CHECK(!ep.bit_at(2));
    CHECK(ep.bit_at(3));
    CHECK(!ep.bit_at(4));
    CHECK(ep.bit_at(5));
    CHECK(ep.touched_max == 5);

    TapeView d;
    d.write(2, true);
    CHECK(d.bit_at(2));
}

TEST_CASE("delta is canonical") {
    TapeView v(RealSpec::finite_support({4}));
    v.write(4, true);  // same as base
    CHECK(v.delta.empty());
    v.write(4, false);
    CHECK(v.delta.size() == 1);
    v.write(4, true);
    CHECK(v.delta.empty());

    TapeView w(RealSpec::finite_support({4}));
    CHECK(v.bits_equal(w));
    for (Cell c = 0; c < 16; ++c) CHECK(v.peek(c) == w.peek(c));
}

TEST_CASE("eventually periodic canonicalization") {
    auto a = RealSpec::eventually_periodic({}, {true, false, true, false});
    CHECK(a->period().size() == 2);  // minimal period

    // prefix bit that matches the periodic extension folds away
    auto b = RealSpec::eventually_periodic({false}, {true, false});
    auto c = RealSpec::eventually_periodic({}, {false, true});
    CHECK(*b == *c);

    // all-zero period collapses to finite support
    auto d = RealSpec::eventually_periodic({true, false, true}, {false, false});
    CHECK(d->kind() == RealSpec::Kind::FiniteSupport);
    CHECK(d->ones() == std::set<Cell>{0, 2});

    // the two phases of 01 are distinct reals
    auto e = RealSpec::eventually_periodic({}, {false, true});
    auto f = RealSpec::eventually_periodic({}, {true, false});
    CHECK(!(*e == *f));
}

TEST_CASE("limsup over cycles") {
    auto base = RealSpec::zeros();
    TapeView a(base), b(base);
    a.write(0, false);  // canonical no-op
    b.write(0, true);

    // alternating cell 0 -> limsup 1
    auto d = limsup_delta({a, b}, a);
    CHECK(d.at(0) == true);

    // constant-0 cell 7 stays 0
    CHECK(d.count(7) == 0);

    // singleton cycle is the identity
    TapeView s(base);
    s.write(5, true);
    auto d2 = limsup_delta({s}, s);
    CHECK(d2 == s.delta);

    // monotone: adding a snapshot can only raise bits
    TapeView extra(base);
    extra.write(9, true);
    auto small = limsup_delta({a, b}, a);
    auto big = limsup_delta({a, b, extra}, a);
    for (const auto& [cell, bit] : small)
        if (bit) CHECK(big.at(cell) == true);

    TapeView other(RealSpec::finite_support({1}));
    CHECK_THROWS((void)limsup_delta({a, other}, a));
}

TEST_CASE("relation coding") {
    auto r = encode_relation({{0, 1}, {1, 2}});
    CHECK(r->ones().size() == 2);
    CHECK(relation_bit(*r, 0, 1));
    CHECK(relation_bit(*r, 1, 2));
    CHECK(!relation_bit(*r, 2, 1));

    auto empty = encode_relation({});
    for (Cell n = 0; n < 10; ++n)
        for (Cell m = 0; m < 10; ++m) CHECK(!relation_bit(*empty, n, m));

    // successor-link chain: n <| m iff n == m+1
    auto chain = RealSpec::generated("desc_chain");
    CHECK(relation_bit(*chain, 4, 3));
    CHECK(!relation_bit(*chain, 3, 4));
    CHECK(!relation_bit(*chain, 5, 3));
    CHECK(chain->memo_consistent());
    CHECK(chain->memo_size() > 0);
}

TEST_CASE("shift invariance checks") {
    auto fs = RealSpec::finite_support({3, 7});
    CHECK(fs->shift_invariant_beyond(8, 1));
    CHECK(!fs->shift_invariant_beyond(5, 1));

    auto ep = RealSpec::eventually_periodic({true}, {false, true});
    CHECK(ep->shift_invariant_beyond(1, 2));
    CHECK(ep->shift_invariant_beyond(1, 4));
    CHECK(!ep->shift_invariant_beyond(1, 1));

    register_builtin_generators();
    auto alt = RealSpec::generated("alt01");
    CHECK(alt->shift_invariant_beyond(0, 2));
    CHECK(!alt->shift_invariant_beyond(0, 1));
    auto chain = RealSpec::generated("desc_chain");
    CHECK(!chain->shift_invariant_beyond(0, 2));  // undeclared: refuse
}

TEST_CASE("view_or covers") {
    auto base = RealSpec::zeros();
    TapeView a(base), b(base);
    a.write(1, true);
    b.write(2, true);
    TapeView u = view_or(a, b);
    CHECK(u.peek(1));
    CHECK(u.peek(2));
    CHECK(!u.peek(3));

    // differing representable bases materialize
    TapeView p(RealSpec::eventually_periodic({}, {false, true}));
    TapeView q(RealSpec::finite_support({0}));
    TapeView m = view_or(p, q);
    CHECK(m.peek(0));
    CHECK(m.peek(1));
    CHECK(!m.peek(2));
    CHECK(m.peek(3));

    // generated base plus finite ones
    TapeView g(RealSpec::generated("alt01"));
    TapeView ones(RealSpec::finite_support({4}));
    TapeView gm = view_or(g, ones);
    CHECK(gm.peek(1));
    CHECK(gm.peek(4));
    CHECK(!gm.peek(2));
}

TEST_CASE("real literals") {
    auto r = parse_real_literal("fs{1,3,8}");
    CHECK(r->ones() == std::set<Cell>{1, 3, 8});
    CHECK(format_real_literal(*r) == "fs{1,3,8}");

    auto e = parse_real_literal("ep{10|01}");
    CHECK(format_real_literal(*e) == "ep{10|01}");
    CHECK(e->bit(0));
    CHECK(e->bit(3));

    auto g = parse_real_literal("gen{desc_chain}");
    CHECK(format_real_literal(*g) == "gen{desc_chain}");

    CHECK(format_real_literal(*parse_real_literal("fs{}")) == "fs{}");
    CHECK_THROWS_AS((void)parse_real_literal("gen{nope}"), RealParseError);
    CHECK_THROWS_AS((void)parse_real_literal("ep{01}"), RealParseError);
    CHECK_THROWS_AS((void)parse_real_literal("fs{1,x}"), RealParseError);
}

TEST_CASE("view equality implies sampled bit agreement") {
    std::mt19937 rng(41);
    for (int it = 0; it < 50; ++it) {
        std::set<Cell> ones;
        for (int i = 0; i < 6; ++i) ones.insert(rng() % 64);
        auto base = RealSpec::finite_support(ones);
        TapeView v(base), w(base);
        for (int i = 0; i < 8; ++i) {
            Cell c = rng() % 64;
            bool b = rng() % 2;
            v.write(c, b);
            w.write(c, b);
        }
        REQUIRE(v.bits_equal(w));
        for (Cell c = 0; c <= v.touched_max + 8; ++c) CHECK(v.peek(c) == w.peek(c));
    }
}
