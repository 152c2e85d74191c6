#include <algorithm>
#include <set>

#include "doctest.h"
#include "ilpsim/magnifier.h"
#include "ilpsim/stats.h"

using namespace ilpsim;

TEST_CASE("the periodic replay state exists and misses every other access") {
    PlruMagnifierSetup setup = find_initial_plru_state(plru_pa_pattern());
    CHECK(setup.period_miss_positions == std::vector<int>{0, 2, 4});
    CHECK(setup.way_of[kLineA] >= 0);

    // A stays resident through many periods and misses land only on B, E, D
    CacheConfig cc;
    cc.ways = 4;
    CacheState cache(cc);
    apply_plru_setup(cache, 0, setup);
    const std::uint64_t a_line = plru_line_address(kLineA, 0, cc.sets);
    for (int period = 0; period < 12; ++period) {
        for (std::size_t i = 0; i < setup.pattern.size(); ++i) {
            AccessResult r =
                cache.access(plru_line_address(setup.pattern[i], 0, cc.sets));
            CHECK(r.hit == (r.latency == cc.hit_latency));
            CHECK(cache.resident(a_line));
            CHECK(!r.hit == (std::set<int>{0, 2, 4}.count(static_cast<int>(i)) != 0));
        }
    }
}

TEST_CASE("a full-rotation pattern admits no A-preserving periodic state") {
    CHECK_THROWS_WITH_AS(find_initial_plru_state({kLineB, kLineC, kLineD, kLineE}),
                         "NoPeriodicState", MagnifierError);
}

TEST_CASE("presence magnifier arithmetic is exact") {
    CacheConfig cc;
    cc.ways = 4;
    MagnifierReading zero = run_plru_pa_magnifier(0, cc);
    CHECK(zero.delta == 0);
    MagnifierReading r = run_plru_pa_magnifier(100, cc);
    CHECK(r.misses_state1 == 300);
    CHECK(r.misses_state0 == 0);
    CHECK(r.delta == 100 * 3 * (cc.miss_latency - cc.hit_latency));
    CHECK(r.delta == 58800);
}

TEST_CASE("reorder magnifier: one order decays, the other keeps missing") {
    CacheConfig cc;
    cc.ways = 4;
    MagnifierReading r = run_plru_reorder_magnifier(100, cc);
    CHECK(r.misses_state0 <= 6);  // B-first: constant after the decay
    MagnifierReading longer = run_plru_reorder_magnifier(400, cc);
    CHECK(longer.misses_state0 == r.misses_state0);
    CHECK(r.misses_state1 >= 3 * 99);  // A-first: periodic regime

    // per-round delta growth is perfectly linear in the deterministic model
    std::vector<double> xs, ys;
    std::vector<long> deltas = r.round_delta();
    for (std::size_t i = 1; i < deltas.size(); ++i) {  // skip the decay round
        xs.push_back(static_cast<double>(i));
        ys.push_back(static_cast<double>(deltas[i]));
    }
    CHECK(least_squares(xs, ys).r2 == doctest::Approx(1.0));
}

TEST_CASE("magnifier readings are reproducible") {
    ArbMagnifierConfig cfg;
    cfg.rounds = 40;
    MagnifierReading a = run_arbitrary_magnifier(cfg);
    MagnifierReading b = run_arbitrary_magnifier(cfg);
    CHECK(a.delta == b.delta);
    CHECK(a.round_cycles_state1 == b.round_cycles_state1);
    CHECK(a.delta > 0);
}

TEST_CASE("aligned arbitrary run stays miss-free after priming") {
    ArbMagnifierConfig cfg;
    cfg.rounds = 60;
    MagnifierReading r = run_arbitrary_magnifier(cfg);
    CHECK(r.misses_state0 == 0);
}

TEST_CASE("without prefetching the arbitrary magnifier saturates at the set budget") {
    ArbMagnifierConfig cfg;
    cfg.prefetch_enabled = false;
    cfg.rounds = 16;
    ArbMagnifierRun n = run_arbitrary_magnifier_detail(cfg);
    cfg.rounds = 64;
    ArbMagnifierRun n4 = run_arbitrary_magnifier_detail(cfg);
    CHECK(n.reading.delta == n4.reading.delta);
    CHECK(n4.effective_rounds == n.effective_rounds);
    CHECK(n.reading.delta > 0);
}

TEST_CASE("arbitrary config validation") {
    ArbMagnifierConfig cfg;
    cfg.n_sets = 7;
    CHECK_THROWS_AS(cfg.validate(), MagnifierError);
    ArbMagnifierConfig cfg2;
    cfg2.seq_len = 9;  // > 8 ways
    CHECK_THROWS_AS(cfg2.validate(), MagnifierError);
    ArbMagnifierConfig cfg3;
    cfg3.n_sets = 128;  // > 64 sets
    CHECK_THROWS_AS(cfg3.validate(), MagnifierError);
}

TEST_CASE("miss probability endpoints") {
    CHECK(monte_carlo_miss_prob(6, 0, 8, 1000, 1) == 0.0);
    CHECK(monte_carlo_miss_prob(8, 1, 8, 1000, 1) == 1.0);
    double p1 = monte_carlo_miss_prob(6, 5, 8, 5000, 42);
    CHECK(p1 == monte_carlo_miss_prob(6, 5, 8, 5000, 42));
    CHECK(p1 > 0.9);
}

TEST_CASE("arith magnifier: aligned cancels, misaligned compounds") {
    ArithMagnifierConfig cfg;
    cfg.rounds = 60;
    ArithMagnifierRun run = run_arith_magnifier_detail(cfg);
    const MagnifierReading& r = run.reading;
    CHECK(r.delta > cfg.misalign_delay);
    std::vector<long> deltas = r.round_delta();
    for (std::size_t i = 1; i < deltas.size(); ++i) CHECK(deltas[i] >= deltas[i - 1]);

    // aligned run: every round takes the same time
    for (std::size_t i = 2; i < r.round_cycles_state0.size(); ++i)
        CHECK(r.round_cycles_state0[i] - r.round_cycles_state0[i - 1] ==
              r.round_cycles_state0[1] - r.round_cycles_state0[0]);

    // racing stages never overlap across rounds while the guard is on
    for (std::size_t i = 1; i < run.a_stage_issue_state1.size(); ++i)
        CHECK(run.a_stage_issue_state1[i] >= run.b_stage_complete_state1[i - 1]);

    // guard sizes the MUL stage past the ROB
    CHECK(run.mul_count > cfg.core.rob_size);
}

TEST_CASE("arith config validation") {
    ArithMagnifierConfig cfg;
    cfg.k_div = 0;
    CHECK_THROWS_AS(cfg.validate(), MagnifierError);
    ArithMagnifierConfig cfg2;
    cfg2.core.unit(OpKind::Div).recip_throughput = 1;  // fully pipelined: no contention
    CHECK_THROWS_AS(cfg2.validate(), MagnifierError);
}

TEST_CASE("magnifier csv has the documented schema") {
    CacheConfig cc;
    cc.ways = 4;
    MagnifierReading r = run_plru_pa_magnifier(3, cc);
    std::string csv = r.csv();
    CHECK(csv.rfind("round,cycles_state0,cycles_state1,delta,misses_state0,misses_state1\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rounds
}
