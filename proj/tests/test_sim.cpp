#include <algorithm>

#include "doctest.h"
#include "ilpsim/sim.h"

using namespace ilpsim;

namespace {

Program add_chain(int n) {
    ProgramBuilder b;
    int prev = -1;
    for (int i = 0; i < n; ++i)
        prev = i == 0 ? b.add(OpKind::Add) : b.add(OpKind::Add, {prev});
    return b.take();
}

CacheState fresh_cache() { return CacheState(CacheConfig{}); }

}  // namespace

TEST_CASE("serial add chain takes one cycle per op") {
    MicroarchConfig cfg;
    CacheState cache = fresh_cache();
    SimResult r = simulate(add_chain(10), cfg, cache);
    CHECK(r.total_cycles == 10);
}

TEST_CASE("two interleaved chains run in lockstep on two units") {
    MicroarchConfig cfg;
    cfg.issue_width = 2;
    cfg.unit(OpKind::Add).count = 2;
    ProgramBuilder b;
    int a = -1, c = -1;
    for (int i = 0; i < 10; ++i) {
        a = i == 0 ? b.add(OpKind::Add) : b.add(OpKind::Add, {a});
        c = i == 0 ? b.add(OpKind::Add) : b.add(OpKind::Add, {c});
    }
    CacheState cache = fresh_cache();
    SimResult r = simulate(b.take(), cfg, cache);
    CHECK(r.total_cycles == 10);
}

TEST_CASE("reciprocal throughput spaces issues on the single divider") {
    MicroarchConfig cfg;  // DIV: 1 unit, latency 9, rt 4
    ProgramBuilder b;
    for (int i = 0; i < 4; ++i) b.add(OpKind::Div);
    CacheState cache = fresh_cache();
    SimResult r = simulate(b.take(), cfg, cache);
    CHECK(r.total_cycles == 21);  // issues at 0,4,8,12; last completes 12+9
    for (int i = 0; i < 4; ++i) CHECK(r.instr[i].issue_cycle == 4 * i);
}

TEST_CASE("ready instructions issue oldest-first") {
    MicroarchConfig cfg;  // MUL: 1 unit
    ProgramBuilder b;
    b.add(OpKind::Mul);
    b.add(OpKind::Mul);
    CacheState cache = fresh_cache();
    SimResult r = simulate(b.take(), cfg, cache);
    CHECK(r.instr[0].issue_cycle < r.instr[1].issue_cycle);
}

TEST_CASE("loads take their latency from the cache") {
    MicroarchConfig cfg;
    CacheState cache = fresh_cache();
    cache.install(7);
    ProgramBuilder b;
    b.add(OpKind::Load, {}, 7);
    int m = b.add(OpKind::Load, {}, 8);
    b.add(OpKind::Add, {m});
    CacheState run_cache = cache;
    SimResult r = simulate(b.take(), cfg, run_cache);
    CHECK(r.instr[0].complete_cycle - r.instr[0].issue_cycle == 4);
    CHECK(r.instr[1].complete_cycle - r.instr[1].issue_cycle == 200);
    CHECK(r.miss_count[1] == 1);
    CHECK(r.cache_events.size() == 2);
}

TEST_CASE("dataflow, rob occupancy and throughput invariants hold on a mixed program") {
    MicroarchConfig cfg;
    cfg.rob_size = 8;
    cfg.issue_width = 2;
    ProgramBuilder b;
    int prev = b.add(OpKind::Load, {}, 0);
    for (int i = 0; i < 40; ++i) {
        OpKind k = i % 5 == 0 ? OpKind::Div : i % 3 == 0 ? OpKind::Mul : OpKind::Add;
        prev = b.add(k, i % 7 == 0 ? std::vector<int>{} : std::vector<int>{prev});
        if (i % 11 == 0) b.add(OpKind::Load, {prev}, static_cast<std::uint64_t>(i));
    }
    Program p = b.take();
    CacheState cache = fresh_cache();
    SimResult r = simulate(p, cfg, cache);

    for (int i = 0; i < p.size(); ++i) {
        const InstrTiming& t = r.instr[i];
        CHECK(t.issue_cycle >= t.alloc_cycle);
        for (int d : p.instructions[i].deps)
            CHECK(t.issue_cycle >= r.instr[d].complete_cycle);
    }
    for (long c = 0; c <= r.total_cycles; ++c) {
        int occupied = 0;
        for (const InstrTiming& t : r.instr)
            occupied += t.alloc_cycle <= c && t.retire_cycle > c;
        CHECK(occupied <= cfg.rob_size);
    }
    for (int k = 0; k < kNumOpKinds; ++k) {
        std::vector<long> issues;
        for (int i = 0; i < p.size(); ++i)
            if (p.instructions[i].kind == static_cast<OpKind>(k))
                issues.push_back(r.instr[i].issue_cycle);
        std::sort(issues.begin(), issues.end());
        const UnitParams& u = cfg.unit(static_cast<OpKind>(k));
        for (std::size_t i = 0; i + u.count < issues.size(); ++i)
            CHECK(issues[i + u.count] - issues[i] >= u.recip_throughput);
    }

    // determinism: bit-identical rerun
    CacheState cache2 = fresh_cache();
    SimResult r2 = simulate(p, cfg, cache2);
    for (int i = 0; i < p.size(); ++i) {
        CHECK(r.instr[i].issue_cycle == r2.instr[i].issue_cycle);
        CHECK(r.instr[i].complete_cycle == r2.instr[i].complete_cycle);
    }
    CHECK(r.total_cycles == r2.total_cycles);
}

TEST_CASE("transient load that issues before the squash leaves its fill") {
    MicroarchConfig cfg;
    ProgramBuilder b;
    int head = b.add(OpKind::Load, {}, 1);  // cold miss: long window
    int br = b.add(OpKind::Branch, {head});
    b.add(OpKind::Load, {}, 2, "", true);
    Program p = b.take();
    CacheState cache = fresh_cache();
    SimResult r = simulate_transient(p, br, cfg, cache);
    CHECK(r.instr[2].squashed);
    CHECK(cache.resident(2));
    CHECK(r.cache_events.size() == 2);
}

TEST_CASE("transient load whose deps resolve after the squash never touches the cache") {
    MicroarchConfig cfg;
    ProgramBuilder b;
    int head = b.add(OpKind::Load, {}, 1);
    int br = b.add(OpKind::Branch, {head});
    int prev = b.add(OpKind::Const, {}, std::nullopt, "", true);
    for (int i = 0; i < 300; ++i)  // outlasts the 200-cycle window
        prev = b.add(OpKind::Add, {prev}, std::nullopt, "", true);
    b.add(OpKind::Load, {prev}, 2, "", true);
    Program p = b.take();
    CacheState cache = fresh_cache();
    SimResult r = simulate_transient(p, br, cfg, cache);
    CHECK(!cache.resident(2));
    CHECK(r.cache_events.size() == 1);  // only the head
    CHECK(r.instr[p.size() - 1].issue_cycle == -1);
}

TEST_CASE("without persistence a squashed fill leaves no trace") {
    MicroarchConfig cfg;
    cfg.transient_fill_persists = false;
    ProgramBuilder b;
    int head = b.add(OpKind::Load, {}, 1);
    int br = b.add(OpKind::Branch, {head});
    b.add(OpKind::Load, {}, 2, "", true);
    Program p = b.take();
    CacheState cache = fresh_cache();
    SimResult r = simulate_transient(p, br, cfg, cache);
    CHECK(!cache.resident(2));
    CHECK(r.cache_events.size() == 1);
}

TEST_CASE("squashed instructions do not count toward total cycles") {
    MicroarchConfig cfg;
    ProgramBuilder b;
    int c = b.add(OpKind::Const);
    int br = b.add(OpKind::Branch, {c});
    int prev = b.add(OpKind::Const, {}, std::nullopt, "", true);
    for (int i = 0; i < 50; ++i) prev = b.add(OpKind::Div, {prev}, std::nullopt, "", true);
    Program p = b.take();
    CacheState cache = fresh_cache();
    SimResult r = simulate_transient(p, br, cfg, cache);
    CHECK(r.total_cycles <= 4);
}

TEST_CASE("transient structure is validated") {
    MicroarchConfig cfg;
    CacheState cache = fresh_cache();
    {
        ProgramBuilder b;
        int a = b.add(OpKind::Add);
        b.add(OpKind::Add, {a});
        Program p = b.take();
        CHECK_THROWS_WITH_AS(simulate_transient(p, 1, cfg, cache), "NotABranch(1)", SimError);
    }
    {
        ProgramBuilder b;
        int c = b.add(OpKind::Const);
        int br = b.add(OpKind::Branch, {c});
        b.add(OpKind::Add, {}, std::nullopt, "", true);
        b.add(OpKind::Add);  // non-transient after transient: not a suffix
        Program p = b.take();
        CHECK_THROWS_AS(simulate_transient(p, br, cfg, cache), SimError);
    }
    {
        ProgramBuilder b;
        b.add(OpKind::Add, {}, std::nullopt, "", true);
        Program p = b.take();
        CHECK_THROWS_AS(simulate(p, cfg, cache), SimError);
    }
}

TEST_CASE("load jitter is bounded and seed-deterministic") {
    MicroarchConfig cfg;
    cfg.load_jitter = 2;
    cfg.jitter_seed = 9;
    ProgramBuilder b;
    int prev = -1;
    for (int i = 0; i < 20; ++i)
        prev = b.add(OpKind::Load, i == 0 ? std::vector<int>{} : std::vector<int>{prev},
                     static_cast<std::uint64_t>(i));
    Program p = b.take();
    CacheState c1 = fresh_cache(), c2 = fresh_cache();
    SimResult r1 = simulate(p, cfg, c1);
    SimResult r2 = simulate(p, cfg, c2);
    bool saw_offset = false;
    for (int i = 0; i < p.size(); ++i) {
        long lat = r1.instr[i].complete_cycle - r1.instr[i].issue_cycle;
        CHECK(lat >= 198);
        CHECK(lat <= 202);
        if (lat != 200) saw_offset = true;
        CHECK(lat == r2.instr[i].complete_cycle - r2.instr[i].issue_cycle);
    }
    CHECK(saw_offset);
}

TEST_CASE("path completion map records the last completion per tag") {
    MicroarchConfig cfg;
    ProgramBuilder b;
    int a = b.add(OpKind::Add, {}, std::nullopt, "x");
    b.add(OpKind::Add, {a}, std::nullopt, "x");
    b.add(OpKind::Mul, {}, std::nullopt, "y");
    Program p = b.take();
    CacheState cache = fresh_cache();
    SimResult r = simulate(p, cfg, cache);
    CHECK(r.path_complete["x"] == r.instr[1].complete_cycle);
    CHECK(r.path_complete["y"] == r.instr[2].complete_cycle);
}

TEST_CASE("config validation rejects bad knobs") {
    MicroarchConfig cfg;
    cfg.rob_size = 2;
    cfg.issue_width = 4;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    MicroarchConfig cfg2;
    cfg2.mem_llc = 300;  // not < dram
    CHECK_THROWS_AS(cfg2.validate(), ConfigError);
    MicroarchConfig ok;
    CHECK_NOTHROW(ok.validate());
    // kv round trip
    MicroarchConfig back = MicroarchConfig::from_kv(ok.to_kv());
    CHECK(back.to_kv().to_text() == ok.to_kv().to_text());
    KvFile bad = KvFile::parse_text("not_a_knob = 1\n");
    CHECK_THROWS_AS(MicroarchConfig::from_kv(bad), KvError);
}
