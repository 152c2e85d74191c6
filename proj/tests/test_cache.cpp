#include <cmath>
#include <set>

#include "doctest.h"
#include "ilpsim/cache.h"

using namespace ilpsim;

TEST_CASE("plru candidate follows the arrows") {
    CHECK(plru_evict_candidate(PlruTree(4, 0b000)) == 0);   // all left
    CHECK(plru_evict_candidate(PlruTree(4, 0b001)) == 2);   // right, then left
    CHECK(plru_evict_candidate(PlruTree(8, 0x7f)) == 7);    // all right
    CHECK(PlruTree(4).bits.size() == 3);
    CHECK(PlruTree(8).bits.size() == 7);
}

TEST_CASE("plru update points the path away from the touched way") {
    PlruTree t(4, 0);
    PlruTree u = plru_update(t, 0);
    CHECK(u.bits[0] == 1);  // root away from left subtree
    CHECK(u.bits[1] == 1);  // left node away from way 0
    CHECK(u.bits[2] == 0);  // untouched

    PlruTree all1(4, 0b111);
    PlruTree v = plru_update(all1, 3);
    CHECK(v.bits[0] == 0);
    CHECK(v.bits[2] == 0);
    CHECK(v.bits[1] == 1);  // other subtree untouched
}

TEST_CASE("plru update is idempotent and never leaves the candidate on the touched way") {
    for (int ways : {4, 8}) {
        for (std::uint32_t packed = 0; packed < (1u << (ways - 1)); ++packed) {
            PlruTree t(ways, packed);
            for (int w = 0; w < ways; ++w) {
                PlruTree once = plru_update(t, w);
                CHECK(plru_evict_candidate(once) != w);
                CHECK(plru_update(once, w) == once);
                // only the root-to-leaf path may change
                int changed = 0;
                for (std::size_t i = 0; i < t.bits.size(); ++i)
                    changed += t.bits[i] != once.bits[i];
                CHECK(changed <= (ways == 4 ? 2 : 3));
            }
        }
    }
}

TEST_CASE("basic hit and miss accounting") {
    CacheConfig cc;
    cc.sets = 4;
    cc.ways = 2;
    CacheState s(cc);
    AccessResult miss = s.access(9);
    CHECK(!miss.hit);
    CHECK(!miss.evicted);
    CHECK(miss.latency == cc.miss_latency);
    AccessResult hit = s.access(9);
    CHECK(hit.hit);
    CHECK(hit.latency == cc.hit_latency);
    CHECK(s.resident(9));
    CHECK(s.events().size() == 2);
    CHECK(s.events()[0].set == 1);  // 9 mod 4
    CHECK(!s.events()[0].hit);
    CHECK(s.events()[1].hit);
}

TEST_CASE("true lru evicts the oldest way") {
    CacheConfig cc;
    cc.sets = 1;
    cc.ways = 2;
    cc.policy = Policy::TrueLru;
    CacheState s(cc);
    s.access(0);
    s.access(1);
    s.access(0);           // 1 is now LRU
    auto r = s.access(2);  // evicts 1
    CHECK(r.evicted == 1);
    CHECK(s.resident(0));
    CHECK(!s.resident(1));
}

TEST_CASE("random policy is seed-deterministic and near-uniform") {
    CacheConfig cc;
    cc.sets = 1;
    cc.ways = 8;
    cc.policy = Policy::Random;
    cc.seed = 77;
    auto victim_of = [&](std::uint64_t seed) {
        CacheConfig c = cc;
        c.seed = seed;
        CacheState s(c);
        for (std::uint64_t a = 0; a < 8; ++a) s.install(a);
        return s.access(8).victim_way;
    };
    CHECK(victim_of(5) == victim_of(5));

    long counts[8] = {0};
    const long trials = 10000;
    for (long t = 0; t < trials; ++t) {
        auto w = victim_of(static_cast<std::uint64_t>(t) + 1);
        REQUIRE(w.has_value());
        ++counts[*w];
    }
    for (long c : counts)
        CHECK(std::abs(static_cast<double>(c) / trials - 0.125) <= 0.03);
}

TEST_CASE("prime_set fills deterministic and random sets") {
    {
        CacheConfig cc;
        cc.sets = 2;
        cc.ways = 4;
        CacheState s(cc);
        int passes = prime_set(s, 0, {0, 2, 4, 6});
        CHECK(passes == 1);
        for (std::uint64_t a : {0, 2, 4, 6}) CHECK(s.resident(a));
        CHECK(s.miss_count(1) == 4);
    }
    {
        CacheConfig cc;
        cc.sets = 1;
        cc.ways = 8;
        cc.policy = Policy::Random;
        cc.seed = 3;
        CacheState s(cc);
        prime_set(s, 0, {0, 1, 2, 3, 4, 5});
        for (std::uint64_t a = 0; a < 6; ++a) CHECK(s.resident(a));
    }
    {
        CacheConfig cc;
        cc.sets = 1;
        cc.ways = 8;
        CacheState s(cc);
        std::vector<std::uint64_t> nine;
        for (std::uint64_t a = 0; a < 9; ++a) nine.push_back(a);
        CHECK_THROWS_AS(prime_set(s, 0, nine), PrimeFailed);
    }
}

TEST_CASE("two-level latencies and inclusion") {
    CacheConfig cc;
    cc.levels = 2;
    cc.sets = 1;
    cc.ways = 4;
    cc.l2_sets = 1;
    cc.l2_ways = 2;
    CacheState s(cc);
    CHECK(s.access(0).latency == cc.miss_latency);  // cold: DRAM
    CHECK(s.access(0).latency == cc.hit_latency);   // L1 hit
    CHECK(s.resident_l2(0));
    s.evict_line(0);
    CHECK(!s.resident(0));
    CHECK(!s.resident_l2(0));

    // L1 miss that hits the second level
    s.access(1);
    s.set_way(0, s.set_index(1), std::nullopt);
    // clear exactly the way holding line 1
    for (int w = 0; w < cc.ways; ++w)
        if (s.set_contents(0)[w] == 1) s.set_way(0, w, std::nullopt);
    CHECK(s.access(1).latency == cc.llc_latency);

    // filling past the 2-way second level back-invalidates the L1 copy
    s.access(2);
    s.access(3);
    for (std::uint64_t a : {1, 2, 3})
        if (s.resident(a)) CHECK(s.resident_l2(a));
}

TEST_CASE("inclusion holds across a random access pattern") {
    CacheConfig cc;
    cc.levels = 2;
    cc.sets = 2;
    cc.ways = 2;
    cc.l2_sets = 2;
    cc.l2_ways = 2;
    CacheState s(cc);
    std::uint64_t x = 42;
    for (int i = 0; i < 500; ++i) {
        x = x * 6364136223846793005ull + 1442695040888963407ull;
        s.access(x % 16);
        for (std::uint64_t a = 0; a < 16; ++a)
            if (s.resident(a)) CHECK(s.resident_l2(a));
    }
}

TEST_CASE("probe_latency does not mutate") {
    CacheConfig cc;
    CacheState s(cc);
    s.access(5);
    auto tree_before = s.set_tree(s.set_index(6));
    CHECK(s.probe_latency(6) == cc.miss_latency);
    CHECK(s.probe_latency(5) == cc.hit_latency);
    CHECK(!s.resident(6));
    CHECK(s.set_tree(s.set_index(6)) == tree_before);
}

TEST_CASE("weak prefetch fill does not flip plru bits") {
    CacheConfig cc;
    cc.sets = 1;
    cc.ways = 4;
    cc.weak_prefetch_fill = true;
    CacheState s(cc);
    for (std::uint64_t a = 0; a < 4; ++a) s.access(a);
    PlruTree before = s.set_tree(0);
    int candidate = plru_evict_candidate(before);
    auto r = s.prefetch(10);
    CHECK(r.victim_way == candidate);
    CHECK(s.set_tree(0) == before);
    // demand access does flip them
    s.access(11);
    CHECK(!(s.set_tree(0) == before));
}
