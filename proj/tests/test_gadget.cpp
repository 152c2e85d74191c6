#include "doctest.h"
#include "ilpsim/gadget.h"

using namespace ilpsim;

namespace {

EmbeddedExpression m_chain(OpKind kind, int len) {
    EmbeddedExpression e;
    e.head_miss_address = 1;
    e.target = PathSpec::single_chain(kind, len, "m");
    return e;
}

bool pa_present(int m_len, int b_len) {
    RaceProgram rp = build_transient_pa_race(
        m_chain(OpKind::Add, m_len), PathSpec::single_chain(OpKind::Add, b_len, "b"), 2);
    CacheState cache{CacheConfig{}};
    return run_race(rp, MicroarchConfig{}, cache).present;
}

RaceOutcome reorder_run(int m_len, int b_len) {
    RaceProgram rp = build_reorder_race(
        m_chain(OpKind::Add, m_len), PathSpec::single_chain(OpKind::Add, b_len, "b"), 64, 128,
        64);
    CacheState cache{CacheConfig{}};
    return run_race(rp, MicroarchConfig{}, cache);
}

}  // namespace

TEST_CASE("embedding wraps a chain in head, pre-extension and terminator") {
    Program p = embed_expression(m_chain(OpKind::Add, 3));
    REQUIRE(p.size() == 6);
    CHECK(p.instructions[0].kind == OpKind::Load);
    CHECK(p.instructions[1].deps == std::vector<int>{0});
    CHECK(p.instructions[5].deps == std::vector<int>{4});  // terminator on the tail
    CHECK(!validate_program(p));
}

TEST_CASE("a terminator joins every chain tail") {
    EmbeddedExpression e;
    e.head_miss_address = 1;
    e.target.tag = "m";
    e.target.chains.push_back(ChainSpec::uniform(OpKind::Add, 2));
    e.target.chains.push_back(ChainSpec::uniform(OpKind::Mul, 4));
    Program p = embed_expression(e);
    CHECK(p.instructions[p.size() - 1].deps.size() == 2);
}

TEST_CASE("nothing issues before the head miss returns") {
    Program p = embed_expression(m_chain(OpKind::Add, 5));
    MicroarchConfig cfg;
    CacheState cache{CacheConfig{}};
    SimResult r = simulate(p, cfg, cache);
    for (int i = 1; i < p.size(); ++i)
        CHECK(r.instr[i].issue_cycle >= cfg.mem_dram);
}

TEST_CASE("empty paths are rejected") {
    EmbeddedExpression e;
    e.head_miss_address = 1;
    e.target.tag = "m";
    CHECK_THROWS_AS(embed_expression(e), GadgetError);
}

TEST_CASE("race verification catches cross-path edges and unsynchronized starts") {
    ProgramBuilder b;
    int head = b.add(OpKind::Load, {}, 1);
    int a0 = b.add(OpKind::Add, {head}, std::nullopt, "a");
    int b0 = b.add(OpKind::Add, {head}, std::nullopt, "b");
    b.add(OpKind::Add, {a0}, std::nullopt, "a");
    b.add(OpKind::Add, {b0}, std::nullopt, "b");
    Program ok = b.program();
    CHECK(!verify_race_program(ok, "a", "b"));

    Program cross = ok;
    cross.instructions[4].deps.push_back(a0);  // b-tail reads an a-op
    auto err = verify_race_program(cross, "a", "b");
    REQUIRE(err.has_value());
    CHECK(err->kind == RaceVerifyError::Kind::CrossPathDependency);
    CHECK(err->id_from == a0);

    ProgramBuilder b2;
    b2.add(OpKind::Load, {}, 1);
    b2.add(OpKind::Add, {0}, std::nullopt, "a");
    b2.add(OpKind::Add, {}, std::nullopt, "b");  // starts from nowhere
    auto err2 = verify_race_program(b2.program(), "a", "b");
    REQUIRE(err2.has_value());
    CHECK(err2->kind == RaceVerifyError::Kind::UnsynchronizedStart);
    CHECK(err2->tag == "b");
}

TEST_CASE("transient race reads presence from the longer measurement path") {
    CHECK(pa_present(20, 5));
    CHECK(!pa_present(5, 20));
}

TEST_CASE("presence never flips back as the measurement path grows") {
    bool seen_true = false;
    for (int m = 1; m <= 30; ++m) {
        bool p = pa_present(m, 12);
        if (seen_true) CHECK(p);
        seen_true = seen_true || p;
    }
    CHECK(seen_true);
}

TEST_CASE("reorder race order follows the shorter path and flips on swap") {
    RaceOutcome ab = reorder_run(10, 20);
    CHECK(ab.kind == RaceOutcome::Kind::Order);
    CHECK(ab.order == RaceOutcome::Order::AFirst);
    CHECK(!ab.tie);
    CHECK(ab.skew > 0);
    RaceOutcome ba = reorder_run(20, 10);
    CHECK(ba.order == RaceOutcome::Order::BFirst);
}

TEST_CASE("equal paths tie and resolve to AFirst") {
    // the measurement path carries a pre-extension and a terminator that
    // path_b does not, so b needs two extra ops for equal critical paths
    RaceOutcome tie = reorder_run(10, 12);
    CHECK(tie.tie);
    CHECK(tie.order == RaceOutcome::Order::AFirst);
    CHECK(tie.skew == 0);
}

TEST_CASE("builder input validation") {
    CHECK_THROWS_WITH_AS(build_reorder_race(m_chain(OpKind::Add, 3),
                                            PathSpec::single_chain(OpKind::Add, 3, "b"), 64,
                                            64, 64),
                         "SameAddress", GadgetError);
    CHECK_THROWS_WITH_AS(build_reorder_race(m_chain(OpKind::Add, 3),
                                            PathSpec::single_chain(OpKind::Add, 3, "b"), 64,
                                            65, 64),
                         "DifferentSets", GadgetError);
    CHECK_THROWS_AS(build_transient_pa_race(m_chain(OpKind::Add, 3),
                                            PathSpec::single_chain(OpKind::Add, 3, "m"), 2),
                    GadgetError);
}

TEST_CASE("a race program without its probe is rejected at run time") {
    RaceProgram rp = build_transient_pa_race(
        m_chain(OpKind::Add, 4), PathSpec::single_chain(OpKind::Add, 4, "b"), 2);
    rp.probe_address = 99;  // nothing loads this
    CacheState cache{CacheConfig{}};
    CHECK_THROWS_WITH_AS(run_race(rp, MicroarchConfig{}, cache), "ProbeNeverReferenced",
                         GadgetError);
}

TEST_CASE("length thresholds classify targets on both sides") {
    // with the measurement chain fixed, all shorter baselines read present and
    // sufficiently longer ones read absent
    const int m = 15;
    CHECK(pa_present(m, 5));
    CHECK(pa_present(m, 10));
    CHECK(!pa_present(m, 25));
    CHECK(!pa_present(m, 30));
}
