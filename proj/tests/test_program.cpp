#include "doctest.h"
#include "ilpsim/program.h"

using namespace ilpsim;

TEST_CASE("builder assigns dense ids and validates") {
    ProgramBuilder b;
    int a = b.add(OpKind::Add);
    int c = b.add(OpKind::Add, {a});
    b.add(OpKind::Load, {c}, 42, "tail");
    Program p = b.take();
    CHECK(p.size() == 3);
    CHECK(p.instructions[2].deps == std::vector<int>{1});
    CHECK(!validate_program(p));
}

TEST_CASE("empty program is valid") {
    CHECK(!validate_program(Program{}));
}

TEST_CASE("forward and self dependencies are rejected") {
    Program p;
    p.instructions.push_back({0, OpKind::Add, {1}, std::nullopt, "", false, 0});
    p.instructions.push_back({1, OpKind::Add, {}, std::nullopt, "", false, 0});
    auto err = validate_program(p);
    REQUIRE(err.has_value());
    CHECK(err->kind == ProgramError::Kind::CyclicOrForwardDep);
    CHECK(err->id == 0);
    CHECK(err->to_string() == "CyclicOrForwardDep(0)");

    Program q;
    q.instructions.push_back({0, OpKind::Add, {0}, std::nullopt, "", false, 0});
    auto err2 = validate_program(q);
    REQUIRE(err2.has_value());
    CHECK(err2->kind == ProgramError::Kind::CyclicOrForwardDep);
}

TEST_CASE("loads and prefetches need addresses") {
    for (OpKind k : {OpKind::Load, OpKind::Prefetch}) {
        Program p;
        p.instructions.push_back({0, k, {}, std::nullopt, "", false, 0});
        auto err = validate_program(p);
        REQUIRE(err.has_value());
        CHECK(err->kind == ProgramError::Kind::MissingAddress);
    }
}

TEST_CASE("non-dense ids are rejected") {
    Program p;
    p.instructions.push_back({5, OpKind::Add, {}, std::nullopt, "", false, 0});
    auto err = validate_program(p);
    REQUIRE(err.has_value());
    CHECK(err->kind == ProgramError::Kind::BadId);
}

TEST_CASE("op kind names round-trip") {
    for (int i = 0; i < kNumOpKinds; ++i) {
        OpKind k = static_cast<OpKind>(i);
        auto back = op_kind_from_name(op_kind_name(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK(!op_kind_from_name("xor"));
}
