#include "ilpsim/gadget.h"

#include <algorithm>
#include <set>

namespace ilpsim {

ChainSpec ChainSpec::uniform(OpKind kind, int length) {
    ChainSpec c;
    for (int i = 0; i < length; ++i) c.ops.push_back({kind, std::nullopt});
    return c;
}

PathSpec PathSpec::single_chain(OpKind kind, int length, std::string tag) {
    PathSpec p;
    p.chains.push_back(ChainSpec::uniform(kind, length));
    p.tag = std::move(tag);
    return p;
}

namespace {

void check_path(const PathSpec& path) {
    if (path.chains.empty()) throw GadgetError("EmptyPath(" + path.tag + ")");
    for (const ChainSpec& c : path.chains)
        if (c.ops.empty()) throw GadgetError("EmptyPath(" + path.tag + ")");
    if (path.tag.empty()) throw GadgetError("path tag must be non-empty");
}

std::optional<std::uint64_t> op_address(const ChainSpec::Op& op) {
    if ((op.kind == OpKind::Load || op.kind == OpKind::Prefetch) && !op.address)
        throw GadgetError("chain load without an address");
    return op.address;
}

// Appends head + pre-extensions + chains + terminator; returns {head, terminator}.
struct EmbedIds {
    int head;
    int terminator;
};

EmbedIds append_embedded(ProgramBuilder& b, const EmbeddedExpression& e) {
    check_path(e.target);
    if ((e.terminator_kind == OpKind::Load || e.terminator_kind == OpKind::Prefetch) &&
        !e.terminator_address)
        throw GadgetError("load terminator without an address");
    int head = b.add(OpKind::Load, {}, e.head_miss_address);
    std::vector<int> tails;
    for (const ChainSpec& chain : e.target.chains) {
        int prev = b.add(OpKind::Add, {head}, std::nullopt, e.target.tag);  // pre-extension
        for (const ChainSpec::Op& op : chain.ops)
            prev = b.add(op.kind, {prev}, op_address(op), e.target.tag);
        tails.push_back(prev);
    }
    int term = b.add(e.terminator_kind, tails, e.terminator_address, e.target.tag);
    return {head, term};
}

// Chains of `path` hung directly off `anchor`, joined by `join_kind`.
int append_path(ProgramBuilder& b, const PathSpec& path, int anchor, OpKind join_kind,
                std::optional<std::uint64_t> join_address, bool transient) {
    check_path(path);
    std::vector<int> tails;
    for (const ChainSpec& chain : path.chains) {
        int prev = anchor;
        for (const ChainSpec::Op& op : chain.ops)
            prev = b.add(op.kind, {prev}, op_address(op), path.tag, transient);
        tails.push_back(prev);
    }
    return b.add(join_kind, tails, join_address, path.tag, transient);
}

}  // namespace

Program embed_expression(const EmbeddedExpression& e) {
    ProgramBuilder b;
    append_embedded(b, e);
    return b.take();
}

std::string RaceVerifyError::to_string() const {
    switch (kind) {
        case Kind::CrossPathDependency:
            return "CrossPathDependency(" + std::to_string(id_from) + " -> " +
                   std::to_string(id_to) + ")";
        case Kind::UnsynchronizedStart:
            return "UnsynchronizedStart(" + tag + ")";
    }
    return "?";
}

std::optional<RaceVerifyError> verify_race_program(const Program& p, const std::string& tag_a,
                                                   const std::string& tag_b) {
    const int n = p.size();
    auto tag_of = [&](int id) -> const std::string& { return p.instructions[id].path_tag; };

    for (int i = 0; i < n; ++i) {
        const std::string& ti = tag_of(i);
        if (ti != tag_a && ti != tag_b) continue;
        const std::string& other = (ti == tag_a) ? tag_b : tag_a;
        for (int d : p.instructions[i].deps)
            if (tag_of(d) == other)
                return RaceVerifyError{RaceVerifyError::Kind::CrossPathDependency, d, i, ""};
    }

    // Untagged LOAD ancestors of each path's entry instructions must share a
    // common head; otherwise the paths do not start from one synchronizing
    // event.
    auto untagged_load_ancestors = [&](int id) {
        std::set<int> seen, loads;
        std::vector<int> stack{id};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int d : p.instructions[v].deps) {
                if (!seen.insert(d).second) continue;
                if (tag_of(d).empty() && p.instructions[d].kind == OpKind::Load)
                    loads.insert(d);
                stack.push_back(d);
            }
        }
        return loads;
    };

    for (const std::string* tag : {&tag_a, &tag_b}) {
        std::optional<std::set<int>> common;
        bool any = false;
        for (int i = 0; i < n; ++i) {
            if (tag_of(i) != *tag) continue;
            bool entry = true;
            for (int d : p.instructions[i].deps)
                if (tag_of(d) == *tag) entry = false;
            if (!entry) continue;
            any = true;
            std::set<int> loads = untagged_load_ancestors(i);
            if (!common) {
                common = std::move(loads);
            } else {
                std::set<int> inter;
                std::set_intersection(common->begin(), common->end(), loads.begin(),
                                      loads.end(), std::inserter(inter, inter.begin()));
                *common = std::move(inter);
            }
        }
        if (!any || common->empty())
            return RaceVerifyError{RaceVerifyError::Kind::UnsynchronizedStart, -1, -1, *tag};
    }
    return std::nullopt;
}

RaceProgram build_transient_pa_race(const EmbeddedExpression& path_m, const PathSpec& path_b,
                                    std::uint64_t probe_address) {
    if (path_m.target.tag == path_b.tag) throw GadgetError("paths must use distinct tags");
    ProgramBuilder b;
    EmbedIds m = append_embedded(b, path_m);
    int branch = b.add(OpKind::Branch, {m.terminator});
    append_path(b, path_b, m.head, OpKind::Load, probe_address, /*transient=*/true);

    RaceProgram rp;
    rp.program = b.take();
    rp.variant = RaceOutcome::Kind::Presence;
    rp.branch_id = branch;
    rp.probe_address = probe_address;
    rp.tag_m = path_m.target.tag;
    rp.tag_b = path_b.tag;
    if (auto err = verify_race_program(rp.program, rp.tag_m, rp.tag_b))
        throw GadgetError(err->to_string());
    return rp;
}

RaceProgram build_reorder_race(const EmbeddedExpression& path_m, const PathSpec& path_b,
                               std::uint64_t addr_a, std::uint64_t addr_b,
                               int monitored_sets) {
    if (path_m.target.tag == path_b.tag) throw GadgetError("paths must use distinct tags");
    if (addr_a == addr_b) throw GadgetError("SameAddress");
    if (monitored_sets < 1) throw GadgetError("monitored_sets must be >= 1");
    if (addr_a % static_cast<std::uint64_t>(monitored_sets) !=
        addr_b % static_cast<std::uint64_t>(monitored_sets))
        throw GadgetError("DifferentSets");
    ProgramBuilder b;
    EmbedIds m = append_embedded(b, path_m);
    b.add(OpKind::Load, {m.terminator}, addr_a, path_m.target.tag);
    append_path(b, path_b, m.head, OpKind::Load, addr_b, /*transient=*/false);

    RaceProgram rp;
    rp.program = b.take();
    rp.variant = RaceOutcome::Kind::Order;
    rp.addr_a = addr_a;
    rp.addr_b = addr_b;
    rp.tag_m = path_m.target.tag;
    rp.tag_b = path_b.tag;
    if (auto err = verify_race_program(rp.program, rp.tag_m, rp.tag_b))
        throw GadgetError(err->to_string());
    return rp;
}

RaceOutcome run_race(const RaceProgram& rp, const MicroarchConfig& cfg, CacheState& cache) {
    RaceOutcome out;
    out.kind = rp.variant;
    if (rp.variant == RaceOutcome::Kind::Presence) {
        bool referenced = false;
        for (const Instruction& ins : rp.program.instructions)
            if (ins.kind == OpKind::Load && ins.address == rp.probe_address) referenced = true;
        if (!referenced) throw GadgetError("ProbeNeverReferenced");
        SimResult r = simulate_transient(rp.program, rp.branch_id, cfg, cache);
        out.present = cache.resident(rp.probe_address);
        auto a = r.path_complete.find(rp.tag_m);
        auto b = r.path_complete.find(rp.tag_b);
        if (a != r.path_complete.end() && b != r.path_complete.end())
            out.skew = b->second - a->second;
        return out;
    }
    SimResult r = simulate(rp.program, cfg, cache);
    long cycle_a = -1, cycle_b = -1;
    for (const CacheEvent& e : r.cache_events) {
        if (e.level != 1) continue;
        if (e.tag == rp.addr_a && cycle_a < 0) cycle_a = e.cycle;
        if (e.tag == rp.addr_b && cycle_b < 0) cycle_b = e.cycle;
    }
    if (cycle_a < 0 || cycle_b < 0) throw GadgetError("ProbeNeverReferenced");
    // Insertion order is event-log order; equal cycles fall to the scheduler's
    // oldest-first rule, which issues the program-order-earlier load first.
    for (const CacheEvent& e : r.cache_events) {
        if (e.level != 1) continue;
        if (e.tag == rp.addr_a) {
            out.order = RaceOutcome::Order::AFirst;
            break;
        }
        if (e.tag == rp.addr_b) {
            out.order = RaceOutcome::Order::BFirst;
            break;
        }
    }
    out.tie = cycle_a == cycle_b;
    out.skew = cycle_b - cycle_a;
    return out;
}

}  // namespace ilpsim
