#include "ilpsim/sim.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace ilpsim {

namespace {

constexpr long kNever = std::numeric_limits<long>::max();

struct CompleteEvent {
    long cycle;
    int id;
    bool operator>(const CompleteEvent& o) const {
        return cycle != o.cycle ? cycle > o.cycle : id > o.id;
    }
};

SimResult run(const Program& p, int branch_id, const MicroarchConfig& cfg, CacheState& cache) {
    cfg.validate();
    if (auto err = validate_program(p))
        throw SimError("invalid program: " + err->to_string());

    const int n = p.size();
    std::set<int> branch_deps;
    if (branch_id >= 0) {
        if (branch_id >= n || p.instructions[branch_id].kind != OpKind::Branch)
            throw SimError("NotABranch(" + std::to_string(branch_id) + ")");
        int first_transient = -1;
        for (int i = 0; i < n; ++i) {
            if (p.instructions[i].transient) {
                if (first_transient < 0) first_transient = i;
            } else if (first_transient >= 0) {
                throw SimError("transient region must be a contiguous suffix");
            }
        }
        if (first_transient >= 0 && first_transient <= branch_id)
            throw SimError("transient region must be younger than the branch");
        branch_deps.insert(p.instructions[branch_id].deps.begin(),
                           p.instructions[branch_id].deps.end());
    }

    SimResult result;
    result.instr.resize(n);

    std::vector<int> dep_remaining(n, 0);
    std::vector<std::vector<int>> consumers(n);
    for (int i = 0; i < n; ++i) {
        dep_remaining[i] = static_cast<int>(p.instructions[i].deps.size());
        for (int d : p.instructions[i].deps) consumers[d].push_back(i);
    }

    std::array<std::vector<long>, kNumOpKinds> unit_free;
    for (int k = 0; k < kNumOpKinds; ++k)
        unit_free[k].assign(cfg.units[k].count, 0);

    std::mt19937_64 jitter_rng(cfg.jitter_seed);
    auto load_latency = [&](int base) {
        if (cfg.load_jitter == 0) return base;
        int span = 2 * cfg.load_jitter + 1;
        int offset = static_cast<int>(jitter_rng() % static_cast<std::uint64_t>(span)) -
                     cfg.load_jitter;
        return std::max(1, base + offset);
    };

    std::priority_queue<CompleteEvent, std::vector<CompleteEvent>, std::greater<>> completions;
    std::deque<int> rob;
    std::set<int> waiting;  // allocated, not yet issued (id order)
    std::vector<bool> completed(n, false);

    const std::size_t events_start = cache.events().size();
    int next_alloc = 0;
    long squash_cycle = branch_id >= 0 ? kNever : kNever;
    int branch_deps_remaining = static_cast<int>(branch_deps.size());
    if (branch_id >= 0 && branch_deps_remaining == 0)
        squash_cycle = cfg.resolve_delay;  // condition available at cycle 0
    bool squash_applied = false;
    long total = 0;
    long c = 0;

    auto apply_squash = [&]() {
        squash_applied = true;
        for (int i = branch_id + 1; i < n; ++i) {
            if (!p.instructions[i].transient) continue;
            result.instr[i].squashed = true;
            waiting.erase(i);
        }
        // ROB entries free immediately; squashed heads drain in the retire phase.
    };

    while (next_alloc < n || !rob.empty()) {
        bool activity = false;

        if (!squash_applied && squash_cycle <= c) {
            apply_squash();
            activity = true;
        }

        // Completions scheduled for this cycle.
        while (!completions.empty() && completions.top().cycle <= c) {
            auto [cycle, id] = completions.top();
            completions.pop();
            if (result.instr[id].squashed) continue;
            completed[id] = true;
            activity = true;
            const std::string& tag = p.instructions[id].path_tag;
            if (!tag.empty()) {
                long& pc = result.path_complete[tag];
                pc = std::max(pc, cycle);
            }
            for (int consumer : consumers[id]) --dep_remaining[consumer];
            if (branch_deps.count(id) && --branch_deps_remaining == 0)
                squash_cycle = cycle + cfg.resolve_delay;
        }
        if (!squash_applied && squash_cycle <= c) {
            apply_squash();
            activity = true;
        }

        // In-order retirement; squashed entries just free their slots.
        while (!rob.empty()) {
            int head = rob.front();
            if (result.instr[head].squashed) {
                rob.pop_front();
                activity = true;
            } else if (completed[head] && result.instr[head].complete_cycle <= c) {
                result.instr[head].retire_cycle = c;
                total = std::max(total, c);
                rob.pop_front();
                activity = true;
            } else {
                break;
            }
        }

        // In-order allocation, up to issue_width per cycle.
        int allocated = 0;
        while (next_alloc < n && allocated < cfg.issue_width &&
               static_cast<int>(rob.size()) < cfg.rob_size) {
            int id = next_alloc;
            if (squash_applied && p.instructions[id].transient) {
                result.instr[id].squashed = true;
                ++next_alloc;
                continue;
            }
            result.instr[id].alloc_cycle = c;
            rob.push_back(id);
            waiting.insert(id);
            ++next_alloc;
            ++allocated;
            activity = true;
        }

        // Issue: oldest-first over ready instructions with a free unit.
        for (auto it = waiting.begin(); it != waiting.end();) {
            int id = *it;
            const Instruction& ins = p.instructions[id];
            if (dep_remaining[id] != 0) {
                ++it;
                continue;
            }
            auto& frees = unit_free[static_cast<int>(ins.kind)];
            auto unit = std::min_element(frees.begin(), frees.end());
            if (*unit > c) {
                ++it;
                continue;
            }
            *unit = c + cfg.unit(ins.kind).recip_throughput;
            int latency = cfg.unit(ins.kind).latency;
            if (ins.kind == OpKind::Prefetch) {
                // Fire-and-forget: the fill lands, but the instruction retires
                // at unit latency instead of waiting on the memory system.
                if (!(ins.transient && !cfg.transient_fill_persists))
                    cache.prefetch(*ins.address, c, id);
            } else if (ins.kind == OpKind::Load) {
                if (ins.transient && !cfg.transient_fill_persists) {
                    latency = cache.probe_latency(*ins.address);
                } else {
                    latency = cache.access(*ins.address, c, id).latency;
                }
                latency = load_latency(latency);
            }
            latency += ins.extra_latency;
            result.instr[id].issue_cycle = c;
            result.instr[id].complete_cycle = c + latency;
            completions.push({c + latency, id});
            it = waiting.erase(it);
            activity = true;
        }

        if (next_alloc >= n && rob.empty()) break;

        if (activity) {
            ++c;
            continue;
        }
        // Nothing changed this cycle: jump to the next event.
        long next = kNever;
        if (!completions.empty()) next = std::min(next, completions.top().cycle);
        if (!squash_applied && squash_cycle != kNever) next = std::min(next, squash_cycle);
        for (int id : waiting) {
            if (dep_remaining[id] != 0) continue;
            auto& frees = unit_free[static_cast<int>(p.instructions[id].kind)];
            next = std::min(next, *std::min_element(frees.begin(), frees.end()));
        }
        if (next == kNever || next <= c)
            throw SimError("scheduler deadlock at cycle " + std::to_string(c));
        c = next;
    }

    result.total_cycles = total;
    result.cache_events.assign(cache.events().begin() + events_start, cache.events().end());
    for (const CacheEvent& e : result.cache_events)
        if (!e.hit) ++result.miss_count[e.level];
    return result;
}

}  // namespace

SimResult simulate(const Program& p, const MicroarchConfig& cfg, CacheState& cache) {
    for (const Instruction& ins : p.instructions)
        if (ins.transient)
            throw SimError("transient instructions require simulate_transient");
    return run(p, -1, cfg, cache);
}

SimResult simulate_transient(const Program& p, int branch_id, const MicroarchConfig& cfg,
                             CacheState& cache) {
    return run(p, branch_id, cfg, cache);
}

std::string SimResult::instr_csv(const Program& p) const {
    std::ostringstream out;
    out << "id,kind,path_tag,alloc,issue,complete,retire,squashed\n";
    for (int i = 0; i < p.size(); ++i) {
        const InstrTiming& t = instr[i];
        out << i << ',' << op_kind_name(p.instructions[i].kind) << ','
            << p.instructions[i].path_tag << ',' << t.alloc_cycle << ',' << t.issue_cycle
            << ',' << t.complete_cycle << ',' << t.retire_cycle << ',' << (t.squashed ? 1 : 0)
            << '\n';
    }
    return out.str();
}

std::string SimResult::cache_event_csv() const {
    std::ostringstream out;
    out << "cycle,level,set,tag,hit,victim,instr\n";
    for (const CacheEvent& e : cache_events) {
        out << e.cycle << ',' << e.level << ',' << e.set << ',' << e.tag << ','
            << (e.hit ? 1 : 0) << ',';
        if (e.victim) out << *e.victim;
        out << ',' << e.instr << '\n';
    }
    return out.str();
}

}  // namespace ilpsim
