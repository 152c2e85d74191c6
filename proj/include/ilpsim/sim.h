#ifndef ILPSIM_SIM_H
#define ILPSIM_SIM_H

#include <map>
#include <string>
#include <vector>

#include "ilpsim/cache.h"
#include "ilpsim/microarch.h"
#include "ilpsim/program.h"

namespace ilpsim {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InstrTiming {
    long alloc_cycle = -1;
    long issue_cycle = -1;
    long complete_cycle = -1;
    long retire_cycle = -1;
    bool squashed = false;
};

struct SimResult {
    std::vector<InstrTiming> instr;
    long total_cycles = 0;  // retirement cycle of the last non-squashed instruction
    std::vector<CacheEvent> cache_events;
    std::map<int, long> miss_count;                // level -> misses
    std::map<std::string, long> path_complete;     // path_tag -> last completion cycle

    std::string instr_csv(const Program& p) const;
    std::string cache_event_csv() const;
};

/// Deterministic dataflow scheduler over a bounded ROB.
///
/// Each cycle: in-order allocation of up to issue_width instructions while
/// the ROB has space; an instruction issues at the earliest cycle when it is
/// allocated, all deps have completed, and a unit of its kind is free (unit
/// count and reciprocal throughput). LOAD/PREFETCH latency comes from the
/// cache, accessed at issue. Retirement is in-order; ties break oldest-first.
SimResult simulate(const Program& p, const MicroarchConfig& cfg, CacheState& cache);

/// As simulate(), but instruction branch_id is a BRANCH predicted into a
/// transient region (the contiguous suffix of instructions flagged
/// transient). All transient instructions are squashed at the cycle the
/// branch's condition deps complete plus cfg.resolve_delay. Cache fills from
/// transient LOADs issued before the squash persist iff
/// cfg.transient_fill_persists.
SimResult simulate_transient(const Program& p, int branch_id, const MicroarchConfig& cfg,
                             CacheState& cache);

}  // namespace ilpsim

#endif
