#include "ilpsim/magnifier.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ilpsim {

std::vector<long> MagnifierReading::round_delta() const {
    std::vector<long> d(round_cycles_state0.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = round_cycles_state1[i] - round_cycles_state0[i];
    return d;
}

std::string MagnifierReading::csv() const {
    std::ostringstream out;
    out << "round,cycles_state0,cycles_state1,delta,misses_state0,misses_state1\n";
    for (std::size_t i = 0; i < round_cycles_state0.size(); ++i) {
        out << (i + 1) << ',' << round_cycles_state0[i] << ',' << round_cycles_state1[i]
            << ',' << (round_cycles_state1[i] - round_cycles_state0[i]) << ','
            << round_misses_state0[i] << ',' << round_misses_state1[i] << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// PLRU pattern magnifiers.

const std::vector<int>& plru_pa_pattern() {
    static const std::vector<int> p{kLineB, kLineC, kLineE, kLineC, kLineD, kLineC};
    return p;
}

const std::vector<int>& plru_reorder_pattern() {
    static const std::vector<int> p{kLineC, kLineE, kLineC, kLineD, kLineC, kLineB};
    return p;
}

std::uint64_t plru_line_address(int letter, int set, int sets) {
    return static_cast<std::uint64_t>(set) +
           static_cast<std::uint64_t>(sets) * static_cast<std::uint64_t>(letter + 1);
}

namespace {

// Scratch single-set model used by the exhaustive state searches; mirrors
// CacheState's fill rule (first invalid way, else the PLRU candidate).
struct ScratchSet {
    PlruTree tree;
    std::vector<int> lines;  // letter per way, -1 invalid

    bool resident(int letter) const {
        return std::find(lines.begin(), lines.end(), letter) != lines.end();
    }
    // Returns true on hit.
    bool access(int letter) {
        for (int w = 0; w < static_cast<int>(lines.size()); ++w) {
            if (lines[w] == letter) {
                tree = plru_update(tree, w);
                return true;
            }
        }
        int victim = -1;
        for (int w = 0; w < static_cast<int>(lines.size()); ++w)
            if (lines[w] < 0) {
                victim = w;
                break;
            }
        if (victim < 0) victim = plru_evict_candidate(tree);
        lines[victim] = letter;
        tree = plru_update(tree, victim);
        return false;
    }
    bool operator==(const ScratchSet&) const = default;
};

std::array<int, kPlruLetters> way_of_from_lines(const std::vector<int>& lines) {
    std::array<int, kPlruLetters> way_of;
    way_of.fill(-1);
    for (int w = 0; w < static_cast<int>(lines.size()); ++w)
        if (lines[w] >= 0) way_of[lines[w]] = w;
    return way_of;
}

// Enumerates way->letter assignments (-1 or a distinct letter) in
// lexicographic order and calls fn on each.
template <typename Fn>
void for_each_placement(int ways, Fn&& fn) {
    std::vector<int> lines(ways, -1);
    auto rec = [&](auto&& self, int way) -> bool {
        if (way == ways) return fn(lines);
        for (int letter = -1; letter < kPlruLetters; ++letter) {
            if (letter >= 0 &&
                std::find(lines.begin(), lines.begin() + way, letter) != lines.begin() + way)
                continue;
            lines[way] = letter;
            if (self(self, way + 1)) return true;
        }
        lines[way] = -1;
        return false;
    };
    rec(rec, 0);
}

}  // namespace

PlruMagnifierSetup find_initial_plru_state(const std::vector<int>& pattern, int ways) {
    if (pattern.empty()) throw MagnifierError("empty pattern");
    const std::uint32_t n_trees = 1u << (ways - 1);
    for (std::uint32_t packed = 0; packed < n_trees; ++packed) {
        PlruMagnifierSetup found;
        bool have = false;
        for_each_placement(ways, [&](const std::vector<int>& lines) {
            if (std::find(lines.begin(), lines.end(), kLineA) == lines.end()) return false;
            ScratchSet start{PlruTree(ways, packed), lines};
            ScratchSet s = start;
            // The steady state is a 2-period orbit of (tree, contents); both
            // halves must miss exactly three times with A resident throughout.
            std::vector<int> miss_positions, second;
            for (int i = 0; i < static_cast<int>(pattern.size()); ++i) {
                if (!s.access(pattern[i])) miss_positions.push_back(i);
                if (!s.resident(kLineA)) return false;  // monitored line evicted
            }
            for (int i = 0; i < static_cast<int>(pattern.size()); ++i) {
                if (!s.access(pattern[i])) second.push_back(i);
                if (!s.resident(kLineA)) return false;
            }
            if (miss_positions.size() != 3 || miss_positions != second || !(s == start))
                return false;
            found.ways = ways;
            found.tree = start.tree;
            found.way_of = way_of_from_lines(lines);
            found.pattern = pattern;
            found.period_miss_positions = miss_positions;
            have = true;
            return true;
        });
        if (have) return found;
    }
    throw MagnifierError("NoPeriodicState");
}

PlruMagnifierSetup find_reorder_entry_state(int ways) {
    const std::vector<int>& pattern = plru_reorder_pattern();
    const std::uint32_t n_trees = 1u << (ways - 1);
    for (std::uint32_t packed = 0; packed < n_trees; ++packed) {
        PlruMagnifierSetup found;
        bool have = false;
        for_each_placement(ways, [&](const std::vector<int>& lines) {
            if (std::find(lines.begin(), lines.end(), kLineA) != lines.end()) return false;
            ScratchSet entry{PlruTree(ways, packed), lines};

            // A-first: the 3-miss regime must hold from the first pattern
            // period on, with A resident throughout and the state settling
            // into the 2-period steady orbit.
            ScratchSet s = entry;
            s.access(kLineA);
            s.access(kLineB);
            std::vector<int> miss_positions;
            ScratchSet after_first;
            for (int period = 0; period < 4; ++period) {
                std::vector<int> misses;
                for (int i = 0; i < static_cast<int>(pattern.size()); ++i) {
                    if (!s.access(pattern[i])) misses.push_back(i);
                    if (!s.resident(kLineA)) return false;
                }
                if (misses.size() != 3) return false;
                if (period == 0) miss_positions = misses;
                if (period == 1) after_first = s;
                if (period == 3 && !(s == after_first)) return false;
            }

            // B-first: misses must die out within two periods.
            ScratchSet t = entry;
            t.access(kLineB);
            t.access(kLineA);
            long early = 0;
            for (int period = 0; period < 4; ++period) {
                for (int letter : pattern) {
                    bool hit = t.access(letter);
                    if (period < 2)
                        early += hit ? 0 : 1;
                    else if (!hit)
                        return false;
                }
            }
            if (early > 6) return false;

            found.ways = ways;
            found.tree = entry.tree;
            found.way_of = way_of_from_lines(lines);
            found.pattern = pattern;
            found.period_miss_positions = miss_positions;
            have = true;
            return true;
        });
        if (have) return found;
    }
    throw MagnifierError("NoPeriodicState");
}

void apply_plru_setup(CacheState& cache, int set, const PlruMagnifierSetup& setup,
                      const std::vector<int>& skip_letters) {
    const CacheConfig& cfg = cache.config();
    if (cfg.ways != setup.ways)
        throw MagnifierError("cache associativity does not match the setup");
    for (int w = 0; w < cfg.ways; ++w) cache.set_way(set, w, std::nullopt);
    for (int letter = 0; letter < kPlruLetters; ++letter) {
        if (setup.way_of[letter] < 0) continue;
        if (std::find(skip_letters.begin(), skip_letters.end(), letter) != skip_letters.end())
            continue;
        cache.set_way(set, setup.way_of[letter],
                      plru_line_address(letter, set, cfg.sets));
    }
    cache.set_tree(set, setup.tree);
}

PlruReplayResult replay_plru_pattern(CacheState& cache, int set,
                                     const PlruMagnifierSetup& setup, long rounds) {
    PlruReplayResult out;
    const int sets = cache.config().sets;
    for (long r = 0; r < rounds; ++r) {
        for (int letter : setup.pattern) {
            AccessResult a = cache.access(plru_line_address(letter, set, sets));
            out.cycles += a.latency;
            if (!a.hit) ++out.misses;
        }
        out.round_cycles.push_back(out.cycles);
        out.round_misses.push_back(out.misses);
    }
    return out;
}

namespace {

MagnifierReading assemble_reading(long rounds, const PlruReplayResult& s0,
                                  const PlruReplayResult& s1) {
    MagnifierReading r;
    r.rounds = rounds;
    r.cycles_state0 = s0.cycles;
    r.cycles_state1 = s1.cycles;
    r.misses_state0 = s0.misses;
    r.misses_state1 = s1.misses;
    r.delta = s1.cycles - s0.cycles;
    r.round_cycles_state0 = s0.round_cycles;
    r.round_cycles_state1 = s1.round_cycles;
    r.round_misses_state0 = s0.round_misses;
    r.round_misses_state1 = s1.round_misses;
    return r;
}

}  // namespace

MagnifierReading run_plru_pa_magnifier(long rounds, const CacheConfig& cfg, int set) {
    PlruMagnifierSetup setup = find_initial_plru_state(plru_pa_pattern(), cfg.ways);

    CacheState present(cfg);
    apply_plru_setup(present, set, setup);
    PlruReplayResult s1 = replay_plru_pattern(present, set, setup, rounds);

    CacheState absent(cfg);
    apply_plru_setup(absent, set, setup, {kLineA});
    replay_plru_pattern(absent, set, setup, 1);  // untimed priming period
    absent.clear_events();
    PlruReplayResult s0 = replay_plru_pattern(absent, set, setup, rounds);

    return assemble_reading(rounds, s0, s1);
}

MagnifierReading run_plru_reorder_magnifier(long rounds, const CacheConfig& cfg, int set) {
    PlruMagnifierSetup setup = find_reorder_entry_state(cfg.ways);

    CacheState afirst(cfg);
    apply_plru_setup(afirst, set, setup);
    afirst.access(plru_line_address(kLineA, set, cfg.sets));  // untimed race input
    afirst.access(plru_line_address(kLineB, set, cfg.sets));
    PlruReplayResult s1 = replay_plru_pattern(afirst, set, setup, rounds);

    CacheState bfirst(cfg);
    apply_plru_setup(bfirst, set, setup);
    bfirst.access(plru_line_address(kLineB, set, cfg.sets));
    bfirst.access(plru_line_address(kLineA, set, cfg.sets));
    PlruReplayResult s0 = replay_plru_pattern(bfirst, set, setup, rounds);

    return assemble_reading(rounds, s0, s1);
}

// ---------------------------------------------------------------------------
// Arbitrary-replacement magnifier.

void ArbMagnifierConfig::validate() const {
    auto reject = [](const std::string& why) {
        throw MagnifierError("ConfigRejected: " + why);
    };
    if (n_sets < 2 || n_sets % 2 != 0) reject("n_sets must be even and >= 2");
    if (n_sets > cache.sets) reject("n_sets exceeds cache sets");
    if (seq_len < 1) reject("seq_len must be >= 1");
    if (seq_len > cache.ways) reject("seq_len exceeds associativity");
    if (par_len < 0) reject("par_len must be >= 0");
    if (rounds < 0) reject("rounds must be >= 0");
    if (misalign_delay < 0) reject("misalign_delay must be >= 0");
    if (prefetch_enabled) {
        if (prefetch_distance < 1) reject("prefetch_distance must be >= 1");
        if (prefetch_distance >= n_sets / 2)
            reject("prefetch_distance must be below the set-pair count");
        if (prefetch_passes < 1) reject("prefetch_passes must be >= 1");
    }
    cache.validate();
    core.validate();
}

namespace {

struct ArbProgram {
    Program program;
    std::vector<int> b_tail;                 // path B round tails
    std::vector<std::vector<int>> b_loads;   // path B SEQ load ids per round
    long effective_rounds = 0;
};

ArbProgram build_arb_program(const ArbMagnifierConfig& cfg, int delay) {
    const int pairs = cfg.n_sets / 2;
    const long eff = cfg.prefetch_enabled ? cfg.rounds
                                          : std::min<long>(cfg.rounds, pairs);
    auto addr = [&](int set, int k) {
        return static_cast<std::uint64_t>(set) +
               static_cast<std::uint64_t>(cfg.cache.sets) *
                   static_cast<std::uint64_t>(k + 1);
    };

    ProgramBuilder b;
    int root = b.add(OpKind::Const);
    int a_prev = b.add(OpKind::Add, {root}, std::nullopt, "a");
    int b_prev = b.add(OpKind::Add, {root}, std::nullopt, "b", false, delay);

    ArbProgram out;
    out.effective_rounds = eff;
    for (long r = 0; r < eff; ++r) {
        const int pair = static_cast<int>(r % pairs);
        const int even = 2 * pair, odd = 2 * pair + 1;
        for (int k = 0; k < cfg.seq_len; ++k)
            a_prev = b.add(OpKind::Load, {a_prev}, addr(even, k), "a");
        const int a_seq_tail = a_prev;

        std::vector<int> loads;
        for (int k = 0; k < cfg.seq_len; ++k) {
            b_prev = b.add(OpKind::Load, {b_prev}, addr(odd, k), "b");
            loads.push_back(b_prev);
        }
        out.b_loads.push_back(std::move(loads));
        out.b_tail.push_back(b_prev);

        // B's reads precede the destroying PAR block in program order, so the
        // aligned case stays hit-only even when issue degrades to
        // allocation order under ROB pressure. The ADD chain holds PAR back
        // for longer than B's whole read chain takes: even when an
        // allocation stall resumes right at B's reads, B still wins the
        // aligned race with margin. Misaligned, B is hundreds of cycles
        // behind and the pad changes nothing.
        const int gate_len = cfg.seq_len * cfg.cache.hit_latency + 16;
        int par_gate = a_seq_tail;
        for (int k = 0; k < gate_len; ++k)
            par_gate = b.add(OpKind::Add, {par_gate}, std::nullopt, "a");
        // Fresh PAR tags every round: each load is a guaranteed miss, so every
        // visit evicts par_len ways instead of hitting leftovers from the
        // previous lap of the set cycle.
        for (int k = 0; k < cfg.par_len; ++k)
            b.add(OpKind::Load, {par_gate},
                  addr(odd, cfg.seq_len + static_cast<int>(r) * cfg.par_len + k), "a");

        if (cfg.prefetch_enabled) {
            const int tgt = 2 * static_cast<int>((r + cfg.prefetch_distance) % pairs) + 1;
            for (int pass = 0; pass < cfg.prefetch_passes; ++pass)
                for (int k = 0; k < cfg.seq_len; ++k)
                    b.add(OpKind::Prefetch, {b_prev}, addr(tgt, k), "b");
        }
    }
    out.program = b.take();
    return out;
}

struct ArbRunData {
    std::vector<long> round_cycles, round_misses;  // cumulative, padded to rounds
    long cycles = 0, misses = 0;
};

ArbRunData run_arb_once(const ArbMagnifierConfig& cfg, int delay) {
    ArbProgram ap = build_arb_program(cfg, delay);

    CacheState cache(cfg.cache);
    auto addr = [&](int set, int k) {
        return static_cast<std::uint64_t>(set) +
               static_cast<std::uint64_t>(cfg.cache.sets) *
                   static_cast<std::uint64_t>(k + 1);
    };
    for (int s = 0; s < cfg.n_sets; ++s) {
        std::vector<std::uint64_t> lines;
        for (int k = 0; k < cfg.seq_len; ++k) lines.push_back(addr(s, k));
        prime_set(cache, s, lines);
    }
    cache.clear_events();

    SimResult sim = simulate(ap.program, cfg.core, cache);

    ArbRunData out;
    std::vector<char> is_b_load(ap.program.size(), 0);
    std::vector<int> round_of(ap.program.size(), -1);
    for (std::size_t r = 0; r < ap.b_loads.size(); ++r)
        for (int id : ap.b_loads[r]) {
            is_b_load[id] = 1;
            round_of[id] = static_cast<int>(r);
        }
    std::vector<long> misses_per_round(ap.effective_rounds, 0);
    for (const CacheEvent& e : sim.cache_events)
        if (e.level == 1 && !e.hit && e.instr >= 0 && is_b_load[e.instr])
            ++misses_per_round[round_of[e.instr]];

    long cum_m = 0;
    for (long r = 0; r < ap.effective_rounds; ++r) {
        cum_m += misses_per_round[r];
        out.round_cycles.push_back(sim.instr[ap.b_tail[r]].complete_cycle);
        out.round_misses.push_back(cum_m);
    }
    // Prefetch-off runs stop when the set pairs run out; later rounds add
    // nothing, so the series stays flat.
    while (static_cast<long>(out.round_cycles.size()) < cfg.rounds) {
        out.round_cycles.push_back(out.round_cycles.empty() ? 0 : out.round_cycles.back());
        out.round_misses.push_back(out.round_misses.empty() ? 0 : out.round_misses.back());
    }
    out.cycles = out.round_cycles.empty() ? 0 : out.round_cycles.back();
    out.misses = cum_m;
    return out;
}

}  // namespace

ArbMagnifierRun run_arbitrary_magnifier_detail(const ArbMagnifierConfig& cfg) {
    cfg.validate();
    ArbRunData s0 = run_arb_once(cfg, 0);
    ArbRunData s1 = run_arb_once(cfg, cfg.misalign_delay);

    ArbMagnifierRun out;
    out.effective_rounds =
        cfg.prefetch_enabled ? cfg.rounds : std::min<long>(cfg.rounds, cfg.n_sets / 2);
    MagnifierReading& r = out.reading;
    r.rounds = cfg.rounds;
    r.cycles_state0 = s0.cycles;
    r.cycles_state1 = s1.cycles;
    r.misses_state0 = s0.misses;
    r.misses_state1 = s1.misses;
    r.delta = s1.cycles - s0.cycles;
    r.round_cycles_state0 = std::move(s0.round_cycles);
    r.round_cycles_state1 = std::move(s1.round_cycles);
    r.round_misses_state0 = std::move(s0.round_misses);
    r.round_misses_state1 = std::move(s1.round_misses);
    return out;
}

MagnifierReading run_arbitrary_magnifier(const ArbMagnifierConfig& cfg) {
    return run_arbitrary_magnifier_detail(cfg).reading;
}

double monte_carlo_miss_prob(int seq_len, int par_len, int ways, long trials,
                             std::uint64_t seed) {
    if (seq_len > ways) throw MagnifierError("seq_len exceeds associativity");
    if (trials < 1) throw MagnifierError("trials must be >= 1");
    std::mt19937_64 master(seed);
    long evicted_trials = 0;
    for (long t = 0; t < trials; ++t) {
        CacheConfig cc;
        cc.sets = 1;
        cc.ways = ways;
        cc.policy = Policy::Random;
        cc.seed = master();
        CacheState cache(cc);
        std::vector<std::uint64_t> seq;
        for (int k = 0; k < seq_len; ++k) seq.push_back(k);
        prime_set(cache, 0, seq);
        for (int k = 0; k < par_len; ++k)
            cache.access(static_cast<std::uint64_t>(seq_len + k));
        for (std::uint64_t a : seq)
            if (!cache.resident(a)) {
                ++evicted_trials;
                break;
            }
    }
    return static_cast<double>(evicted_trials) / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// Arithmetic-operation-only magnifier.

void ArithMagnifierConfig::validate() const {
    auto reject = [](const std::string& why) {
        throw MagnifierError("ConfigRejected: " + why);
    };
    if (k_div < 1) reject("k_div must be >= 1");
    if (rounds < 0) reject("rounds must be >= 0");
    if (misalign_delay < 0) reject("misalign_delay must be >= 0");
    core.validate();
    if (core.unit(OpKind::Div).count != 1 || core.unit(OpKind::Div).recip_throughput <= 1)
        reject("needs one DIV unit with recip_throughput > 1");
}

namespace {

struct ArithShape {
    int k_div;
    int mul_count;
    int pad_a;  // ADDs between MUL tail and the parallel DIVs / A buffer
    int pad_b;  // ADDs between DIV tail and the B buffer
    int add_len;
};

ArithShape derive_arith_shape(const ArithMagnifierConfig& cfg) {
    const int lat_m = cfg.core.unit(OpKind::Mul).latency;
    const int lat_d = cfg.core.unit(OpKind::Div).latency;
    const int lat_a = cfg.core.unit(OpKind::Add).latency;
    const int rt_d = cfg.core.unit(OpKind::Div).recip_throughput;

    ArithShape s{};
    s.k_div = cfg.k_div;
    if (cfg.rob_guard) {
        // Grow the racing stage until the MUL chain alone overflows the ROB.
        while ((s.k_div * lat_d + lat_m / 2) / lat_m <= cfg.core.rob_size) ++s.k_div;
    }
    const int stage_b = s.k_div * lat_d;
    s.mul_count = (stage_b + lat_m / 2) / lat_m;
    int diff = stage_b - s.mul_count * lat_m;  // >0: A's stage ends early
    if (std::abs(diff) % lat_a != 0)
        throw MagnifierError("ConfigRejected: stage times cannot be equalized");
    s.pad_a = diff > 0 ? diff / lat_a : 0;
    s.pad_b = diff < 0 ? -diff / lat_a : 0;

    const int p = s.k_div;  // parallel DIVs per round
    const int window = std::max(lat_d + (p - 1) * rt_d, p * rt_d);
    const int needed = (window + lat_a - 1) / lat_a;
    if (cfg.add_buffer_len > 0 && cfg.add_buffer_len < needed)
        throw MagnifierError("ConfigRejected: add buffer shorter than the parallel-DIV window");
    s.add_len = cfg.add_buffer_len > 0 ? cfg.add_buffer_len : needed;
    return s;
}

struct ArithProgram {
    Program program;
    std::vector<int> a_stage_first, b_stage_last, b_round_tail;
};

ArithProgram build_arith_program(const ArithMagnifierConfig& cfg, const ArithShape& s,
                                 int delay) {
    ProgramBuilder b;
    int root = b.add(OpKind::Const);
    int a_prev = b.add(OpKind::Add, {root}, std::nullopt, "a");
    int b_prev = b.add(OpKind::Add, {root}, std::nullopt, "b", false, delay);

    // The two paths are interleaved instruction by instruction, the way
    // attacker code would emit them: with racing stages larger than the ROB,
    // a path emitted as one contiguous block would starve the other of
    // allocation slots and serialize the race away. A's parallel DIVs sit
    // right after its MUL tail, program-older than B's final racing DIV, so
    // under divider contention the older parallel burst wins the unit.
    ArithProgram out;
    for (long r = 0; r < cfg.rounds; ++r) {
        int first_mul = -1;
        auto mul = [&] {
            a_prev = b.add(OpKind::Mul, {a_prev}, std::nullopt, "a");
            if (first_mul < 0) first_mul = a_prev;
        };
        // All but one MUL zipped against all but one of B's DIVs.
        const int zip = s.k_div - 1;
        long emitted = 0;
        for (int j = 0; j < zip; ++j) {
            long upto = static_cast<long>(j + 1) * (s.mul_count - 1) / zip;
            for (; emitted < upto; ++emitted) mul();
            b_prev = b.add(OpKind::Div, {b_prev}, std::nullopt, "b");
        }
        for (; emitted < s.mul_count; ++emitted) mul();
        for (int i = 0; i < s.pad_a; ++i)
            a_prev = b.add(OpKind::Add, {a_prev}, std::nullopt, "a");
        for (int i = 0; i < s.k_div; ++i)
            b.add(OpKind::Div, {a_prev}, std::nullopt, "a");  // parallel, dangling
        int last_div = b_prev = b.add(OpKind::Div, {b_prev}, std::nullopt, "b");
        for (int i = 0; i < s.pad_b; ++i)
            b_prev = b.add(OpKind::Add, {b_prev}, std::nullopt, "b");
        for (int i = 0; i < s.add_len; ++i) {
            a_prev = b.add(OpKind::Add, {a_prev}, std::nullopt, "a");
            b_prev = b.add(OpKind::Add, {b_prev}, std::nullopt, "b");
        }
        out.a_stage_first.push_back(first_mul);
        out.b_stage_last.push_back(last_div);
        out.b_round_tail.push_back(b_prev);
    }
    out.program = b.take();
    return out;
}

}  // namespace

ArithMagnifierRun run_arith_magnifier_detail(const ArithMagnifierConfig& cfg) {
    cfg.validate();
    ArithShape shape = derive_arith_shape(cfg);

    ArithMagnifierRun out;
    out.k_div = shape.k_div;
    out.mul_count = shape.mul_count;
    out.add_buffer_len = shape.add_len;

    CacheConfig dummy;  // the gadget is cache-free; the simulator just needs one
    dummy.sets = 1;
    dummy.ways = 2;

    MagnifierReading& r = out.reading;
    r.rounds = cfg.rounds;
    for (int state = 0; state < 2; ++state) {
        const int delay = state == 0 ? 0 : cfg.misalign_delay;
        ArithProgram ap = build_arith_program(cfg, shape, delay);
        CacheState cache(dummy);
        SimResult sim = simulate(ap.program, cfg.core, cache);
        auto& cycles = state == 0 ? r.round_cycles_state0 : r.round_cycles_state1;
        auto& misses = state == 0 ? r.round_misses_state0 : r.round_misses_state1;
        for (long i = 0; i < cfg.rounds; ++i) {
            cycles.push_back(sim.instr[ap.b_round_tail[i]].complete_cycle);
            misses.push_back(0);  // cache-free gadget
        }
        if (state == 1) {
            for (long i = 0; i < cfg.rounds; ++i) {
                out.a_stage_issue_state1.push_back(sim.instr[ap.a_stage_first[i]].issue_cycle);
                out.b_stage_complete_state1.push_back(
                    sim.instr[ap.b_stage_last[i]].complete_cycle);
            }
        }
    }
    r.cycles_state0 = r.round_cycles_state0.empty() ? 0 : r.round_cycles_state0.back();
    r.cycles_state1 = r.round_cycles_state1.empty() ? 0 : r.round_cycles_state1.back();
    r.delta = r.cycles_state1 - r.cycles_state0;
    return out;
}

MagnifierReading run_arith_magnifier(const ArithMagnifierConfig& cfg) {
    return run_arith_magnifier_detail(cfg).reading;
}

}  // namespace ilpsim
