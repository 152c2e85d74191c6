#include "ilpsim/experiment.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ilpsim/stats.h"

namespace ilpsim {

// ---------------------------------------------------------------------------
// Repetition cancellation.

std::string RepetitionResult::csv() const {
    std::ostringstream out;
    out << "case,flush,load,reload,total\n";
    out << "same," << same.flush << ',' << same.load << ',' << same.reload << ','
        << same.total() << '\n';
    out << "diff," << diff.flush << ',' << diff.load << ',' << diff.reload << ','
        << diff.total() << '\n';
    return out.str();
}

namespace {

// Load stage wrapped in a presence race: a constant-time baseline chain
// outlasting any load covers the victim access, so the stage time stops
// depending on hit/miss. The access itself still reaches the cache.
long raced_load_stage(CacheState& cache, std::uint64_t victim_addr,
                      const MicroarchConfig& core) {
    const int baseline_len =
        cache.config().miss_latency + cache.config().hit_latency;
    ProgramBuilder b;
    int head = b.add(OpKind::Const);
    b.add(OpKind::Load, {head}, victim_addr, "victim");
    int prev = head;
    for (int i = 0; i < baseline_len; ++i)
        prev = b.add(OpKind::Add, {prev}, std::nullopt, "baseline");
    Program p = b.take();
    return simulate(p, core, cache).total_cycles;
}

}  // namespace

RepetitionResult repetition_experiment(long iterations, bool use_racing_fix,
                                       const CacheConfig& cache_cfg,
                                       const MicroarchConfig& core) {
    RepetitionResult res;
    res.iterations = iterations;
    res.racing_fix = use_racing_fix;

    const std::uint64_t probe = 1;  // probed line
    const std::uint64_t other = 2;  // victim's unrelated line
    const long flush_cost = cache_cfg.hit_latency;

    for (int same_case = 1; same_case >= 0; --same_case) {
        CacheState cache(cache_cfg);
        StageTimeStack& stack = same_case ? res.same : res.diff;
        const std::uint64_t victim_addr = same_case ? probe : other;
        cache.access(victim_addr);  // untimed warm-up: drop the one-time cold miss
        for (long i = 0; i < iterations; ++i) {
            cache.evict_line(probe);
            stack.flush += flush_cost;
            if (use_racing_fix) {
                stack.load += raced_load_stage(cache, victim_addr, core);
            } else {
                stack.load += cache.access(victim_addr).latency;
            }
            stack.reload += cache.access(probe).latency;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Granularity sweep.

std::string GranularityTable::csv() const {
    std::ostringstream out;
    out << "target_len,ref_len\n";
    for (const GranularityRow& r : rows) out << r.target_len << ',' << r.ref_len << '\n';
    return out.str();
}

namespace {

bool race_present(OpKind ref_kind, int ref_len, OpKind target_kind, int target_len,
                  const MicroarchConfig& core) {
    EmbeddedExpression path_m;
    path_m.head_miss_address = 1;
    path_m.target = PathSpec::single_chain(ref_kind, ref_len, "ref");
    PathSpec path_b = PathSpec::single_chain(target_kind, target_len, "target");
    // The branch terminator and the resolve delay give path_b a constant
    // head start; pad the raced chain by that much so the minimal ref_len
    // tracks the target length alone instead of starting on a long plateau.
    for (int i = 0; i < core.resolve_delay + 1; ++i)
        path_b.chains[0].ops.push_back({OpKind::Add, std::nullopt});
    RaceProgram rp = build_transient_pa_race(path_m, path_b, /*probe=*/2);

    CacheConfig cc;  // single level; head and probe start cold
    CacheState cache(cc);
    return run_race(rp, core, cache).present;
}

}  // namespace

GranularityTable granularity_sweep(OpKind ref_kind, OpKind target_kind, int max_target_len,
                                   const MicroarchConfig& core) {
    if (max_target_len < 1) throw ExperimentError("max_target_len must be >= 1");
    GranularityTable table;
    // While the head miss blocks retirement the front end allocates
    // issue_width entries per cycle, so the window is spoken for after
    // rob_size / issue_width cycles; reference ops beyond that budget cannot
    // join it and the sweep stops there.
    const int ref_cap = core.rob_size / core.issue_width;

    int ref = 1;
    for (int target = 1; target <= max_target_len; ++target) {
        bool found = false;
        for (; ref <= ref_cap; ++ref) {
            if (race_present(ref_kind, ref, target_kind, target, core)) {
                found = true;
                break;
            }
        }
        if (!found) {
            table.rob_exceeded_target = target;
            table.rob_exceeded_ref_cap = ref_cap;
            break;
        }
        table.rows.push_back({target, ref});
    }

    if (!table.rows.empty()) table.max_target_len = table.rows.back().target_len;
    std::vector<double> xs, ys;
    for (const GranularityRow& r : table.rows) {
        if (r.target_len < 10 && table.rows.size() > 20) continue;
        xs.push_back(r.target_len);
        ys.push_back(r.ref_len);
    }
    table.slope = least_squares(xs, ys).slope;

    int run = 0, prev_ref = -1;
    for (const GranularityRow& r : table.rows) {
        run = r.ref_len == prev_ref ? run + 1 : 1;
        prev_ref = r.ref_len;
        table.granularity = std::max(table.granularity, run);
    }
    return table;
}

// ---------------------------------------------------------------------------
// SpectreBack.

std::string BitTrialReport::csv() const {
    std::ostringstream out;
    out << "trial,secret,predicted,reading\n";
    for (std::size_t i = 0; i < trial_data.size(); ++i)
        out << i << ',' << trial_data[i].secret << ',' << trial_data[i].predicted << ','
            << trial_data[i].reading << '\n';
    return out.str();
}

namespace {

struct SpectreBackChannel {
    CacheConfig cache_cfg;
    MicroarchConfig core;
    PlruMagnifierSetup setup;
    long rounds;

    SpectreBackChannel(long magnifier_rounds) : rounds(magnifier_rounds) {
        cache_cfg.ways = 4;
        setup = find_reorder_entry_state(cache_cfg.ways);
    }

    // One transmission: warm a secret-selected line, race two chains into the
    // monitored set, stretch the resulting insertion order with the reorder
    // pattern. Returns raw cycles.
    long transmit(int bit) const {
        const std::uint64_t warm0 = 1, warm1 = 2, head = 3;
        CacheState cache(cache_cfg);
        apply_plru_setup(cache, 0, setup);

        {  // secret-dependent transient warm-up
            // The branch condition is a cold load, so the squash lands a full
            // miss latency out and the warm load issues (and fills) first.
            ProgramBuilder b;
            int cond = b.add(OpKind::Load, {}, head);
            int br = b.add(OpKind::Branch, {cond});
            b.add(OpKind::Load, {}, bit == 0 ? warm0 : warm1, "", true);
            Program p = b.take();
            simulate_transient(p, br, core, cache);
        }

        EmbeddedExpression path_m;
        path_m.head_miss_address = head;
        path_m.target.tag = "m";
        path_m.target.chains.push_back({{{OpKind::Load, warm0}}});
        PathSpec path_b;
        path_b.tag = "b";
        path_b.chains.push_back({{{OpKind::Load, warm1}}});
        RaceProgram rp = build_reorder_race(
            path_m, path_b, plru_line_address(kLineA, 0, cache_cfg.sets),
            plru_line_address(kLineB, 0, cache_cfg.sets), cache_cfg.sets);
        run_race(rp, core, cache);

        CacheState replay_cache = cache;
        return replay_plru_pattern(replay_cache, 0, setup, rounds).cycles;
    }
};

}  // namespace

BitTrialReport spectre_back(const std::vector<int>& secret_bits, long magnifier_rounds,
                            CoarseTimer timer) {
    SpectreBackChannel chan(magnifier_rounds);

    // Calibration with known alternating bits.
    double sum_slow = 0, sum_fast = 0;
    const int calib = 16;
    for (int i = 0; i < calib; ++i) {
        int bit = i % 2;
        long reading = timer.read(chan.transmit(bit));
        (bit == 0 ? sum_slow : sum_fast) += static_cast<double>(reading);
    }
    BitTrialReport rep;
    rep.calib_mean_slow = sum_slow / (calib / 2);
    rep.calib_mean_fast = sum_fast / (calib / 2);
    if (rep.calib_mean_slow == rep.calib_mean_fast)
        throw ExperimentError("CalibrationDegenerate");
    rep.threshold = static_cast<long>((rep.calib_mean_slow + rep.calib_mean_fast) / 2.0);
    const bool slow_is_zero = rep.calib_mean_slow > rep.calib_mean_fast;

    for (int bit : secret_bits) {
        long reading = timer.read(chan.transmit(bit));
        int predicted = (reading > rep.threshold) == slow_is_zero ? 0 : 1;
        rep.trial_data.push_back({bit, predicted, reading});
        if (predicted == bit) ++rep.correct;
    }
    rep.trials = static_cast<long>(secret_bits.size());
    rep.accuracy = rep.trials ? static_cast<double>(rep.correct) / rep.trials : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Hit/miss classifier.

std::string ClassifierResult::csv() const {
    std::ostringstream out;
    out << "trial,truth,predicted\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        out << i << ',' << outcomes[i].first << ',' << outcomes[i].second << '\n';
    return out.str();
}

namespace {

bool classify_present(GroundTruth truth, int ref_len, const CacheConfig& cc,
                      const MicroarchConfig& core) {
    const std::uint64_t head = 1, victim = 2, marker = 3;
    CacheState cache(cc);
    if (truth == GroundTruth::L1Hit) cache.install(victim);

    EmbeddedExpression path_m;
    path_m.head_miss_address = head;
    path_m.target = PathSpec::single_chain(OpKind::Mul, ref_len, "ref");
    PathSpec path_b;
    path_b.tag = "probe";
    path_b.chains.push_back({{{OpKind::Load, victim}}});
    RaceProgram rp = build_transient_pa_race(path_m, path_b, marker);
    return run_race(rp, core, cache).present;
}

}  // namespace

ClassifierResult hit_miss_classifier(long trials, int load_jitter, int hit_latency,
                                     int llc_latency, int miss_latency) {
    if (hit_latency >= miss_latency) throw ExperimentError("CalibrationImpossible");
    CacheConfig cc;
    cc.levels = 2;
    cc.hit_latency = hit_latency;
    cc.llc_latency = llc_latency;
    cc.miss_latency = miss_latency;
    MicroarchConfig core;
    core.mem_l1 = hit_latency;
    core.mem_llc = llc_latency;
    core.mem_dram = miss_latency;

    // Jitter-free calibration: reference lengths for which an L1 hit reads
    // present and an LLC miss reads absent.
    std::vector<int> valid;
    const int lat_ref = core.unit(OpKind::Mul).latency;
    const int cap = miss_latency / lat_ref + 8;
    for (int r = 1; r <= cap; ++r) {
        if (classify_present(GroundTruth::L1Hit, r, cc, core) &&
            !classify_present(GroundTruth::LlcMiss, r, cc, core))
            valid.push_back(r);
    }
    if (valid.empty()) throw ExperimentError("CalibrationImpossible");

    ClassifierResult res;
    res.ref_len = valid[valid.size() / 2];  // center of the valid band

    std::mt19937_64 master(12345);
    for (long t = 0; t < trials; ++t) {
        GroundTruth truth = t % 2 == 0 ? GroundTruth::L1Hit : GroundTruth::LlcMiss;
        MicroarchConfig noisy = core;
        noisy.load_jitter = load_jitter;
        noisy.jitter_seed = master();
        bool present = classify_present(truth, res.ref_len, cc, noisy);
        GroundTruth predicted = present ? GroundTruth::L1Hit : GroundTruth::LlcMiss;
        res.outcomes.emplace_back(truth == GroundTruth::L1Hit ? 0 : 1,
                                  predicted == GroundTruth::L1Hit ? 0 : 1);
        if (predicted == truth) ++res.correct;
    }
    res.trials = trials;
    res.accuracy = trials ? static_cast<double>(res.correct) / trials : 0.0;
    return res;
}

}  // namespace ilpsim
