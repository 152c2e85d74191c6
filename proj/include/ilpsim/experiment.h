#ifndef ILPSIM_EXPERIMENT_H
#define ILPSIM_EXPERIMENT_H

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilpsim/gadget.h"
#include "ilpsim/magnifier.h"

namespace ilpsim {

struct ExperimentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quantized time source modeling a coarsened (browser-style) timer:
/// readings are floor(t/G)*G plus a seeded uniform jitter in [0, jitter].
class CoarseTimer {
public:
    CoarseTimer(long granularity, long jitter = 0, std::uint64_t seed = 0)
        : granularity_(granularity), jitter_(jitter), rng_(seed) {
        if (granularity < 1) throw ExperimentError("granularity must be >= 1");
        if (jitter < 0) throw ExperimentError("jitter must be >= 0");
    }

    long read(long cycles) {
        if (cycles < 0) throw ExperimentError("negative time");
        long quantized = (cycles / granularity_) * granularity_;
        if (jitter_ == 0) return quantized;
        return quantized +
               static_cast<long>(rng_() % static_cast<std::uint64_t>(jitter_ + 1));
    }

    long granularity() const { return granularity_; }
    long jitter() const { return jitter_; }

private:
    long granularity_;
    long jitter_;
    std::mt19937_64 rng_;
};

inline long coarse_read(CoarseTimer& t, long cycles) { return t.read(cycles); }

// ---------------------------------------------------------------------------
// Repetition cancellation.

struct StageTimeStack {
    long flush = 0;
    long load = 0;
    long reload = 0;
    long total() const { return flush + load + reload; }
};

struct RepetitionResult {
    long iterations = 0;
    bool racing_fix = false;
    StageTimeStack same;  // victim touches the probed address
    StageTimeStack diff;  // victim touches an unrelated address
    long delta() const { return diff.total() - same.total(); }
    std::string csv() const;
};

// Flush / victim-load / reload loop. Without the fix, the load and reload
// stage deltas cancel; with it, the load stage runs inside a presence race
// whose constant-time baseline outlasts any load, so only the reload stage
// differs.
RepetitionResult repetition_experiment(long iterations, bool use_racing_fix,
                                       const CacheConfig& cache = CacheConfig{},
                                       const MicroarchConfig& core = MicroarchConfig{});

// ---------------------------------------------------------------------------
// Granularity sweep.

struct GranularityRow {
    int target_len = 0;
    int ref_len = 0;  // minimal reference length classifying the target present
};

struct GranularityTable {
    std::vector<GranularityRow> rows;
    double slope = 0;     // ref_len growth per target op (latency ratio)
    int granularity = 0;  // longest run of target lengths sharing one ref_len
    int max_target_len = 0;
    // Set when some target length admits no discriminating reference chain
    // within the ROB-derived cap; the sweep stops there.
    std::optional<int> rob_exceeded_target;
    std::optional<int> rob_exceeded_ref_cap;
    std::string csv() const;
};

GranularityTable granularity_sweep(OpKind ref_kind, OpKind target_kind, int max_target_len,
                                   const MicroarchConfig& core = MicroarchConfig{});

// ---------------------------------------------------------------------------
// SpectreBack bit recovery.

struct BitTrial {
    int secret = 0;
    int predicted = 0;
    long reading = 0;
};

struct BitTrialReport {
    long trials = 0;
    long correct = 0;
    double accuracy = 0;
    long threshold = 0;
    double calib_mean_slow = 0;  // secret 0: monitored line inserted first
    double calib_mean_fast = 0;
    std::vector<BitTrial> trial_data;
    std::string csv() const;  // trial,secret,predicted,reading
};

// Per bit: a transient load warms one of two lines, a reorder race converts
// the warm side into A/B insertion order, and the reorder-pattern magnifier
// stretches that order into a coarse-timer-visible total. The decision
// threshold is learned from a 16-trial calibration with known bits.
// Throws ExperimentError("CalibrationDegenerate") if the calibration means
// coincide (e.g. zero rounds with a jitter-free timer).
BitTrialReport spectre_back(const std::vector<int>& secret_bits, long magnifier_rounds,
                            CoarseTimer timer);

// ---------------------------------------------------------------------------
// L1-hit vs LLC-miss classifier.

enum class GroundTruth { L1Hit, LlcMiss };

struct ClassifierResult {
    long trials = 0;
    long correct = 0;
    double accuracy = 0;
    int ref_len = 0;  // calibrated MUL reference length
    std::vector<std::pair<int, int>> outcomes;  // (truth, predicted) per trial
    std::string csv() const;                    // trial,truth,predicted
};

// Transient presence race with a MUL reference chain calibrated between the
// L1-hit and miss critical paths. load_jitter adds +/- that many cycles of
// seeded noise to every load. Throws ExperimentError("CalibrationImpossible")
// when no reference length separates the two latencies.
ClassifierResult hit_miss_classifier(long trials, int load_jitter = 0, int hit_latency = 4,
                                     int llc_latency = 40, int miss_latency = 200);

}  // namespace ilpsim

#endif
