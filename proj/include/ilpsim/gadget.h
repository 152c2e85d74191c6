#ifndef ILPSIM_GADGET_H
#define ILPSIM_GADGET_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ilpsim/sim.h"

namespace ilpsim {

struct GadgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A fully serialized dependency sequence: each op depends on its predecessor.
struct ChainSpec {
    struct Op {
        OpKind kind = OpKind::Add;
        std::optional<std::uint64_t> address;
    };
    std::vector<Op> ops;

    static ChainSpec uniform(OpKind kind, int length);
};

/// One or more mutually independent chains executed as a unit.
struct PathSpec {
    std::vector<ChainSpec> chains;
    std::string tag;

    static PathSpec single_chain(OpKind kind, int length, std::string tag);
};

/// A target path wrapped for racing: a synchronizing cold head load, a
/// pre-extension tying every chain's input to the head, and a terminator
/// transitively dependent on every chain tail.
struct EmbeddedExpression {
    std::uint64_t head_miss_address = 0;
    PathSpec target;
    OpKind terminator_kind = OpKind::Add;
    std::optional<std::uint64_t> terminator_address;
};

struct RaceOutcome {
    enum class Kind { Presence, Order };
    enum class Order { AFirst, BFirst };
    Kind kind = Kind::Presence;
    bool present = false;
    Order order = Order::AFirst;
    bool tie = false;             // reorder race decided by the oldest-first rule
    long skew = 0;                // completion-cycle gap between the two paths
};

/// Program plus the metadata run_race needs to read the outcome back out.
struct RaceProgram {
    Program program;
    RaceOutcome::Kind variant = RaceOutcome::Kind::Presence;
    int branch_id = -1;
    std::uint64_t probe_address = 0;  // transient P/A variant
    std::uint64_t addr_a = 0;         // reorder variant
    std::uint64_t addr_b = 0;
    std::string tag_m;
    std::string tag_b;
};

// Head load, per-chain pre-extension, target chains, then a terminator
// dependent on every chain tail. The terminator is the last instruction.
Program embed_expression(const EmbeddedExpression& e);

struct RaceVerifyError {
    enum class Kind { CrossPathDependency, UnsynchronizedStart } kind;
    int id_from = -1;
    int id_to = -1;
    std::string tag;
    std::string to_string() const;
};

// ok iff no dep edge crosses the two tags and both paths' first ops depend
// (transitively through untagged instructions) on one shared head load.
std::optional<RaceVerifyError> verify_race_program(const Program& p, const std::string& tag_a,
                                                   const std::string& tag_b);

// if (path_m) { path_b -> load probe }: the measurement path's terminator is
// the branch condition; the baseline path and probe load are transient.
RaceProgram build_transient_pa_race(const EmbeddedExpression& path_m, const PathSpec& path_b,
                                    std::uint64_t probe_address);

// path_m -> load A; path_b -> load B, no branches. addr_a and addr_b must be
// distinct and map to the same monitored set.
RaceProgram build_reorder_race(const EmbeddedExpression& path_m, const PathSpec& path_b,
                               std::uint64_t addr_a, std::uint64_t addr_b, int monitored_sets);

// Runs the race and reads the outcome: probe residency for the P/A variant,
// cache insertion order of addr_a/addr_b for the reorder variant.
RaceOutcome run_race(const RaceProgram& rp, const MicroarchConfig& cfg, CacheState& cache);

}  // namespace ilpsim

#endif
