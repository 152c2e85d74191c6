#ifndef ILPSIM_MICROARCH_H
#define ILPSIM_MICROARCH_H

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "ilpsim/kv.h"
#include "ilpsim/program.h"

namespace ilpsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnitParams {
    int count = 1;             // functional units of this kind
    int latency = 1;           // cycles from issue to completion
    int recip_throughput = 1;  // cycles between issues to the same unit
};

/// Backend parameters of the modeled out-of-order core.
///
/// Defaults: 4-wide allocation, 224-entry ROB, ADD(lat 1, 4 units, rt 1),
/// MUL(lat 3, 1 unit, rt 1), DIV(lat 9, 1 unit, rt 4), memory 4/40/200
/// cycles for L1/LLC/DRAM. LOAD latency always comes from the cache model;
/// the `load` unit entry only contributes port count and throughput.
struct MicroarchConfig {
    int issue_width = 4;
    int rob_size = 224;
    int resolve_delay = 1;  // cycles from branch-condition completion to squash
    bool transient_fill_persists = true;

    // Optional per-load latency noise, uniform in [-load_jitter, +load_jitter].
    int load_jitter = 0;
    std::uint64_t jitter_seed = 0;

    std::array<UnitParams, kNumOpKinds> units{};

    int mem_l1 = 4;
    int mem_llc = 40;
    int mem_dram = 200;

    MicroarchConfig();

    const UnitParams& unit(OpKind k) const { return units[static_cast<int>(k)]; }
    UnitParams& unit(OpKind k) { return units[static_cast<int>(k)]; }

    void validate() const;  // throws ConfigError on invariant violation

    // Line-based `key = value` round trip; unknown keys rejected.
    static MicroarchConfig from_kv(const KvFile& kv);
    KvFile to_kv() const;

    static const std::set<std::string>& known_keys();
};

}  // namespace ilpsim

#endif
