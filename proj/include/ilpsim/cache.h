#ifndef ILPSIM_CACHE_H
#define ILPSIM_CACHE_H

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilpsim {

struct CacheModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tree-PLRU replacement metadata for one power-of-two-way set.
///
/// bits[] is a complete binary tree stored heap-style (children of node i
/// are 2i+1 and 2i+2); leaves left-to-right are ways 0..ways-1. Bit 0 means
/// the arrow points left, 1 right. Following arrows from the root reaches
/// the eviction candidate.
struct PlruTree {
    int ways = 0;
    std::vector<std::uint8_t> bits;  // size ways - 1

    PlruTree() = default;
    explicit PlruTree(int ways_, std::uint32_t packed = 0);

    std::uint32_t packed() const;

    bool operator==(const PlruTree&) const = default;
};

// Leaf reached by following arrow bits from the root. Pure.
int plru_evict_candidate(const PlruTree& t);

// Every node on the root-to-way path is set to point away from `way`;
// other bits unchanged. Pure.
PlruTree plru_update(const PlruTree& t, int way);

enum class Policy { TreePlru, TrueLru, Random };

const char* policy_name(Policy p);
std::optional<Policy> policy_from_name(const std::string& name);

struct CacheConfig {
    int sets = 64;
    int ways = 8;
    Policy policy = Policy::TreePlru;
    std::uint64_t seed = 0;  // Random policy only
    int hit_latency = 4;
    int miss_latency = 200;

    // Two-level inclusive hierarchy (levels == 2): an L1 miss that hits the
    // larger second level costs llc_latency, a miss in both costs
    // miss_latency (DRAM).
    int levels = 1;
    bool inclusive = true;
    int l2_sets = 512;
    int l2_ways = 16;
    int llc_latency = 40;

    // PREFETCH accesses update replacement metadata like demand accesses by
    // default; weak_prefetch_fill installs at the eviction-candidate way
    // without flipping PLRU bits.
    bool weak_prefetch_fill = false;

    void validate() const;
};

struct AccessResult {
    bool hit = false;
    std::optional<std::uint64_t> evicted;
    int latency = 0;
    std::optional<int> victim_way;
};

struct CacheEvent {
    long cycle = 0;
    int level = 1;
    int set = 0;
    std::uint64_t tag = 0;
    bool hit = false;
    std::optional<std::uint64_t> victim;
    int instr = -1;  // filled by the simulator when driven from a program
};

/// Set-associative cache with pluggable replacement and an event log.
/// Addresses are line-granular integers; set index = address mod sets.
class CacheState {
public:
    explicit CacheState(CacheConfig cfg);

    const CacheConfig& config() const { return cfg_; }

    // Demand access: updates contents, metadata, and the event log.
    AccessResult access(std::uint64_t address, long cycle = 0, int instr = -1);

    // Prefetch access: identical to a demand access unless weak_prefetch_fill.
    AccessResult prefetch(std::uint64_t address, long cycle = 0, int instr = -1);

    // Non-mutating: would this access hit, and at what latency?
    int probe_latency(std::uint64_t address) const;
    bool resident(std::uint64_t address) const;       // L1
    bool resident_l2(std::uint64_t address) const;    // levels == 2 only

    // Direct state manipulation for experiment setup (no events, no latency).
    void install(std::uint64_t address);
    void evict_line(std::uint64_t address);  // flush from every level
    // Place a line at an exact L1 way (or clear it) without touching
    // replacement metadata; pairs with set_tree for replaying exact states.
    void set_way(int set, int way, std::optional<std::uint64_t> tag);

    int set_index(std::uint64_t address) const {
        return static_cast<int>(address % static_cast<std::uint64_t>(cfg_.sets));
    }

    // Way contents of an L1 set (nullopt = invalid way).
    const std::vector<std::optional<std::uint64_t>>& set_contents(int set) const;
    const PlruTree& set_tree(int set) const;
    void set_tree(int set, const PlruTree& t);

    const std::vector<CacheEvent>& events() const { return events_; }
    void clear_events() { events_.clear(); }
    long miss_count(int level) const;
    void tag_last_event(int instr);

private:
    struct Set {
        std::vector<std::optional<std::uint64_t>> lines;
        PlruTree tree;              // TreePlru
        std::vector<int> lru;       // TrueLru: way indices, MRU first
    };

    AccessResult access_level(std::vector<Set>& level, int level_no, int sets, int ways,
                              std::uint64_t address, long cycle, bool weak_fill);
    int choose_victim(Set& s, int ways, bool weak_fill);
    void touch(Set& s, int way, bool weak_fill);
    void back_invalidate(std::uint64_t address);

    CacheConfig cfg_;
    std::vector<Set> l1_;
    std::vector<Set> l2_;
    std::mt19937_64 rng_;
    std::vector<CacheEvent> events_;
};

struct PrimeFailed : std::runtime_error {
    explicit PrimeFailed(int set_index)
        : std::runtime_error("PrimeFailed(" + std::to_string(set_index) + ")"),
          set_index(set_index) {}
    int set_index;
};

/// Brings `lines` resident in their set. Deterministic policies access each
/// line once in order; Random repeats passes until all are resident (pass
/// count capped). All `lines` must map to `set_index`. Returns passes used.
int prime_set(CacheState& s, int set_index, const std::vector<std::uint64_t>& lines,
              int max_passes = 1000);

}  // namespace ilpsim

#endif
