#include "ilpsim/cache.h"

#include <algorithm>

namespace ilpsim {

PlruTree::PlruTree(int ways_, std::uint32_t packed) : ways(ways_) {
    if (ways < 2 || (ways & (ways - 1)) != 0)
        throw CacheModelError("PLRU requires power-of-two associativity >= 2");
    bits.resize(ways - 1, 0);
    for (int i = 0; i < ways - 1; ++i) bits[i] = (packed >> i) & 1u;
}

std::uint32_t PlruTree::packed() const {
    std::uint32_t v = 0;
    for (int i = 0; i < static_cast<int>(bits.size()); ++i)
        if (bits[i]) v |= (1u << i);
    return v;
}

int plru_evict_candidate(const PlruTree& t) {
    int node = 0;
    const int internal = t.ways - 1;
    while (node < internal) node = 2 * node + 1 + t.bits[node];
    return node - internal;
}

PlruTree plru_update(const PlruTree& t, int way) {
    if (way < 0 || way >= t.ways) throw CacheModelError("plru_update: way out of range");
    PlruTree out = t;
    int node = way + (t.ways - 1);
    while (node > 0) {
        int parent = (node - 1) / 2;
        // Point away from the child we came up from.
        out.bits[parent] = (node == 2 * parent + 1) ? 1 : 0;
        node = parent;
    }
    return out;
}

const char* policy_name(Policy p) {
    switch (p) {
        case Policy::TreePlru: return "tree_plru";
        case Policy::TrueLru: return "true_lru";
        case Policy::Random: return "random";
    }
    return "?";
}

std::optional<Policy> policy_from_name(const std::string& name) {
    if (name == "tree_plru") return Policy::TreePlru;
    if (name == "true_lru") return Policy::TrueLru;
    if (name == "random") return Policy::Random;
    return std::nullopt;
}

void CacheConfig::validate() const {
    if (sets < 1 || ways < 1) throw CacheModelError("sets and ways must be >= 1");
    if (policy == Policy::TreePlru && (ways & (ways - 1)) != 0)
        throw CacheModelError("tree_plru requires power-of-two associativity");
    if (miss_latency <= hit_latency)
        throw CacheModelError("miss_latency must exceed hit_latency");
    if (levels != 1 && levels != 2) throw CacheModelError("levels must be 1 or 2");
    if (levels == 2) {
        if (l2_sets < 1 || l2_ways < 1) throw CacheModelError("l2 geometry must be >= 1");
        if (!(hit_latency < llc_latency && llc_latency < miss_latency))
            throw CacheModelError("latencies must satisfy hit < llc < miss");
    }
}

CacheState::CacheState(CacheConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    l1_.resize(cfg_.sets);
    for (Set& s : l1_) {
        s.lines.assign(cfg_.ways, std::nullopt);
        if (cfg_.policy == Policy::TreePlru) s.tree = PlruTree(cfg_.ways);
    }
    if (cfg_.levels == 2) {
        l2_.resize(cfg_.l2_sets);
        for (Set& s : l2_) {
            s.lines.assign(cfg_.l2_ways, std::nullopt);
            if (cfg_.policy == Policy::TreePlru) s.tree = PlruTree(cfg_.l2_ways);
        }
    }
}

void CacheState::touch(Set& s, int way, bool weak_fill) {
    if (weak_fill) return;
    switch (cfg_.policy) {
        case Policy::TreePlru:
            s.tree = plru_update(s.tree, way);
            break;
        case Policy::TrueLru: {
            auto it = std::find(s.lru.begin(), s.lru.end(), way);
            if (it != s.lru.end()) s.lru.erase(it);
            s.lru.insert(s.lru.begin(), way);
            break;
        }
        case Policy::Random:
            break;
    }
}

int CacheState::choose_victim(Set& s, int ways, bool weak_fill) {
    if (cfg_.policy == Policy::Random)
        return static_cast<int>(rng_() % static_cast<std::uint64_t>(ways));
    if (!weak_fill) {
        for (int w = 0; w < ways; ++w)
            if (!s.lines[w]) return w;
    }
    switch (cfg_.policy) {
        case Policy::TreePlru:
            return plru_evict_candidate(s.tree);
        case Policy::TrueLru:
            return s.lru.empty() ? 0 : s.lru.back();
        default:
            return 0;
    }
}

AccessResult CacheState::access_level(std::vector<Set>& level, int level_no, int sets,
                                      int ways, std::uint64_t address, long cycle,
                                      bool weak_fill) {
    int si = static_cast<int>(address % static_cast<std::uint64_t>(sets));
    Set& s = level[si];
    AccessResult r;
    for (int w = 0; w < ways; ++w) {
        if (s.lines[w] && *s.lines[w] == address) {
            r.hit = true;
            r.victim_way = w;
            touch(s, w, weak_fill);
            events_.push_back({cycle, level_no, si, address, true, std::nullopt, -1});
            return r;
        }
    }
    int victim = choose_victim(s, ways, weak_fill);
    r.victim_way = victim;
    if (s.lines[victim]) r.evicted = *s.lines[victim];
    s.lines[victim] = address;
    touch(s, victim, weak_fill);
    events_.push_back({cycle, level_no, si, address, false, r.evicted, -1});
    return r;
}

AccessResult CacheState::access(std::uint64_t address, long cycle, int instr) {
    std::size_t before = events_.size();
    AccessResult r = access_level(l1_, 1, cfg_.sets, cfg_.ways, address, cycle, false);
    if (r.hit) {
        r.latency = cfg_.hit_latency;
    } else if (cfg_.levels == 1) {
        r.latency = cfg_.miss_latency;
    } else {
        AccessResult r2 =
            access_level(l2_, 2, cfg_.l2_sets, cfg_.l2_ways, address, cycle, false);
        r.latency = r2.hit ? cfg_.llc_latency : cfg_.miss_latency;
        if (cfg_.inclusive && r2.evicted) back_invalidate(*r2.evicted);
    }
    for (std::size_t i = before; i < events_.size(); ++i) events_[i].instr = instr;
    return r;
}

AccessResult CacheState::prefetch(std::uint64_t address, long cycle, int instr) {
    std::size_t before = events_.size();
    AccessResult r = access_level(l1_, 1, cfg_.sets, cfg_.ways, address, cycle,
                                  cfg_.weak_prefetch_fill);
    if (r.hit) {
        r.latency = cfg_.hit_latency;
    } else if (cfg_.levels == 1) {
        r.latency = cfg_.miss_latency;
    } else {
        AccessResult r2 = access_level(l2_, 2, cfg_.l2_sets, cfg_.l2_ways, address, cycle,
                                       cfg_.weak_prefetch_fill);
        r.latency = r2.hit ? cfg_.llc_latency : cfg_.miss_latency;
        if (cfg_.inclusive && r2.evicted) back_invalidate(*r2.evicted);
    }
    for (std::size_t i = before; i < events_.size(); ++i) events_[i].instr = instr;
    return r;
}

void CacheState::back_invalidate(std::uint64_t address) {
    int si = set_index(address);
    Set& s = l1_[si];
    for (int w = 0; w < cfg_.ways; ++w) {
        if (s.lines[w] && *s.lines[w] == address) {
            s.lines[w] = std::nullopt;
            auto it = std::find(s.lru.begin(), s.lru.end(), w);
            if (it != s.lru.end()) s.lru.erase(it);
        }
    }
}

int CacheState::probe_latency(std::uint64_t address) const {
    if (resident(address)) return cfg_.hit_latency;
    if (cfg_.levels == 2 && resident_l2(address)) return cfg_.llc_latency;
    return cfg_.miss_latency;
}

bool CacheState::resident(std::uint64_t address) const {
    const Set& s = l1_[set_index(address)];
    for (const auto& line : s.lines)
        if (line && *line == address) return true;
    return false;
}

bool CacheState::resident_l2(std::uint64_t address) const {
    if (cfg_.levels != 2) return false;
    const Set& s = l2_[address % static_cast<std::uint64_t>(cfg_.l2_sets)];
    for (const auto& line : s.lines)
        if (line && *line == address) return true;
    return false;
}

void CacheState::install(std::uint64_t address) {
    if (cfg_.levels == 2 && !resident_l2(address)) {
        Set& s2 = l2_[address % static_cast<std::uint64_t>(cfg_.l2_sets)];
        int victim = choose_victim(s2, cfg_.l2_ways, false);
        if (s2.lines[victim] && cfg_.inclusive) back_invalidate(*s2.lines[victim]);
        s2.lines[victim] = address;
        touch(s2, victim, false);
    }
    if (resident(address)) return;
    Set& s = l1_[set_index(address)];
    int victim = choose_victim(s, cfg_.ways, false);
    s.lines[victim] = address;
    touch(s, victim, false);
}

void CacheState::evict_line(std::uint64_t address) {
    back_invalidate(address);
    if (cfg_.levels == 2) {
        Set& s2 = l2_[address % static_cast<std::uint64_t>(cfg_.l2_sets)];
        for (int w = 0; w < cfg_.l2_ways; ++w) {
            if (s2.lines[w] && *s2.lines[w] == address) {
                s2.lines[w] = std::nullopt;
                auto it = std::find(s2.lru.begin(), s2.lru.end(), w);
                if (it != s2.lru.end()) s2.lru.erase(it);
            }
        }
    }
}

void CacheState::set_way(int set, int way, std::optional<std::uint64_t> tag) {
    if (tag && set_index(*tag) != set)
        throw CacheModelError("set_way: address maps to a different set");
    l1_.at(set).lines.at(way) = tag;
    if (cfg_.levels == 2 && tag && !resident_l2(*tag)) {
        Set& s2 = l2_[*tag % static_cast<std::uint64_t>(cfg_.l2_sets)];
        int victim = choose_victim(s2, cfg_.l2_ways, false);
        s2.lines[victim] = *tag;
        touch(s2, victim, false);
    }
}

const std::vector<std::optional<std::uint64_t>>& CacheState::set_contents(int set) const {
    return l1_.at(set).lines;
}

const PlruTree& CacheState::set_tree(int set) const { return l1_.at(set).tree; }

void CacheState::set_tree(int set, const PlruTree& t) { l1_.at(set).tree = t; }

long CacheState::miss_count(int level) const {
    long n = 0;
    for (const CacheEvent& e : events_)
        if (e.level == level && !e.hit) ++n;
    return n;
}

void CacheState::tag_last_event(int instr) {
    if (!events_.empty()) events_.back().instr = instr;
}

int prime_set(CacheState& s, int set_index, const std::vector<std::uint64_t>& lines,
              int max_passes) {
    for (std::uint64_t a : lines)
        if (s.set_index(a) != set_index)
            throw CacheModelError("prime_set: address maps to a different set");
    const int ways = s.config().ways;
    if (s.config().policy != Policy::Random) {
        if (static_cast<int>(lines.size()) > ways) throw PrimeFailed(set_index);
        for (std::uint64_t a : lines) s.access(a);
        return 1;
    }
    for (int pass = 1; pass <= max_passes; ++pass) {
        bool all = true;
        for (std::uint64_t a : lines)
            if (!s.resident(a)) {
                all = false;
                break;
            }
        if (all) return pass - 1;
        for (std::uint64_t a : lines)
            if (!s.resident(a)) s.access(a);
    }
    throw PrimeFailed(set_index);
}

}  // namespace ilpsim
