#include "ilpsim/microarch.h"

namespace ilpsim {

MicroarchConfig::MicroarchConfig() {
    unit(OpKind::Add) = {4, 1, 1};
    unit(OpKind::Mul) = {1, 3, 1};
    unit(OpKind::Div) = {1, 9, 4};
    unit(OpKind::Load) = {2, 1, 1};      // latency supplied by the cache model
    unit(OpKind::Prefetch) = {2, 1, 1};  // latency supplied by the cache model
    unit(OpKind::Branch) = {1, 1, 1};
    unit(OpKind::Const) = {4, 1, 1};
}

void MicroarchConfig::validate() const {
    if (issue_width < 1) throw ConfigError("issue_width must be >= 1");
    if (rob_size < issue_width) throw ConfigError("rob_size must be >= issue_width");
    if (resolve_delay < 0) throw ConfigError("resolve_delay must be >= 0");
    if (load_jitter < 0) throw ConfigError("load_jitter must be >= 0");
    for (int i = 0; i < kNumOpKinds; ++i) {
        const UnitParams& u = units[i];
        const char* name = op_kind_name(static_cast<OpKind>(i));
        if (u.count < 1) throw ConfigError(std::string(name) + "_units must be >= 1");
        if (u.latency < 1) throw ConfigError(std::string(name) + "_latency must be >= 1");
        if (u.recip_throughput < 1)
            throw ConfigError(std::string(name) + "_rt must be >= 1");
    }
    if (!(mem_l1 < mem_llc && mem_llc < mem_dram))
        throw ConfigError("memory latencies must be strictly increasing: l1 < llc < dram");
    if (mem_l1 < 1) throw ConfigError("mem_l1 must be >= 1");
}

const std::set<std::string>& MicroarchConfig::known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k = {"issue_width",  "rob_size",    "resolve_delay",
                                   "transient_fill_persists",     "load_jitter",
                                   "jitter_seed",  "mem_l1",      "mem_llc",
                                   "mem_dram"};
        for (int i = 0; i < kNumOpKinds; ++i) {
            std::string name = op_kind_name(static_cast<OpKind>(i));
            k.insert(name + "_units");
            k.insert(name + "_latency");
            k.insert(name + "_rt");
        }
        return k;
    }();
    return keys;
}

MicroarchConfig MicroarchConfig::from_kv(const KvFile& kv) {
    kv.require_known(known_keys());
    MicroarchConfig cfg;
    cfg.issue_width = static_cast<int>(kv.get_long("issue_width", cfg.issue_width));
    cfg.rob_size = static_cast<int>(kv.get_long("rob_size", cfg.rob_size));
    cfg.resolve_delay = static_cast<int>(kv.get_long("resolve_delay", cfg.resolve_delay));
    cfg.transient_fill_persists =
        kv.get_bool("transient_fill_persists", cfg.transient_fill_persists);
    cfg.load_jitter = static_cast<int>(kv.get_long("load_jitter", cfg.load_jitter));
    cfg.jitter_seed = kv.get_u64("jitter_seed", cfg.jitter_seed);
    cfg.mem_l1 = static_cast<int>(kv.get_long("mem_l1", cfg.mem_l1));
    cfg.mem_llc = static_cast<int>(kv.get_long("mem_llc", cfg.mem_llc));
    cfg.mem_dram = static_cast<int>(kv.get_long("mem_dram", cfg.mem_dram));
    for (int i = 0; i < kNumOpKinds; ++i) {
        std::string name = op_kind_name(static_cast<OpKind>(i));
        UnitParams& u = cfg.units[i];
        u.count = static_cast<int>(kv.get_long(name + "_units", u.count));
        u.latency = static_cast<int>(kv.get_long(name + "_latency", u.latency));
        u.recip_throughput = static_cast<int>(kv.get_long(name + "_rt", u.recip_throughput));
    }
    cfg.validate();
    return cfg;
}

KvFile MicroarchConfig::to_kv() const {
    KvFile kv;
    kv.set("issue_width", static_cast<long>(issue_width));
    kv.set("rob_size", static_cast<long>(rob_size));
    kv.set("resolve_delay", static_cast<long>(resolve_delay));
    kv.set("transient_fill_persists", transient_fill_persists);
    kv.set("load_jitter", static_cast<long>(load_jitter));
    kv.set("jitter_seed", jitter_seed);
    kv.set("mem_l1", static_cast<long>(mem_l1));
    kv.set("mem_llc", static_cast<long>(mem_llc));
    kv.set("mem_dram", static_cast<long>(mem_dram));
    for (int i = 0; i < kNumOpKinds; ++i) {
        std::string name = op_kind_name(static_cast<OpKind>(i));
        kv.set(name + "_units", static_cast<long>(units[i].count));
        kv.set(name + "_latency", static_cast<long>(units[i].latency));
        kv.set(name + "_rt", static_cast<long>(units[i].recip_throughput));
    }
    return kv;
}

}  // namespace ilpsim
