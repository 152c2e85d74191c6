// Command-line front end: one subcommand per magnifier/experiment, a flat
// key=value config file, and a manifest written beside every CSV so any run
// can be reproduced byte-for-byte with `rerun <manifest>`.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "ilpsim/experiment.h"

namespace {

using namespace ilpsim;

constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Every config key with its default. The experiment keys are prefixed by
// subcommand family; microarch keys are flat (issue_width, rob_size, ...).
KvFile default_kv() {
    KvFile kv = MicroarchConfig{}.to_kv();
    kv.set("seed", std::uint64_t{0});
    kv.set("rounds", 100L);  // plru-pa, plru-reorder, arbitrary, arith

    CacheConfig cc;  // shared single-level cache; the PLRU magnifiers need 4 ways
    kv.set("cache_sets", static_cast<long>(cc.sets));
    kv.set("cache_ways", 4L);
    kv.set("cache_policy", std::string(policy_name(cc.policy)));
    kv.set("cache_seed", cc.seed);
    kv.set("cache_hit_latency", static_cast<long>(cc.hit_latency));
    kv.set("cache_llc_latency", static_cast<long>(cc.llc_latency));
    kv.set("cache_miss_latency", static_cast<long>(cc.miss_latency));

    ArbMagnifierConfig arb;
    kv.set("arb_n_sets", static_cast<long>(arb.n_sets));
    kv.set("arb_seq_len", static_cast<long>(arb.seq_len));
    kv.set("arb_par_len", static_cast<long>(arb.par_len));
    kv.set("arb_prefetch", arb.prefetch_enabled);
    kv.set("arb_prefetch_distance", static_cast<long>(arb.prefetch_distance));
    kv.set("arb_prefetch_passes", static_cast<long>(arb.prefetch_passes));
    kv.set("arb_misalign_delay", static_cast<long>(arb.misalign_delay));
    kv.set("arb_cache_seed", arb.cache.seed);

    ArithMagnifierConfig ar;
    kv.set("arith_k_div", static_cast<long>(ar.k_div));
    kv.set("arith_add_buffer_len", static_cast<long>(ar.add_buffer_len));
    kv.set("arith_rob_guard", ar.rob_guard);
    kv.set("arith_misalign_delay", static_cast<long>(ar.misalign_delay));

    kv.set("rep_iterations", 1000L);
    kv.set("rep_fix", false);
    kv.set("gran_ref", std::string("add"));
    kv.set("gran_target", std::string("add"));
    kv.set("gran_max_target", 1000L);
    kv.set("sb_bits", 256L);
    kv.set("sb_rounds", 4000L);
    kv.set("sb_timer_granularity", 10000L);
    kv.set("sb_timer_jitter", 2500L);
    kv.set("cls_trials", 1000L);
    kv.set("cls_jitter", 0L);
    kv.set("mp_seq", 6L);
    kv.set("mp_par", 5L);
    kv.set("mp_ways", 8L);
    kv.set("mp_trials", 100000L);
    return kv;
}

std::set<std::string> config_keys() {
    std::set<std::string> keys;
    const KvFile defaults = default_kv();
    for (const auto& [k, v] : defaults.values()) keys.insert(k);
    return keys;
}

// Manifests carry the resolved config plus run metadata.
const std::set<std::string>& manifest_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k = config_keys();
        k.insert("subcommand");
        k.insert("csv_path");
        k.insert("artifact_version");
        return k;
    }();
    return keys;
}

MicroarchConfig core_from(const KvFile& kv) {
    KvFile sub;
    for (const std::string& key : MicroarchConfig::known_keys())
        if (kv.has(key)) sub.set(key, kv.get_string(key, ""));
    return MicroarchConfig::from_kv(sub);
}

CacheConfig cache_from(const KvFile& kv) {
    CacheConfig cc;
    cc.sets = static_cast<int>(kv.get_long("cache_sets", cc.sets));
    cc.ways = static_cast<int>(kv.get_long("cache_ways", cc.ways));
    std::string pol = kv.get_string("cache_policy", policy_name(cc.policy));
    auto p = policy_from_name(pol);
    if (!p) throw ConfigError("unknown cache_policy: " + pol);
    cc.policy = *p;
    cc.seed = kv.get_u64("cache_seed", cc.seed);
    cc.hit_latency = static_cast<int>(kv.get_long("cache_hit_latency", cc.hit_latency));
    cc.llc_latency = static_cast<int>(kv.get_long("cache_llc_latency", cc.llc_latency));
    cc.miss_latency = static_cast<int>(kv.get_long("cache_miss_latency", cc.miss_latency));
    cc.validate();
    return cc;
}

OpKind kind_from(const KvFile& kv, const std::string& key) {
    std::string name = kv.get_string(key, "add");
    auto k = op_kind_from_name(name);
    if (!k) throw ConfigError("unknown op kind for " + key + ": " + name);
    return *k;
}

struct RunOutput {
    std::string csv;
    std::string summary;
};

RunOutput dispatch(const std::string& sub, const KvFile& kv) {
    RunOutput out;
    char buf[256];
    if (sub == "plru-pa" || sub == "plru-reorder") {
        long rounds = kv.get_long("rounds", 100);
        CacheConfig cc = cache_from(kv);
        MagnifierReading r = sub == "plru-pa" ? run_plru_pa_magnifier(rounds, cc)
                                              : run_plru_reorder_magnifier(rounds, cc);
        out.csv = r.csv();
        std::snprintf(buf, sizeof buf, "%s: rounds=%ld delta=%ld misses(present)=%ld",
                      sub.c_str(), r.rounds, r.delta, r.misses_state1);
        out.summary = buf;
    } else if (sub == "arbitrary") {
        ArbMagnifierConfig cfg;
        cfg.n_sets = static_cast<int>(kv.get_long("arb_n_sets", cfg.n_sets));
        cfg.seq_len = static_cast<int>(kv.get_long("arb_seq_len", cfg.seq_len));
        cfg.par_len = static_cast<int>(kv.get_long("arb_par_len", cfg.par_len));
        cfg.prefetch_enabled = kv.get_bool("arb_prefetch", cfg.prefetch_enabled);
        cfg.prefetch_distance =
            static_cast<int>(kv.get_long("arb_prefetch_distance", cfg.prefetch_distance));
        cfg.prefetch_passes =
            static_cast<int>(kv.get_long("arb_prefetch_passes", cfg.prefetch_passes));
        cfg.misalign_delay =
            static_cast<int>(kv.get_long("arb_misalign_delay", cfg.misalign_delay));
        cfg.cache.seed = kv.get_u64("arb_cache_seed", cfg.cache.seed);
        cfg.rounds = kv.get_long("rounds", cfg.rounds);
        ArbMagnifierRun run = run_arbitrary_magnifier_detail(cfg);
        out.csv = run.reading.csv();
        std::snprintf(buf, sizeof buf, "arbitrary: rounds=%ld prefetch=%d delta=%ld",
                      run.effective_rounds, cfg.prefetch_enabled ? 1 : 0, run.reading.delta);
        out.summary = buf;
    } else if (sub == "arith") {
        ArithMagnifierConfig cfg;
        cfg.core = core_from(kv);
        cfg.k_div = static_cast<int>(kv.get_long("arith_k_div", cfg.k_div));
        cfg.add_buffer_len =
            static_cast<int>(kv.get_long("arith_add_buffer_len", cfg.add_buffer_len));
        cfg.rob_guard = kv.get_bool("arith_rob_guard", cfg.rob_guard);
        cfg.misalign_delay =
            static_cast<int>(kv.get_long("arith_misalign_delay", cfg.misalign_delay));
        cfg.rounds = kv.get_long("rounds", cfg.rounds);
        ArithMagnifierRun run = run_arith_magnifier_detail(cfg);
        out.csv = run.reading.csv();
        std::snprintf(buf, sizeof buf, "arith: rounds=%ld k_div=%d delta=%ld",
                      run.reading.rounds, run.k_div, run.reading.delta);
        out.summary = buf;
    } else if (sub == "repetition") {
        long iters = kv.get_long("rep_iterations", 1000);
        bool fix = kv.get_bool("rep_fix", false);
        RepetitionResult r = repetition_experiment(iters, fix, cache_from(kv), core_from(kv));
        out.csv = r.csv();
        std::snprintf(buf, sizeof buf, "repetition: iterations=%ld fix=%d delta=%ld",
                      r.iterations, fix ? 1 : 0, r.delta());
        out.summary = buf;
    } else if (sub == "granularity") {
        GranularityTable t =
            granularity_sweep(kind_from(kv, "gran_ref"), kind_from(kv, "gran_target"),
                              static_cast<int>(kv.get_long("gran_max_target", 1000)),
                              core_from(kv));
        out.csv = t.csv();
        std::string bound = t.rob_exceeded_target
                                ? " rob_exceeded_at_target=" +
                                      std::to_string(*t.rob_exceeded_target) + " ref_cap=" +
                                      std::to_string(*t.rob_exceeded_ref_cap)
                                : "";
        std::snprintf(buf, sizeof buf,
                      "granularity: slope=%.4f granularity=%d max_target=%d%s", t.slope,
                      t.granularity, t.max_target_len, bound.c_str());
        out.summary = buf;
    } else if (sub == "spectre-back") {
        std::uint64_t seed = kv.get_u64("seed", 0);
        long nbits = kv.get_long("sb_bits", 256);
        std::mt19937_64 rng(seed);
        std::vector<int> bits;
        for (long i = 0; i < nbits; ++i) bits.push_back(static_cast<int>(rng() & 1));
        CoarseTimer timer(kv.get_long("sb_timer_granularity", 10000),
                          kv.get_long("sb_timer_jitter", 2500), seed + 1);
        BitTrialReport rep = spectre_back(bits, kv.get_long("sb_rounds", 4000), timer);
        out.csv = rep.csv();
        std::snprintf(buf, sizeof buf,
                      "spectre-back: bits=%ld accuracy=%.4f threshold=%ld", rep.trials,
                      rep.accuracy, rep.threshold);
        out.summary = buf;
    } else if (sub == "classify") {
        ClassifierResult r = hit_miss_classifier(
            kv.get_long("cls_trials", 1000),
            static_cast<int>(kv.get_long("cls_jitter", 0)),
            static_cast<int>(kv.get_long("cache_hit_latency", 4)),
            static_cast<int>(kv.get_long("cache_llc_latency", 40)),
            static_cast<int>(kv.get_long("cache_miss_latency", 200)));
        out.csv = r.csv();
        std::snprintf(buf, sizeof buf, "classify: trials=%ld accuracy=%.4f ref_len=%d",
                      r.trials, r.accuracy, r.ref_len);
        out.summary = buf;
    } else if (sub == "miss-prob") {
        int seq = static_cast<int>(kv.get_long("mp_seq", 6));
        int par = static_cast<int>(kv.get_long("mp_par", 5));
        int ways = static_cast<int>(kv.get_long("mp_ways", 8));
        long trials = kv.get_long("mp_trials", 100000);
        double p = monte_carlo_miss_prob(seq, par, ways, trials, kv.get_u64("seed", 0));
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%ld,%.6f", seq, par, ways, trials, p);
        out.csv = std::string("seq_len,par_len,ways,trials,probability\n") + buf + "\n";
        std::snprintf(buf, sizeof buf, "miss-prob: seq=%d par=%d ways=%d probability=%.6f",
                      seq, par, ways, p);
        out.summary = buf;
    } else {
        throw ConfigError("unknown subcommand: " + sub);
    }
    return out;
}

int run_and_emit(const std::string& sub, const KvFile& resolved, const std::string& out_dir,
                 bool dump_csv) {
    RunOutput out = dispatch(sub, resolved);

    std::string stem = out_dir + "/" + sub;
    std::string csv_path = stem + ".csv";
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw ConfigError("cannot write " + csv_path);
    csv << out.csv;
    csv.close();

    KvFile manifest = resolved;
    manifest.set("subcommand", sub);
    manifest.set("csv_path", csv_path);
    manifest.set("artifact_version", std::string(kVersion));
    manifest.write_file(stem + ".manifest");

    if (dump_csv) std::cout << out.csv;
    std::cout << out.summary << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ILP timing-gadget simulator"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir = ".", manifest_path;
    std::uint64_t seed = 0;
    long rounds = -1;
    bool dump_csv = false, show_version = false;
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--seed", seed, "seed for randomized subcommands");
    app.add_option("--out", out_dir, "output directory for CSV and manifest");
    app.add_option("--rounds", rounds, "rounds/iterations/trials for the subcommand");
    app.add_flag("--csv", dump_csv, "also print the CSV to stdout");
    app.add_flag("--version", show_version, "print version and default config hash");

    std::string gran_ref, gran_target;
    bool rep_fix = false, arb_no_prefetch = false;
    const std::vector<std::string> subs = {"plru-pa", "plru-reorder", "arbitrary",
                                           "arith",   "repetition",   "granularity",
                                           "spectre-back", "classify", "miss-prob"};
    for (const std::string& s : subs) app.add_subcommand(s)->fallthrough();
    app.get_subcommand("granularity")->add_option("--ref", gran_ref, "reference op kind");
    app.get_subcommand("granularity")->add_option("--target", gran_target, "target op kind");
    app.get_subcommand("repetition")->add_flag("--fix", rep_fix, "enable the racing fix");
    app.get_subcommand("arbitrary")
        ->add_flag("--no-prefetch", arb_no_prefetch, "disable path prefetching");
    CLI::App* rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
    rerun->fallthrough();
    rerun->add_option("manifest", manifest_path, "manifest emitted by a previous run")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (show_version) {
            std::cout << "ilpgadget " << kVersion << " (default config hash "
                      << std::hex << fnv1a(default_kv().to_text()) << std::dec << ")\n";
            return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << "error: no subcommand given (see --help)\n";
            return 1;
        }
        CLI::App* chosen = app.get_subcommands().front();
        std::string sub = chosen->get_name();

        KvFile resolved;
        if (sub == "rerun") {
            resolved = KvFile::parse_file(manifest_path);
            resolved.require_known(manifest_keys());
            sub = resolved.get_string("subcommand", "");
        } else {
            resolved = default_kv();
            if (!config_path.empty()) {
                KvFile user = KvFile::parse_file(config_path);
                user.require_known(config_keys());
                for (const auto& [k, v] : user.values()) resolved.set(k, v);
            }
            if (app.count("--seed")) resolved.set("seed", seed);
            if (rounds >= 0) {
                // --rounds maps onto whichever count drives the subcommand.
                std::string key = sub == "repetition"      ? "rep_iterations"
                                  : sub == "granularity"   ? "gran_max_target"
                                  : sub == "spectre-back"  ? "sb_rounds"
                                  : sub == "classify"      ? "cls_trials"
                                  : sub == "miss-prob"     ? "mp_trials"
                                                           : "rounds";
                resolved.set(key, rounds);
            }
            if (!gran_ref.empty()) resolved.set("gran_ref", gran_ref);
            if (!gran_target.empty()) resolved.set("gran_target", gran_target);
            if (rep_fix) resolved.set("rep_fix", true);
            if (arb_no_prefetch) resolved.set("arb_prefetch", false);
        }
        return run_and_emit(sub, resolved, out_dir, dump_csv);
    } catch (const KvError& e) {
        std::cerr << "config error (line " << e.line << "): " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const CacheModelError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "experiment error: " << e.what() << "\n";
        return 2;
    }
}
