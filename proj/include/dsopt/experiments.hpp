// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_EXPERIMENTS_HPP
#define DSOPT_EXPERIMENTS_HPP

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dsopt/baselines.hpp"
#include "dsopt/evaluator.hpp"
#include "dsopt/iwo_de.hpp"

namespace dsopt {

enum class Method { iwode, lm, uniform, rvq };

inline const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::iwode: return "iwode";
        case Method::lm: return "lm";
        case Method::uniform: return "uniform";
        default: return "rvq";
    }
}

inline Method parse_method(const std::string& s) {
    if (s == "iwode") return Method::iwode;
    if (s == "lm") return Method::lm;
    if (s == "uniform") return Method::uniform;
    if (s == "rvq") return Method::rvq;
    throw ConfigError("unknown method: " + s);
}

inline UtilityCase parse_case(const std::string& s) {
    if (s == "I" || s == "i" || s == "1") return UtilityCase::capacity;
    if (s == "II" || s == "ii" || s == "2") return UtilityCase::packet_rate;
    throw ConfigError("unknown utility case: " + s + " (expected I or II)");
}

enum class SweepKind { vary_b2, vary_b1, joint };

inline const char* to_string(SweepKind k) noexcept {
    switch (k) {
        case SweepKind::vary_b2: return "b2";
        case SweepKind::vary_b1: return "b1";
        default: return "joint";
    }
}

inline SweepKind parse_sweep_kind(const std::string& s) {
    if (s == "b2") return SweepKind::vary_b2;
    if (s == "b1") return SweepKind::vary_b1;
    if (s == "joint") return SweepKind::joint;
    throw ConfigError("unknown sweep kind: " + s + " (expected b2, b1 or joint)");
}

// Stream-id layout: batches and per-point algorithm randomness never collide.
inline constexpr std::uint64_t stream_train = 1;
inline constexpr std::uint64_t stream_eval = 2;
inline constexpr std::uint64_t stream_point_base = 3;

inline RngStream point_stream(std::uint64_t seed, Method m, int b1, int b2) {
    return RngStream(seed, stream_point_base)
        .substream(static_cast<std::uint64_t>(m))
        .substream(static_cast<std::uint64_t>(b1), static_cast<std::uint64_t>(b2));
}

/// Full experiment description. Defaults are the desk-scale profile
/// (reduced generations and batch sizes, three seeds); configs/paper.ini
/// restores the reference setting.
struct ExperimentConfig {
    std::size_t nt = 4, nr = 1;
    std::size_t n_train = 1000, n_eval = 5000;
    UtilityCase uc = UtilityCase::packet_rate;
    EeConstants constants;
    double r0 = 3e5;     ///< QoS floor (bits/s)
    double t0 = 0.01;    ///< feedback delay bound (s)
    double rate_r = 800; ///< feedback channel rate (bits/s)
    IwoDeParams iwo;
    std::vector<Method> methods{Method::iwode, Method::lm, Method::uniform, Method::rvq};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    int rvq_draws = 10;
    int b1_fixed = 4, b2_fixed = 6, b_total = 8;
    int b1_min = 1, b1_max = 8;
    int b2_min = 1, b2_max = 8;
    int threads = 0; ///< 0 = hardware concurrency
    double lloyd_tol = 1e-9;
    int lloyd_max_iterations = 500;

    ExperimentConfig() { iwo.t_max = 100; }

    FeedbackBudget budget(int b1, int b2) const {
        return FeedbackBudget{b1, b2, rate_r, t0};
    }

    void validate() const {
        if (nt < 1 || nr < 1) throw ConfigError("config: need nt >= 1 and nr >= 1");
        if (n_train < 1 || n_eval < 1) throw ConfigError("config: need n_train, n_eval >= 1");
        try {
            constants.validate();
            iwo.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (r0 < 0) throw ConfigError("config: need r0 >= 0");
        if (!(t0 > 0) || !(rate_r > 0)) throw ConfigError("config: need t0 > 0 and rate_r > 0");
        if (methods.empty()) throw ConfigError("config: methods list is empty");
        if (seeds.empty()) throw ConfigError("config: seeds list is empty");
        if (rvq_draws < 1) throw ConfigError("config: need rvq_draws >= 1");
        if (b1_min < 0 || b1_max < b1_min || b2_min < 0 || b2_max < b2_min)
            throw ConfigError("config: malformed b1/b2 sweep ranges");
        if (b1_fixed < 0 || b2_fixed < 0 || b_total < 1)
            throw ConfigError("config: malformed fixed bit counts");
        if (!(lloyd_tol > 0) || lloyd_max_iterations < 1)
            throw ConfigError("config: malformed lloyd settings");
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

// ptree's get(path, default) swallows conversion failures, so values are
// fetched as strings and converted strictly: a typo must fail loudly.
template <typename T, typename Parse>
T strict_value(const boost::property_tree::ptree& tree, const std::string& key, T def,
               Parse&& parse) {
    const auto raw = tree.get_optional<std::string>(key);
    if (!raw) return def;
    try {
        std::size_t used = 0;
        const T value = parse(*raw, &used);
        if (used != raw->size() && raw->find_first_not_of(" \t", used) != std::string::npos)
            throw ConfigError("config: trailing junk in value of " + key + ": '" + *raw + "'");
        return value;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config: cannot parse value of " + key + ": '" + *raw + "'");
    }
}

inline double get_double(const boost::property_tree::ptree& t, const std::string& key, double def) {
    return strict_value<double>(t, key, def,
                                [](const std::string& s, std::size_t* used) { return std::stod(s, used); });
}

inline long long get_int(const boost::property_tree::ptree& t, const std::string& key, long long def) {
    return strict_value<long long>(t, key, def, [](const std::string& s, std::size_t* used) {
        return std::stoll(s, used);
    });
}

inline std::uint64_t get_u64(const boost::property_tree::ptree& t, const std::string& key,
                             std::uint64_t def) {
    return strict_value<std::uint64_t>(t, key, def, [](const std::string& s, std::size_t* used) {
        return static_cast<std::uint64_t>(std::stoull(s, used));
    });
}

} // namespace detail

/// Reads an INI config (sections [experiment], [constants], [iwo], [lloyd];
/// ';' comments). Missing keys keep their defaults; mu_ini / mu_end default
/// to 1/Nt and 1/(200 Nt) unless set explicitly.
inline ExperimentConfig load_config(const std::string& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    try {
        cfg.nt = tree.get<std::size_t>("experiment.nt", cfg.nt);
        cfg.nr = tree.get<std::size_t>("experiment.nr", cfg.nr);
        cfg.n_train = tree.get<std::size_t>("experiment.n_train", cfg.n_train);
        cfg.n_eval = tree.get<std::size_t>("experiment.n_eval", cfg.n_eval);
        if (auto v = tree.get_optional<std::string>("experiment.case")) cfg.uc = parse_case(*v);
        cfg.r0 = tree.get<double>("experiment.r0", cfg.r0);
        cfg.t0 = tree.get<double>("experiment.t0", cfg.t0);
        cfg.rate_r = tree.get<double>("experiment.rate_r", cfg.rate_r);
        cfg.rvq_draws = tree.get<int>("experiment.rvq_draws", cfg.rvq_draws);
        cfg.b1_fixed = tree.get<int>("experiment.b1_fixed", cfg.b1_fixed);
        cfg.b2_fixed = tree.get<int>("experiment.b2_fixed", cfg.b2_fixed);
        cfg.b_total = tree.get<int>("experiment.b_total", cfg.b_total);
        cfg.b1_min = tree.get<int>("experiment.b1_min", cfg.b1_min);
        cfg.b1_max = tree.get<int>("experiment.b1_max", cfg.b1_max);
        cfg.b2_min = tree.get<int>("experiment.b2_min", cfg.b2_min);
        cfg.b2_max = tree.get<int>("experiment.b2_max", cfg.b2_max);
        cfg.threads = tree.get<int>("experiment.threads", cfg.threads);
        if (auto v = tree.get_optional<std::string>("experiment.methods")) {
            cfg.methods.clear();
            for (const std::string& m : detail::split_list(*v)) cfg.methods.push_back(parse_method(m));
        }
        if (auto v = tree.get_optional<std::string>("experiment.seeds")) {
            cfg.seeds.clear();
            for (const std::string& s : detail::split_list(*v))
                cfg.seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
        }

        cfg.constants.sigma2 = tree.get<double>("constants.sigma2", cfg.constants.sigma2);
        cfg.constants.p0 = tree.get<double>("constants.p0", cfg.constants.p0);
        cfg.constants.pmax = tree.get<double>("constants.pmax", cfg.constants.pmax);
        cfg.constants.c = tree.get<double>("constants.c", cfg.constants.c);
        cfg.constants.r0_raw = tree.get<double>("constants.r0_raw", cfg.constants.r0_raw);

        cfg.iwo.w = tree.get<int>("iwo.w", cfg.iwo.w);
        cfg.iwo.t_max = tree.get<int>("iwo.t_max", cfg.iwo.t_max);
        cfg.iwo.s_max = tree.get<int>("iwo.s_max", cfg.iwo.s_max);
        cfg.iwo.s_min = tree.get<int>("iwo.s_min", cfg.iwo.s_min);
        cfg.iwo.gamma = tree.get<double>("iwo.gamma", cfg.iwo.gamma);
        cfg.iwo.f0 = tree.get<double>("iwo.f0", cfg.iwo.f0);
        cfg.iwo.cr = tree.get<double>("iwo.cr", cfg.iwo.cr);
        cfg.iwo.max_feasibility_retries =
            tree.get<int>("iwo.max_feasibility_retries", cfg.iwo.max_feasibility_retries);
        const double nt_d = static_cast<double>(cfg.nt);
        cfg.iwo.mu_ini = tree.get<double>("iwo.mu_ini", 1.0 / nt_d);
        cfg.iwo.mu_end = tree.get<double>("iwo.mu_end", 1.0 / (200.0 * nt_d));

        cfg.lloyd_tol = tree.get<double>("lloyd.tol", cfg.lloyd_tol);
        cfg.lloyd_max_iterations =
            tree.get<int>("lloyd.max_iterations", cfg.lloyd_max_iterations);
    } catch (const pt::ptree_error& e) {
        throw ConfigError(std::string("config value error: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("config value error: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

/// One result row of a sweep.
struct SweepRecord {
    UtilityCase uc = UtilityCase::packet_rate;
    Method method = Method::iwode;
    int b1 = 0, b2 = 0;
    std::uint64_t seed = 0;
    double avg_utility = 0.0;
    double csit_utility = 0.0;
    double loss_pct = 0.0;
    bool feasible = false;
    double wall_time_s = 0.0;
};

namespace detail {

/// Per-seed shared inputs for all points of a sweep: the training batch,
/// the seed-disjoint held-out batch, and the held-out CSIT reference.
struct SeedCache {
    ChannelBatch train;
    ChannelBatch eval;
    double csit = 0.0;
};

inline SeedCache make_seed_cache(const ExperimentConfig& cfg, std::uint64_t seed) {
    SeedCache cache{make_batch(cfg.nr, cfg.nt, cfg.n_train, RngStream(seed, stream_train)),
                    make_batch(cfg.nr, cfg.nt, cfg.n_eval, RngStream(seed, stream_eval)), 0.0};
    cache.csit = csit_utility(cfg.uc, cache.eval, cfg.constants);
    return cache;
}

inline SweepRecord run_point_cached(const ExperimentConfig& cfg, int b1, int b2, Method method,
                                    std::uint64_t seed, const SeedCache& cache,
                                    int inner_threads = 1) {
    if (!cfg.budget(b1, b2).satisfied())
        throw ConfigError("sweep point (" + std::to_string(b1) + "," + std::to_string(b2) +
                          ") exceeds feedback budget R*t0");
    const auto t_begin = std::chrono::steady_clock::now();

    DecisionSetStats stats;
    switch (method) {
        case Method::iwode: {
            const PowerSet powers = uniform_power_grid(b1, cfg.constants.pmax);
            OptimizeResult res =
                optimize(cfg.uc, cache.train, powers, b2, cfg.iwo, cfg.constants, cfg.r0,
                         point_stream(seed, method, b1, b2), inner_threads);
            stats = evaluate_decision_set(cfg.uc, cache.eval, powers, res.best, cfg.constants);
            break;
        }
        case Method::rvq: {
            const PowerSet powers = uniform_power_grid(b1, cfg.constants.pmax);
            RngStream stream = point_stream(seed, method, b1, b2);
            double util = 0.0, ben = 0.0;
            for (int d = 0; d < cfg.rvq_draws; ++d) {
                const RvqCodebook cb =
                    rvq_generate(cfg.nt, b2, stream.substream(static_cast<std::uint64_t>(d)));
                const DecisionSetStats s =
                    evaluate_decision_set(cfg.uc, cache.eval, powers, cb.beams, cfg.constants);
                util += s.avg_utility;
                ben += s.avg_packet_benefit;
            }
            stats = DecisionSetStats{util / cfg.rvq_draws, ben / cfg.rvq_draws};
            break;
        }
        case Method::lm:
        case Method::uniform: {
            const std::vector<double> samples = conventional_gain_samples(cache.train, b2);
            ScalarQuantizer gain_q;
            if (method == Method::lm) {
                gain_q = lloyd_max_train(samples, b1, cfg.lloyd_tol, nullptr,
                                         cfg.lloyd_max_iterations);
            } else {
                const double hi = *std::max_element(samples.begin(), samples.end());
                gain_q = uniform_quantizer(0.0, hi, b1);
            }
            stats = evaluate_conventional(cfg.uc, cache.eval, gain_q, b2, cfg.constants);
            break;
        }
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return SweepRecord{cfg.uc,
                       method,
                       b1,
                       b2,
                       seed,
                       stats.avg_utility,
                       cache.csit,
                       optimality_loss(cache.csit, stats.avg_utility),
                       stats.avg_packet_benefit >= cfg.r0,
                       wall};
}

} // namespace detail

/// Runs one (B1, B2, method, seed) cell end to end: train on the seed's
/// training batch, evaluate on the seed-disjoint held-out batch, score
/// against the held-out CSIT reference. Infeasible outcomes are recorded,
/// never dropped.
inline SweepRecord run_point(const ExperimentConfig& cfg, int b1, int b2, Method method,
                             std::uint64_t seed) {
    cfg.validate();
    const detail::SeedCache cache = detail::make_seed_cache(cfg, seed);
    return detail::run_point_cached(cfg, b1, b2, method, seed, cache,
                                    detail::resolve_threads(cfg.threads));
}

namespace detail {

struct PointSpec {
    int b1, b2;
    Method method;
    std::uint64_t seed;
    std::size_t cache_index;
};

inline std::vector<SweepRecord> run_points(const ExperimentConfig& cfg,
                                           const std::vector<PointSpec>& specs) {
    std::vector<SeedCache> caches;
    caches.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) caches.push_back(make_seed_cache(cfg, seed));

    std::vector<SweepRecord> records(specs.size());
    parallel_for(specs.size(), cfg.threads, [&](std::size_t i) {
        const PointSpec& p = specs[i];
        records[i] = run_point_cached(cfg, p.b1, p.b2, p.method, p.seed, caches[p.cache_index]);
    });
    return records;
}

template <typename GridFn>
std::vector<SweepRecord> sweep_over(const ExperimentConfig& cfg, int lo, int hi, GridFn&& point_of) {
    cfg.validate();
    std::vector<PointSpec> specs;
    for (Method m : cfg.methods)
        for (int v = lo; v <= hi; ++v)
            for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
                auto [b1, b2] = point_of(v);
                if (!cfg.budget(b1, b2).satisfied())
                    throw ConfigError("sweep point (" + std::to_string(b1) + "," +
                                      std::to_string(b2) + ") exceeds feedback budget R*t0");
                specs.push_back(PointSpec{b1, b2, m, cfg.seeds[si], si});
            }
    return run_points(cfg, specs);
}

} // namespace detail

/// B1 fixed, B2 swept over [b2_min, b2_max].
inline std::vector<SweepRecord> sweep_vary_b2(const ExperimentConfig& cfg) {
    return detail::sweep_over(cfg, cfg.b2_min, cfg.b2_max,
                              [&](int b2) { return std::pair{cfg.b1_fixed, b2}; });
}

/// B2 fixed, B1 swept over [b1_min, b1_max].
inline std::vector<SweepRecord> sweep_vary_b1(const ExperimentConfig& cfg) {
    return detail::sweep_over(cfg, cfg.b1_min, cfg.b1_max,
                              [&](int b1) { return std::pair{b1, cfg.b2_fixed}; });
}

/// Joint allocation with B1 + B2 = b_total: B2 swept, B1 the remainder.
inline std::vector<SweepRecord> sweep_joint(const ExperimentConfig& cfg) {
    const int lo = std::max(cfg.b2_min, std::max(0, cfg.b_total - cfg.b1_max));
    const int hi = std::min(cfg.b2_max, cfg.b_total);
    return detail::sweep_over(cfg, lo, hi,
                              [&](int b2) { return std::pair{cfg.b_total - b2, b2}; });
}

// --- sweep CSV ---------------------------------------------------------------

inline const char* sweep_csv_header() noexcept {
    return "case,method,b1,b2,seed,avg_utility,csit_utility,loss_pct,feasible,wall_time_s";
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

} // namespace detail

/// Header plus one row per record, fields in SweepRecord order, reals with
/// 17 significant digits. Refuses an empty record list.
inline void emit_csv(const std::vector<SweepRecord>& records, const std::string& path) {
    if (records.empty()) throw std::invalid_argument("emit_csv: no records");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << sweep_csv_header() << "\n";
    for (const SweepRecord& r : records) {
        out << detail::csv_quote(to_string(r.uc)) << ',' << detail::csv_quote(to_string(r.method))
            << ',' << r.b1 << ',' << r.b2 << ',' << r.seed << ','
            << detail::fmt_g17(r.avg_utility) << ',' << detail::fmt_g17(r.csit_utility) << ','
            << detail::fmt_g17(r.loss_pct) << ',' << (r.feasible ? "true" : "false") << ','
            << detail::fmt_g17(r.wall_time_s) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<SweepRecord> load_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line) || line != sweep_csv_header())
        throw IoError("malformed sweep CSV header: " + path);
    std::vector<SweepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 10) throw IoError("malformed sweep CSV row: " + path);
        SweepRecord r;
        r.uc = parse_case(f[0]);
        r.method = parse_method(f[1]);
        r.b1 = std::stoi(f[2]);
        r.b2 = std::stoi(f[3]);
        r.seed = static_cast<std::uint64_t>(std::stoull(f[4]));
        r.avg_utility = std::stod(f[5]);
        r.csit_utility = std::stod(f[6]);
        r.loss_pct = std::stod(f[7]);
        r.feasible = f[8] == "true";
        r.wall_time_s = std::stod(f[9]);
        records.push_back(r);
    }
    return records;
}

} // namespace dsopt

#endif
