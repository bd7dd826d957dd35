// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_IWO_DE_HPP
#define DSOPT_IWO_DE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dsopt/codebook.hpp"
#include "dsopt/detail/numeric.hpp"
#include "dsopt/evaluator.hpp"

namespace dsopt {

/// Hyperparameters of the hybrid invasive-weed / differential-evolution
/// search. Defaults follow the reference setting; mu_ini and mu_end are
/// normally tied to the antenna count (1/Nt and 1/(200 Nt)).
struct IwoDeParams {
    int w = 10;          ///< population size W
    int t_max = 400;     ///< generations T
    int s_max = 20;      ///< max offspring per individual
    int s_min = 10;      ///< min offspring per individual
    double gamma = 2.5;  ///< nonlinear dispersion-annealing index
    double mu_ini = 0.25;
    double mu_end = 0.00125;
    double f0 = 0.9;     ///< DE scaling factor
    double cr = 0.9;     ///< DE crossover probability
    int max_feasibility_retries = 20;

    void validate() const {
        if (w < 4) throw std::invalid_argument("IwoDeParams: need w >= 4 for DE mutation");
        if (t_max < 1) throw std::invalid_argument("IwoDeParams: need t_max >= 1");
        if (s_min < 0 || s_max < s_min)
            throw std::invalid_argument("IwoDeParams: need s_max >= s_min >= 0");
        if (!(mu_ini >= mu_end) || !(mu_end > 0))
            throw std::invalid_argument("IwoDeParams: need mu_ini >= mu_end > 0");
        if (!(f0 > 0)) throw std::invalid_argument("IwoDeParams: need f0 > 0");
        if (cr < 0 || cr > 1) throw std::invalid_argument("IwoDeParams: need 0 <= cr <= 1");
        if (max_feasibility_retries < 0)
            throw std::invalid_argument("IwoDeParams: need max_feasibility_retries >= 0");
    }
};

/// One member of the population: a codebook with its fitness on the shared
/// training batch and its QoS flag.
struct Individual {
    BeamSet omega;
    double fitness_value = 0.0;
    bool feasible = false;
};

struct GenerationTrace {
    int generation = 0;
    double best_fitness = 0.0; ///< best-ever, non-decreasing over the run
    double mean_fitness = 0.0; ///< mean over the retained population
    double mu_t = 0.0;
};

/// Everything an individual is scored against: the objective case, the
/// fixed channel batch, the fixed power grid, and the QoS floor.
struct FitnessContext {
    UtilityCase uc;
    const ChannelBatch* batch;
    const PowerSet* powers;
    const EeConstants* k;
    double r0;

    Individual evaluate(BeamSet omega) const {
        const DecisionSetStats s = evaluate_decision_set(uc, *batch, *powers, omega, *k);
        return Individual{std::move(omega), s.avg_utility, s.avg_packet_benefit >= r0};
    }
};

namespace detail {

/// feasible-first, then fitness-descending; stable so ties keep input order
inline bool fitness_order(const Individual& a, const Individual& b) {
    if (a.feasible != b.feasible) return a.feasible;
    return a.fitness_value > b.fitness_value;
}

inline bool better(const Individual& a, const Individual& b) { return fitness_order(a, b); }

inline void normalize_columns(BeamSet& bs) {
    for (std::size_t j = 0; j < bs.size(); ++j) {
        auto col = bs.column(j);
        double n2 = 0.0;
        for (cxd z : col) n2 += std::norm(z);
        const double n = std::sqrt(n2);
        if (n > 1e-300) {
            for (cxd& z : col) z /= n;
        } else {
            for (cxd& z : col) z = cxd{0.0, 0.0};
            col[0] = cxd{1.0, 0.0};
        }
    }
}

/// Adds the spatial-dispersion noise without renormalizing: every real and
/// imaginary component gets an independent N(0, mu^2) increment.
inline void perturb_columns(BeamSet& bs, double mu, RngStream& rng) {
    for (cxd& z : bs.entries())
        z += cxd{mu * rng.next_normal(), mu * rng.next_normal()};
}

inline BeamSet random_beamset(std::size_t nt, std::size_t m2, RngStream& rng) {
    BeamSet bs(nt, m2);
    for (cxd& z : bs.entries()) z = rng.next_cn();
    normalize_columns(bs);
    return bs;
}

/// One dispersion offspring, resampled while it violates QoS; empty when
/// the retry budget runs out.
inline std::optional<Individual> disperse_one(const Individual& parent, double mu,
                                              const FitnessContext& ctx,
                                              const IwoDeParams& params, RngStream rng) {
    for (int attempt = 0; attempt <= params.max_feasibility_retries; ++attempt) {
        BeamSet cand = parent.omega;
        perturb_columns(cand, mu, rng);
        normalize_columns(cand);
        Individual ind = ctx.evaluate(std::move(cand));
        if (ind.feasible) return ind;
    }
    return std::nullopt;
}

} // namespace detail

/// Offspring budget of one individual: linear in the normalized fitness,
/// floored. A degenerate population (f_max == f_min) counts everyone as
/// best.
inline int offspring_count(double fitness_k, double fitness_min, double fitness_max,
                           const IwoDeParams& params) {
    if (fitness_max < fitness_min)
        throw std::invalid_argument("offspring_count: fitness_max < fitness_min");
    const double v = fitness_max == fitness_min
                         ? 1.0
                         : (fitness_k - fitness_min) / (fitness_max - fitness_min);
    return static_cast<int>(std::floor(v * (params.s_max - params.s_min) + params.s_min));
}

/// Annealed dispersion std: ((T - t)/T)^gamma (mu_ini - mu_end) + mu_end.
inline double dispersion_std(int t, const IwoDeParams& params) {
    if (t < 0 || t > params.t_max) throw std::invalid_argument("dispersion_std: t out of range");
    const double frac = static_cast<double>(params.t_max - t) / static_cast<double>(params.t_max);
    return std::pow(frac, params.gamma) * (params.mu_ini - params.mu_end) + params.mu_end;
}

/// W random codebooks, columns uniform on the complex unit sphere. Each is
/// resampled up to the retry budget until it meets QoS, else kept with
/// feasible = false (such individuals do not reproduce).
inline std::vector<Individual> init_population(const FitnessContext& ctx,
                                               const IwoDeParams& params, std::size_t nt,
                                               std::size_t m2, RngStream rng) {
    if (m2 < 1) throw std::invalid_argument("init_population: need m2 >= 1");
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(params.w));
    for (int i = 0; i < params.w; ++i) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(i));
        Individual ind = ctx.evaluate(detail::random_beamset(nt, m2, stream));
        for (int attempt = 0; attempt < params.max_feasibility_retries && !ind.feasible; ++attempt)
            ind = ctx.evaluate(detail::random_beamset(nt, m2, stream));
        pop.push_back(std::move(ind));
    }
    return pop;
}

/// Spatial dispersion: count offspring around the parent with per-component
/// noise std mu_t, renormalized, QoS-filtered with bounded resampling.
inline std::vector<Individual> disperse(const Individual& parent, double mu_t, int count,
                                        const FitnessContext& ctx, const IwoDeParams& params,
                                        RngStream rng) {
    std::vector<Individual> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int j = 0; j < count; ++j) {
        auto ind = detail::disperse_one(parent, mu_t, ctx, params,
                                        rng.substream(static_cast<std::uint64_t>(j)));
        if (ind) out.push_back(std::move(*ind));
    }
    return out;
}

/// Keeps the W fittest feasible individuals, padding with the fittest
/// infeasible ones when the feasible pool is short. Output is sorted
/// best-first.
inline std::vector<Individual> competitive_exclusion(std::vector<Individual> pool, int w) {
    if (pool.empty()) throw std::invalid_argument("competitive_exclusion: empty pool");
    std::stable_sort(pool.begin(), pool.end(), detail::fitness_order);
    if (pool.size() > static_cast<std::size_t>(w))
        pool.erase(pool.begin() + w, pool.end());
    return pool;
}

/// DE pass over a sorted pool. Mutant k is built from the best individual
/// plus the scaled difference of two distinct others drawn from ranks
/// 2..W (excluding k); crossover copies whole codebook columns, with one
/// uniformly chosen column always forced from the mutant; the trial
/// replaces its parent only on strict fitness improvement while feasible.
inline std::vector<Individual> de_step(std::vector<Individual> pool, const FitnessContext& ctx,
                                       const IwoDeParams& params, RngStream rng, int threads = 1) {
    const std::size_t w = pool.size();
    if (w < 4) throw std::invalid_argument("de_step: pool size must be >= 4");
    const std::size_t nt = pool[0].omega.nt();
    const std::size_t m2 = pool[0].omega.size();

    std::vector<Individual> trials;
    trials.reserve(w);
    for (std::size_t kk = 0; kk < w; ++kk) {
        RngStream stream = rng.substream(kk);
        // ranks 2..W in 1-based terms; rejection keeps them distinct and off k
        std::size_t idx2, idx3;
        do {
            idx2 = 1 + stream.next_below(w - 1);
        } while (idx2 == kk);
        do {
            idx3 = 1 + stream.next_below(w - 1);
        } while (idx3 == kk || idx3 == idx2);

        BeamSet mutant(nt, m2);
        {
            const auto best = pool[0].omega.entries();
            const auto a = pool[idx2].omega.entries();
            const auto b = pool[idx3].omega.entries();
            auto out = mutant.entries();
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = best[i] + params.f0 * (a[i] - b[i]);
        }

        const std::size_t forced = stream.next_below(m2);
        BeamSet trial = pool[kk].omega;
        for (std::size_t l = 0; l < m2; ++l) {
            const double y = stream.next_uniform();
            if (y <= params.cr || l == forced) {
                const auto src = mutant.column(l);
                std::copy(src.begin(), src.end(), trial.column(l).begin());
            }
        }
        detail::normalize_columns(trial);
        trials.push_back(Individual{std::move(trial), 0.0, false});
    }

    detail::parallel_for(w, threads, [&](std::size_t kk) {
        trials[kk] = ctx.evaluate(std::move(trials[kk].omega));
    });

    for (std::size_t kk = 0; kk < w; ++kk)
        if (trials[kk].feasible && trials[kk].fitness_value > pool[kk].fitness_value)
            pool[kk] = std::move(trials[kk]);
    return pool;
}

struct OptimizeResult {
    BeamSet best;
    double best_fitness = 0.0;
    bool feasible = false;
    std::vector<GenerationTrace> trace;
};

/// Full IWO-DE run over codebooks of size 2^b2. Generation t of 1..T uses
/// dispersion std mu(t); reproduction budgets come from the feasible part
/// of the population; competitive exclusion then DE close each generation.
/// Returns the best individual ever seen (feasible ones always outrank
/// infeasible) together with the per-generation trace.
inline OptimizeResult optimize(UtilityCase uc, const ChannelBatch& batch, const PowerSet& powers,
                               int b2, const IwoDeParams& params, const EeConstants& k, double r0,
                               RngStream rng, int threads = 1) {
    params.validate();
    if (b2 < 0) throw std::invalid_argument("optimize: b2 must be >= 0");
    const std::size_t m2 = std::size_t{1} << b2;
    const FitnessContext ctx{uc, &batch, &powers, &k, r0};

    std::vector<Individual> pop = init_population(ctx, params, batch.nt, m2, rng.substream(1));
    Individual best = pop.front();
    for (const Individual& ind : pop)
        if (detail::better(ind, best)) best = ind;

    std::vector<GenerationTrace> trace;
    trace.reserve(static_cast<std::size_t>(params.t_max));

    for (int t = 1; t <= params.t_max; ++t) {
        const double mu = dispersion_std(t, params);

        double fmin = 0.0, fmax = 0.0;
        bool any_feasible = false;
        for (const Individual& ind : pop) {
            if (!ind.feasible) continue;
            if (!any_feasible) {
                fmin = fmax = ind.fitness_value;
                any_feasible = true;
            } else {
                fmin = std::min(fmin, ind.fitness_value);
                fmax = std::max(fmax, ind.fitness_value);
            }
        }

        RngStream disp_stream = rng.substream(2, static_cast<std::uint64_t>(t));
        struct Task {
            std::size_t parent;
            std::uint64_t j;
        };
        std::vector<Task> tasks;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (!pop[i].feasible) continue;
            const int cnt = offspring_count(pop[i].fitness_value, fmin, fmax, params);
            for (int j = 0; j < cnt; ++j)
                tasks.push_back(Task{i, static_cast<std::uint64_t>(j)});
        }
        std::vector<std::optional<Individual>> offspring(tasks.size());
        detail::parallel_for(tasks.size(), threads, [&](std::size_t ti) {
            const Task& task = tasks[ti];
            offspring[ti] = detail::disperse_one(pop[task.parent], mu, ctx, params,
                                                 disp_stream.substream(task.parent).substream(task.j));
        });

        std::vector<Individual> pool = std::move(pop);
        for (auto& o : offspring)
            if (o) pool.push_back(std::move(*o));

        pool = competitive_exclusion(std::move(pool), params.w);
        if (pool.size() >= 4)
            pool = de_step(std::move(pool), ctx, params,
                           rng.substream(3, static_cast<std::uint64_t>(t)), threads);
        pop = std::move(pool);

        double mean = 0.0;
        for (const Individual& ind : pop) {
            if (detail::better(ind, best)) best = ind;
            mean += ind.fitness_value;
        }
        mean /= static_cast<double>(pop.size());
        trace.push_back(GenerationTrace{t, best.fitness_value, mean, mu});
    }

    return OptimizeResult{std::move(best.omega), best.fitness_value, best.feasible,
                          std::move(trace)};
}

/// Trace CSV: generation,best_fitness,mean_fitness,mu_t.
inline void save_trace_csv(const std::string& path, const std::vector<GenerationTrace>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "generation,best_fitness,mean_fitness,mu_t\n";
    for (const GenerationTrace& g : trace)
        out << g.generation << ',' << detail::fmt_g17(g.best_fitness) << ','
            << detail::fmt_g17(g.mean_fitness) << ',' << detail::fmt_g17(g.mu_t) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

} // namespace dsopt

#endif
