// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_EVALUATOR_HPP
#define DSOPT_EVALUATOR_HPP

#include <string>
#include <utility>
#include <vector>

#include "dsopt/channel.hpp"
#include "dsopt/codebook.hpp"
#include "dsopt/detail/numeric.hpp"
#include "dsopt/ee_model.hpp"

namespace dsopt {

/// Batch averages of a finite decision set: the objective-case utility and
/// the packet-rate benefit the QoS constraint is written on.
struct DecisionSetStats {
    double avg_utility = 0.0;
    double avg_packet_benefit = 0.0; ///< bits/s
};

/// One pass over the batch: per channel take the receiver decisions, then
/// average utility and packet-rate benefit with pairwise summation in batch
/// order. Results are bit-identical for any thread count.
inline DecisionSetStats evaluate_decision_set(UtilityCase uc, const ChannelBatch& batch,
                                              const PowerSet& powers, const BeamSet& beams,
                                              const EeConstants& k, int threads = 1) {
    if (batch.size() == 0) throw std::invalid_argument("evaluate_decision_set: empty batch");
    const std::size_t n = batch.size();
    std::vector<double> util(n), ben(n);
    detail::parallel_for(n, threads, [&](std::size_t l) {
        const ChannelMatrix& h = batch.channels[l];
        const BeamChoice bc = select_beam(h, beams);
        std::size_t best_i = 0;
        double best_u = utility(uc, powers.levels[0], bc.gain, k);
        for (std::size_t i = 1; i < powers.levels.size(); ++i) {
            const double u = utility(uc, powers.levels[i], bc.gain, k);
            if (u > best_u) {
                best_u = u;
                best_i = i;
            }
        }
        util[l] = best_u;
        ben[l] = benefit(UtilityCase::packet_rate, powers.levels[best_i], bc.gain, k);
    });
    const double inv_n = 1.0 / static_cast<double>(n);
    return DecisionSetStats{detail::pairwise_sum(util) * inv_n, detail::pairwise_sum(ben) * inv_n};
}

/// Monte-Carlo fitness of a decision set: the batch-average utility at the
/// receiver decisions.
inline double fitness(UtilityCase uc, const ChannelBatch& batch, const PowerSet& powers,
                      const BeamSet& beams, const EeConstants& k, int threads = 1) {
    return evaluate_decision_set(uc, batch, powers, beams, k, threads).avg_utility;
}

/// QoS test: the packet-rate benefit averaged at the decisions taken for
/// the objective case must reach r0. The constraint is always written on
/// the packet-rate benefit, whichever case is being optimized.
inline std::pair<bool, double> qos_feasible(UtilityCase uc, const ChannelBatch& batch,
                                            const PowerSet& powers, const BeamSet& beams,
                                            const EeConstants& k, double r0, int threads = 1) {
    const double avg = evaluate_decision_set(uc, batch, powers, beams, k, threads).avg_packet_benefit;
    return {avg >= r0, avg};
}

/// Perfect-CSI reference: batch average of the continuous-optimum utility.
inline double csit_utility(UtilityCase uc, const ChannelBatch& batch, const EeConstants& k,
                           int threads = 1) {
    if (batch.size() == 0) throw std::invalid_argument("csit_utility: empty batch");
    const std::size_t n = batch.size();
    std::vector<double> util(n);
    detail::parallel_for(n, threads, [&](std::size_t l) {
        util[l] = continuous_optimum(uc, batch.channels[l], k).u_star;
    });
    return detail::pairwise_sum(util) / static_cast<double>(n);
}

/// Relative optimality loss in percent: 100 (csit - achieved) / csit.
inline double optimality_loss(double csit, double achieved) {
    if (!(csit > 0)) throw std::domain_error("optimality_loss: csit reference must be > 0");
    return 100.0 * (csit - achieved) / csit;
}

/// Everything one evaluation of a decision set reports.
struct EvalReport {
    double avg_utility = 0.0;
    double avg_packet_benefit = 0.0;
    bool feasible = false;
    double csit_utility = 0.0;
    double loss_pct = 0.0;
};

inline EvalReport make_report(UtilityCase uc, const ChannelBatch& batch, const PowerSet& powers,
                              const BeamSet& beams, const EeConstants& k, double r0,
                              int threads = 1) {
    const DecisionSetStats stats = evaluate_decision_set(uc, batch, powers, beams, k, threads);
    const double csit = csit_utility(uc, batch, k, threads);
    return EvalReport{stats.avg_utility, stats.avg_packet_benefit,
                      stats.avg_packet_benefit >= r0, csit,
                      optimality_loss(csit, stats.avg_utility)};
}

inline void save_report_json(const std::string& path, const EvalReport& r) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "{\n"
        << "  \"avg_utility\": " << detail::fmt_g17(r.avg_utility) << ",\n"
        << "  \"avg_packet_benefit\": " << detail::fmt_g17(r.avg_packet_benefit) << ",\n"
        << "  \"feasible\": " << (r.feasible ? "true" : "false") << ",\n"
        << "  \"csit_utility\": " << detail::fmt_g17(r.csit_utility) << ",\n"
        << "  \"loss_pct\": " << detail::fmt_g17(r.loss_pct) << "\n"
        << "}\n";
    if (!out) throw IoError("write failed: " + path);
}

} // namespace dsopt

#endif
