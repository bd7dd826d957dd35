// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_EE_MODEL_HPP
#define DSOPT_EE_MODEL_HPP

#include <cmath>
#include <stdexcept>

#include "dsopt/linalg.hpp"

namespace dsopt {

/// Which transmission benefit the utility ratio uses.
///  - capacity: ln(1 + p g / sigma^2), in nats
///  - packet_rate: R0 exp(-c sigma^2 / (p g)), goodput in bits/s
enum class UtilityCase { capacity, packet_rate };

inline const char* to_string(UtilityCase c) noexcept {
    return c == UtilityCase::capacity ? "I" : "II";
}

/// Physical constants of the link. Powers in mW, rates in bits/s, gains
/// dimensionless; sigma2 = 1 mW keeps p*g/sigma2 dimensionless.
struct EeConstants {
    double sigma2 = 1.0;  ///< noise power (mW)
    double p0 = 0.5;      ///< static circuit power (mW)
    double pmax = 1.0;    ///< transmit power cap (mW)
    double c = 0.1;       ///< spectral-efficiency constant
    double r0_raw = 1e6;  ///< raw transmission rate R0 (bits/s)

    void validate() const {
        if (!(sigma2 > 0) || !(p0 > 0) || !(pmax > 0) || !(c > 0) || !(r0_raw > 0))
            throw std::invalid_argument("EeConstants: all constants must be positive");
    }
};

/// Transmission benefit V(p, g). Both cases return 0 in the p*g = 0 limit,
/// so a power grid containing p = 0 stays evaluable.
inline double benefit(UtilityCase uc, double p, double g, const EeConstants& k) {
    const double pg = p * g;
    if (uc == UtilityCase::capacity) {
        return std::log1p(pg / k.sigma2);
    }
    if (pg <= 0.0) return 0.0;
    return k.r0_raw * std::exp(-k.c * k.sigma2 / pg);
}

/// Energy efficiency: benefit over total consumed power p + P0.
inline double utility(UtilityCase uc, double p, double g, const EeConstants& k) {
    return benefit(uc, p, g, k) / (p + k.p0);
}

/// Stationarity function for the capacity case, oriented as in the
/// derivative of the utility: positive left of the unconstrained optimum,
/// negative right of it, with a unique sign change.
inline double case1_power_equation(double p, double lambda, const EeConstants& k) {
    return (p + k.p0) / (p + k.sigma2 / lambda) - std::log1p(lambda * p / k.sigma2);
}

/// Unconstrained utility-maximizing power for the capacity case, found by
/// bracketing bisection. The stationarity function is strictly decreasing
/// (f'(p) = -(p + P0)/(p + sigma^2/lambda)^2 < 0) with f(0) = lambda P0 /
/// sigma^2 > 0, so [0, hi] brackets the unique root once the upper end,
/// doubled from 1 mW, goes negative.
inline double case1_unconstrained_root(double lambda, const EeConstants& k) {
    if (!(lambda > 0)) throw std::domain_error("case1_unconstrained_root: lambda must be > 0");
    double lo = 0.0;
    double hi = 1.0;
    while (case1_power_equation(hi, lambda, k) >= 0.0) {
        hi *= 2.0;
        if (hi > 1e200) throw std::runtime_error("case1_unconstrained_root: bracket expansion failed");
    }
    while (hi - lo > 1e-12 * (1.0 + 0.5 * (hi + lo))) {
        const double mid = 0.5 * (lo + hi);
        if (case1_power_equation(mid, lambda, k) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Optimal transmit power for the capacity case, clamped to Pmax.
inline double optimal_power_case1(double lambda, const EeConstants& k) {
    return std::min(case1_unconstrained_root(lambda, k), k.pmax);
}

/// Optimal transmit power for the packet-rate case: closed-form positive
/// root of the stationarity condition, clamped to Pmax.
inline double optimal_power_case2(double lambda, const EeConstants& k) {
    if (!(lambda > 0)) throw std::domain_error("optimal_power_case2: lambda must be > 0");
    const double cs = k.c * k.sigma2;
    const double p = (cs / (2.0 * lambda)) * (1.0 + std::sqrt(1.0 + 4.0 * lambda * k.p0 / cs));
    return std::min(p, k.pmax);
}

inline double optimal_power(UtilityCase uc, double lambda, const EeConstants& k) {
    return uc == UtilityCase::capacity ? optimal_power_case1(lambda, k)
                                       : optimal_power_case2(lambda, k);
}

/// Best decision over the continuous set [0, Pmax] x unit sphere; this is
/// also the perfect-CSI reference the finite decision sets are scored
/// against.
struct ContinuousOptimum {
    double p_star = 0.0;
    BeamVector v_star;
    double u_star = 0.0;
    bool degenerate = false;
};

inline ContinuousOptimum continuous_optimum(UtilityCase uc, const ChannelMatrix& h,
                                            const EeConstants& k) {
    DominantPair dom = dominant_right_pair(h);
    if (dom.degenerate)
        return ContinuousOptimum{0.0, std::move(dom.v), 0.0, true};
    const double p = optimal_power(uc, dom.lambda_max, k);
    const double u = utility(uc, p, dom.lambda_max, k);
    return ContinuousOptimum{p, std::move(dom.v), u, false};
}

} // namespace dsopt

#endif
