// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_BASELINES_HPP
#define DSOPT_BASELINES_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "dsopt/codebook.hpp"
#include "dsopt/detail/numeric.hpp"
#include "dsopt/evaluator.hpp"

namespace dsopt {

/// Scalar quantizer as boundaries + representatives, both increasing with
/// the boundaries interleaving the representatives. Cells extend to
/// +/- infinity at the ends, so out-of-range inputs clamp to the end cells.
struct ScalarQuantizer {
    std::vector<double> boundaries;      ///< M - 1 thresholds
    std::vector<double> representatives; ///< M outputs
    std::string trained_on;              ///< provenance note

    std::size_t size() const noexcept { return representatives.size(); }
    int bits() const { return log2_exact(representatives.size()); }

    /// Cell lookup with boundary ties going right.
    std::size_t cell(double x) const noexcept {
        return static_cast<std::size_t>(
            std::upper_bound(boundaries.begin(), boundaries.end(), x) - boundaries.begin());
    }
};

/// Representative of the cell containing x.
inline double quantize(const ScalarQuantizer& q, double x) {
    if (q.representatives.empty()) throw std::invalid_argument("quantize: untrained quantizer");
    return q.representatives[q.cell(x)];
}

/// Equal-width cells over [lo, hi] with midpoint representatives.
inline ScalarQuantizer uniform_quantizer(double lo, double hi, int bits) {
    if (!(hi > lo)) throw std::invalid_argument("uniform_quantizer: need hi > lo");
    if (bits < 0 || bits > 24) throw std::invalid_argument("uniform_quantizer: bits out of range");
    const std::size_t m = std::size_t{1} << bits;
    const double w = (hi - lo) / static_cast<double>(m);
    ScalarQuantizer q;
    q.trained_on = "uniform[" + detail::fmt_g17(lo) + "," + detail::fmt_g17(hi) + "]";
    q.boundaries.resize(m - 1);
    q.representatives.resize(m);
    for (std::size_t i = 0; i + 1 < m; ++i) q.boundaries[i] = lo + w * static_cast<double>(i + 1);
    for (std::size_t i = 0; i < m; ++i)
        q.representatives[i] = lo + w * (static_cast<double>(i) + 0.5);
    return q;
}

namespace detail {

inline double quantizer_distortion(const std::vector<double>& sorted_samples,
                                   const ScalarQuantizer& q) {
    double s = 0.0;
    for (double x : sorted_samples) {
        const double d = x - q.representatives[q.cell(x)];
        s += d * d;
    }
    return s / static_cast<double>(sorted_samples.size());
}

} // namespace detail

/// Lloyd-Max training: alternate midpoint boundaries and cell-mean
/// representatives until the distortion E[(g - ghat)^2] stops improving by
/// more than tol relative. Representatives start at sample quantiles. An
/// empty cell is repaired by re-seeding its representative at the midpoint
/// of the most populated cell's sample range.
inline ScalarQuantizer lloyd_max_train(std::vector<double> samples, int bits, double tol = 1e-9,
                                       std::vector<double>* distortion_history = nullptr,
                                       int max_iterations = 500) {
    if (bits < 0 || bits > 24) throw std::invalid_argument("lloyd_max_train: bits out of range");
    const std::size_t m = std::size_t{1} << bits;
    std::sort(samples.begin(), samples.end());
    {
        std::size_t distinct = samples.empty() ? 0 : 1;
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (samples[i] != samples[i - 1]) ++distinct;
        if (distinct < m)
            throw std::invalid_argument("lloyd_max_train: need at least 2^bits distinct samples");
    }

    ScalarQuantizer q;
    q.trained_on = "lloyd-max, n=" + std::to_string(samples.size());
    q.representatives.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t idx = std::min(
            samples.size() - 1,
            static_cast<std::size_t>((static_cast<double>(i) + 0.5) *
                                     static_cast<double>(samples.size()) / static_cast<double>(m)));
        q.representatives[i] = samples[idx];
    }
    std::sort(q.representatives.begin(), q.representatives.end());
    q.boundaries.assign(m - 1, 0.0);

    double prev_distortion = -1.0;
    for (int it = 0; it < max_iterations; ++it) {
        for (std::size_t i = 0; i + 1 < m; ++i)
            q.boundaries[i] = 0.5 * (q.representatives[i] + q.representatives[i + 1]);

        // cell sums via one sweep over the sorted samples
        std::vector<double> sum(m, 0.0);
        std::vector<std::size_t> count(m, 0);
        std::vector<std::size_t> first(m, 0);
        {
            std::size_t cell = 0;
            for (std::size_t s = 0; s < samples.size(); ++s) {
                while (cell + 1 < m && samples[s] >= q.boundaries[cell]) {
                    ++cell;
                    first[cell] = s;
                }
                sum[cell] += samples[s];
                ++count[cell];
            }
        }

        for (std::size_t i = 0; i < m; ++i) {
            if (count[i] > 0) {
                q.representatives[i] = sum[i] / static_cast<double>(count[i]);
            } else {
                const std::size_t big =
                    static_cast<std::size_t>(std::max_element(count.begin(), count.end()) -
                                             count.begin());
                const double lo_s = samples[first[big]];
                const double hi_s = samples[first[big] + count[big] - 1];
                q.representatives[i] = 0.5 * (lo_s + hi_s);
            }
        }
        std::sort(q.representatives.begin(), q.representatives.end());

        const double d = detail::quantizer_distortion(samples, q);
        if (distortion_history) distortion_history->push_back(d);
        if (prev_distortion >= 0.0 &&
            std::abs(prev_distortion - d) <= tol * std::max(prev_distortion, 1e-300))
            break;
        prev_distortion = d;
    }
    for (std::size_t i = 0; i + 1 < m; ++i)
        q.boundaries[i] = 0.5 * (q.representatives[i] + q.representatives[i + 1]);
    return q;
}

/// Codebook of i.i.d. uniform-on-sphere beamformers.
struct RvqCodebook {
    BeamSet beams;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

inline RvqCodebook rvq_generate(std::size_t nt, int b2, RngStream rng) {
    if (b2 < 1) throw std::invalid_argument("rvq_generate: need b2 >= 1");
    BeamSet bs(nt, std::size_t{1} << b2);
    for (cxd& z : bs.entries()) z = rng.next_cn();
    for (std::size_t j = 0; j < bs.size(); ++j) {
        auto col = bs.column(j);
        double n2 = 0.0;
        for (cxd z : col) n2 += std::norm(z);
        const double n = std::sqrt(n2);
        for (cxd& z : col) z /= n;
    }
    return RvqCodebook{std::move(bs), rng.seed(), rng.stream()};
}

// --- conventional CSI-quantization scheme -----------------------------------

namespace detail {

/// Midpoint uniform quantization on [lo, hi] computed arithmetically, so
/// wide bit widths never materialize 2^bits representatives. Matches
/// uniform_quantizer() output exactly, boundary ties going right.
inline double quantize_uniform_midpoint(double x, double lo, double hi, int bits) {
    if (bits <= 0) return 0.5 * (lo + hi);
    const double m = std::ldexp(1.0, bits); // 2^bits
    const double w = (hi - lo) / m;
    double cell = std::floor((x - lo) / w);
    cell = std::min(std::max(cell, 0.0), m - 1.0);
    return lo + w * (cell + 0.5);
}

/// Per-component bit allocation for a beamformer fed back with b2 bits:
/// floor(b2 / 2Nt) bits per real component, remainder bits one each to the
/// leading components (order re0, im0, re1, im1, ...).
inline std::vector<int> beam_bit_split(std::size_t nt, int b2) {
    const std::size_t comps = 2 * nt;
    std::vector<int> bits(comps, b2 / static_cast<int>(comps));
    const int rem = b2 % static_cast<int>(comps);
    for (int i = 0; i < rem; ++i) ++bits[static_cast<std::size_t>(i)];
    return bits;
}

} // namespace detail

/// Beamformer the transmitter reconstructs from b2 feedback bits: each real
/// component of v scalar-quantized uniformly on [-1, 1] with its allocated
/// bits, then renormalized. Components allocated zero bits collapse to 0;
/// if everything collapses the first basis vector is used.
inline BeamVector quantize_beam(const BeamVector& v, int b2) {
    if (b2 < 0) throw std::invalid_argument("quantize_beam: b2 must be >= 0");
    const std::size_t nt = v.size();
    const auto bits = detail::beam_bit_split(nt, b2);
    std::vector<cxd> q(nt);
    double n2 = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        const double re = detail::quantize_uniform_midpoint(v[i].real(), -1.0, 1.0, bits[2 * i]);
        const double im = detail::quantize_uniform_midpoint(v[i].imag(), -1.0, 1.0, bits[2 * i + 1]);
        q[i] = cxd{re, im};
        n2 += re * re + im * im;
    }
    if (!(n2 > 0.0)) return BeamVector::basis(nt);
    return BeamVector::normalized(std::move(q));
}

/// Transmit power the conventional transmitter picks from a reported gain:
/// the case-matching continuous optimum evaluated at ghat, clamped to
/// [0, Pmax]. A non-positive report falls back to Pmax (the report carries
/// no usable information).
inline double conventional_power(UtilityCase uc, double reported_gain, const EeConstants& k) {
    if (!(reported_gain > 0)) return k.pmax;
    return std::min(std::max(optimal_power(uc, reported_gain, k), 0.0), k.pmax);
}

struct ConventionalDecision {
    double power = 0.0;
    BeamVector beam;
    double reported_gain = 0.0;
};

/// Conventional limited-feedback decision: quantize the dominant beam with
/// b2 bits, feed back the achieved gain through the trained B1-bit scalar
/// quantizer, pick power from the reported gain.
inline ConventionalDecision conventional_decide(UtilityCase uc, const ChannelMatrix& h,
                                                const ScalarQuantizer& gain_q, int beam_bits,
                                                const EeConstants& k) {
    const DominantPair dom = dominant_right_pair(h);
    BeamVector beam = quantize_beam(dom.v, beam_bits);
    const double g = effective_gain(h, beam);
    const double ghat = quantize(gain_q, g);
    const double p = conventional_power(uc, ghat, k);
    return ConventionalDecision{p, std::move(beam), ghat};
}

/// Gain samples the conventional gain quantizer trains on: the achieved
/// gain of the quantized beam over a training batch, so the quantizer
/// adapts to the beam scheme actually in use.
inline std::vector<double> conventional_gain_samples(const ChannelBatch& batch, int beam_bits) {
    std::vector<double> g(batch.size());
    for (std::size_t l = 0; l < batch.size(); ++l) {
        const ChannelMatrix& h = batch.channels[l];
        const DominantPair dom = dominant_right_pair(h);
        g[l] = effective_gain(h, quantize_beam(dom.v, beam_bits));
    }
    return g;
}

/// Batch evaluation of the conventional scheme (decisions per channel, true
/// achieved utility, and the packet-rate benefit for QoS).
inline DecisionSetStats evaluate_conventional(UtilityCase uc, const ChannelBatch& batch,
                                              const ScalarQuantizer& gain_q, int beam_bits,
                                              const EeConstants& k, int threads = 1) {
    if (batch.size() == 0) throw std::invalid_argument("evaluate_conventional: empty batch");
    const std::size_t n = batch.size();
    std::vector<double> util(n), ben(n);
    detail::parallel_for(n, threads, [&](std::size_t l) {
        const ChannelMatrix& h = batch.channels[l];
        const ConventionalDecision d = conventional_decide(uc, h, gain_q, beam_bits, k);
        const double g = effective_gain(h, d.beam);
        util[l] = utility(uc, d.power, g, k);
        ben[l] = benefit(UtilityCase::packet_rate, d.power, g, k);
    });
    const double inv_n = 1.0 / static_cast<double>(n);
    return DecisionSetStats{detail::pairwise_sum(util) * inv_n, detail::pairwise_sum(ben) * inv_n};
}

/// Scalar quantizer JSON: {"bits": b, "boundaries": [...], "representatives": [...]}.
inline void save_quantizer_json(const std::string& path, const ScalarQuantizer& q) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "{\n  \"bits\": " << q.bits() << ",\n  \"boundaries\": [";
    for (std::size_t i = 0; i < q.boundaries.size(); ++i) {
        if (i) out << ", ";
        out << detail::fmt_g17(q.boundaries[i]);
    }
    out << "],\n  \"representatives\": [";
    for (std::size_t i = 0; i < q.representatives.size(); ++i) {
        if (i) out << ", ";
        out << detail::fmt_g17(q.representatives[i]);
    }
    out << "]\n}\n";
    if (!out) throw IoError("write failed: " + path);
}

} // namespace dsopt

#endif
