// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_LINALG_HPP
#define DSOPT_LINALG_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dsopt {

using cxd = std::complex<double>;

inline bool is_finite(cxd z) noexcept {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Dense Nr x Nt complex matrix, row-major. One fading realization of the
/// link between Nt transmit and Nr receive antennas.
class ChannelMatrix {
public:
    ChannelMatrix(std::size_t nr, std::size_t nt)
        : rows_(nr), cols_(nt), a_(nr * nt) {
        if (nr < 1 || nt < 1) throw std::invalid_argument("ChannelMatrix: need nr >= 1 and nt >= 1");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    cxd& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * cols_ + c]; }
    cxd operator()(std::size_t r, std::size_t c) const noexcept { return a_[r * cols_ + c]; }

    std::span<const cxd> entries() const noexcept { return a_; }
    std::span<cxd> entries() noexcept { return a_; }

    /// Row view, length Nt.
    std::span<const cxd> row(std::size_t r) const noexcept {
        return std::span<const cxd>(a_).subspan(r * cols_, cols_);
    }

    bool all_finite() const noexcept {
        for (cxd z : a_)
            if (!is_finite(z)) return false;
        return true;
    }

    double frobenius_sq() const noexcept {
        double s = 0.0;
        for (cxd z : a_) s += std::norm(z);
        return s;
    }

    bool operator==(const ChannelMatrix&) const = default;

private:
    std::size_t rows_, cols_;
    std::vector<cxd> a_;
};

/// Unit-norm complex weight vector across the transmit antennas.
/// The constructor rejects vectors whose norm is off unity by more than
/// 1e-9; use normalized() to build one from an arbitrary direction.
class BeamVector {
public:
    static constexpr double norm_tolerance = 1e-9;

    explicit BeamVector(std::vector<cxd> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) throw std::invalid_argument("BeamVector: empty");
        double n2 = 0.0;
        for (cxd z : coeffs_) {
            if (!is_finite(z)) throw std::invalid_argument("BeamVector: non-finite coefficient");
            n2 += std::norm(z);
        }
        if (std::abs(std::sqrt(n2) - 1.0) > norm_tolerance)
            throw std::invalid_argument("BeamVector: norm differs from 1 beyond tolerance");
    }

    /// Scales an arbitrary non-zero vector onto the unit sphere.
    static BeamVector normalized(std::vector<cxd> v) {
        double n2 = 0.0;
        for (cxd z : v) n2 += std::norm(z);
        const double n = std::sqrt(n2);
        if (!(n > 0.0) || !std::isfinite(n))
            throw std::invalid_argument("BeamVector::normalized: zero or non-finite vector");
        for (cxd& z : v) z /= n;
        return BeamVector(std::move(v));
    }

    /// Unit basis vector e_{index}.
    static BeamVector basis(std::size_t nt, std::size_t index = 0) {
        std::vector<cxd> v(nt, cxd{0.0, 0.0});
        v.at(index) = cxd{1.0, 0.0};
        return BeamVector(std::move(v));
    }

    std::size_t size() const noexcept { return coeffs_.size(); }
    std::span<const cxd> coeffs() const noexcept { return coeffs_; }
    cxd operator[](std::size_t i) const noexcept { return coeffs_[i]; }

    bool operator==(const BeamVector&) const = default;

private:
    std::vector<cxd> coeffs_;
};

/// Equivalent channel gain g = ||H w||^2 for a unit beamforming vector.
inline double effective_gain(const ChannelMatrix& h, const BeamVector& w) {
    if (w.size() != h.cols())
        throw std::invalid_argument("effective_gain: beam length does not match channel columns");
    const auto wc = w.coeffs();
    double g = 0.0;
    for (std::size_t r = 0; r < h.rows(); ++r) {
        double acc_re = 0.0, acc_im = 0.0;
        const auto hr = h.row(r);
        for (std::size_t c = 0; c < h.cols(); ++c) {
            const double a = hr[c].real(), b = hr[c].imag();
            const double x = wc[c].real(), y = wc[c].imag();
            acc_re += a * x - b * y;
            acc_im += a * y + b * x;
        }
        g += acc_re * acc_re + acc_im * acc_im;
    }
    return g;
}

struct DominantPair {
    double lambda_max = 0.0; ///< largest eigenvalue of H^H H, equals ||H v||^2
    BeamVector v;            ///< unit right vector achieving lambda_max
    bool degenerate = false; ///< true for the all-zero matrix
};

namespace detail {

/// Multiplies the Gram matrix H^H H onto x without forming H^H H.
inline void gram_apply(const ChannelMatrix& h, std::span<const cxd> x, std::span<cxd> out) {
    const std::size_t nt = h.cols();
    for (std::size_t c = 0; c < nt; ++c) out[c] = cxd{0.0, 0.0};
    for (std::size_t r = 0; r < h.rows(); ++r) {
        const auto hr = h.row(r);
        cxd dot{0.0, 0.0};
        for (std::size_t c = 0; c < nt; ++c) dot += hr[c] * x[c];
        for (std::size_t c = 0; c < nt; ++c) out[c] += std::conj(hr[c]) * dot;
    }
}

} // namespace detail

/// Dominant right singular pair of H via power iteration on H^H H.
///
/// The start vector is e1 with a small fixed tilt on the other coordinates,
/// so the iteration cannot begin orthogonal to the dominant eigenvector on
/// any fixed matrix. Iterates until successive eigenvalue estimates agree
/// to 1e-12 relative or 10^4 iterations. The returned vector has its first
/// non-negligible component rotated real-positive, making the output
/// deterministic; the gain is invariant to that global phase.
///
/// The all-zero matrix yields (0, e1) flagged degenerate.
inline DominantPair dominant_right_pair(const ChannelMatrix& h) {
    const std::size_t nt = h.cols();
    if (h.frobenius_sq() == 0.0)
        return DominantPair{0.0, BeamVector::basis(nt), true};

    std::vector<cxd> x(nt), y(nt);
    x[0] = cxd{1.0, 0.0};
    for (std::size_t c = 1; c < nt; ++c) x[c] = cxd{1e-4 / static_cast<double>(c + 1), 0.0};
    double xn = 0.0;
    for (cxd z : x) xn += std::norm(z);
    xn = std::sqrt(xn);
    for (cxd& z : x) z /= xn;

    double lambda = 0.0;
    constexpr int max_iters = 10000;
    for (int it = 0; it < max_iters; ++it) {
        detail::gram_apply(h, x, y);
        double yn = 0.0;
        for (cxd z : y) yn += std::norm(z);
        yn = std::sqrt(yn);
        if (yn == 0.0) break; // x landed in the null space; keep the current estimate
        const double lambda_new = yn; // Rayleigh quotient of the PSD Gram matrix
        for (std::size_t c = 0; c < nt; ++c) x[c] = y[c] / yn;
        if (it > 0 && std::abs(lambda_new - lambda) < 1e-12 * std::max(lambda_new, 1e-300)) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
    }

    // Global phase normalization: first component above threshold made real-positive.
    double max_abs = 0.0;
    for (cxd z : x) max_abs = std::max(max_abs, std::abs(z));
    for (cxd z : x) {
        const double a = std::abs(z);
        if (a > 1e-9 * max_abs) {
            const cxd phase = std::conj(z) / a;
            for (cxd& w : x) w *= phase;
            break;
        }
    }

    BeamVector v = BeamVector::normalized(std::move(x));
    return DominantPair{effective_gain(h, v), std::move(v), false};
}

} // namespace dsopt

#endif
