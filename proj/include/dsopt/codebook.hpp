// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_CODEBOOK_HPP
#define DSOPT_CODEBOOK_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsopt/channel.hpp"
#include "dsopt/ee_model.hpp"
#include "dsopt/errors.hpp"
#include "dsopt/linalg.hpp"

namespace dsopt {

inline bool is_power_of_two(std::size_t n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("log2_exact: not a power of two");
    int b = 0;
    while ((std::size_t{1} << b) < n) ++b;
    return b;
}

/// Finite set of transmit power levels, strictly increasing, |P| = 2^B1.
struct PowerSet {
    std::vector<double> levels;

    std::size_t size() const noexcept { return levels.size(); }
    int bits() const { return log2_exact(levels.size()); }

    void validate() const {
        if (!is_power_of_two(levels.size()))
            throw std::invalid_argument("PowerSet: size must be a power of two");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (!std::isfinite(levels[i]) || levels[i] < 0.0)
                throw std::invalid_argument("PowerSet: levels must be finite and non-negative");
            if (i > 0 && !(levels[i] > levels[i - 1]))
                throw std::invalid_argument("PowerSet: levels must be strictly increasing");
        }
    }
};

/// Equally spaced grid {0, Pmax/(M-1), ..., Pmax} with M = 2^b1 levels.
/// b1 = 0 degenerates to the single level {Pmax}: a zero-bit power feedback
/// still has to transmit, and Pmax is the only level that never wastes the
/// whole grid on silence.
inline PowerSet uniform_power_grid(int b1, double pmax) {
    if (b1 < 0) throw std::invalid_argument("uniform_power_grid: b1 must be >= 0");
    if (!(pmax > 0)) throw std::invalid_argument("uniform_power_grid: pmax must be > 0");
    if (b1 == 0) return PowerSet{{pmax}};
    const std::size_t m = std::size_t{1} << b1;
    PowerSet ps;
    ps.levels.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        ps.levels[i] = static_cast<double>(i) * pmax / static_cast<double>(m - 1);
    return ps;
}

/// Beamforming codebook Omega = [w_1, ..., w_M2], stored column-major with
/// unit-norm columns. M2 = 2^B2 with B2 >= 0 (a single-vector codebook is a
/// valid degenerate decision set).
class BeamSet {
public:
    BeamSet(std::size_t nt, std::size_t m2)
        : nt_(nt), m2_(m2), cols_(nt * m2, cxd{0.0, 0.0}) {
        if (nt < 1 || m2 < 1) throw std::invalid_argument("BeamSet: need nt >= 1 and m2 >= 1");
    }

    static BeamSet from_vectors(const std::vector<BeamVector>& vs) {
        if (vs.empty()) throw std::invalid_argument("BeamSet::from_vectors: empty");
        BeamSet bs(vs[0].size(), vs.size());
        for (std::size_t j = 0; j < vs.size(); ++j) {
            if (vs[j].size() != bs.nt_)
                throw std::invalid_argument("BeamSet::from_vectors: inconsistent lengths");
            std::copy(vs[j].coeffs().begin(), vs[j].coeffs().end(), bs.column(j).begin());
        }
        return bs;
    }

    std::size_t nt() const noexcept { return nt_; }
    std::size_t size() const noexcept { return m2_; }
    int bits() const { return log2_exact(m2_); }

    std::span<cxd> column(std::size_t j) noexcept {
        return std::span<cxd>(cols_).subspan(j * nt_, nt_);
    }
    std::span<const cxd> column(std::size_t j) const noexcept {
        return std::span<const cxd>(cols_).subspan(j * nt_, nt_);
    }
    std::span<const cxd> entries() const noexcept { return cols_; }
    std::span<cxd> entries() noexcept { return cols_; }

    BeamVector vector(std::size_t j) const {
        auto col = column(j);
        return BeamVector(std::vector<cxd>(col.begin(), col.end()));
    }

    double column_norm(std::size_t j) const noexcept {
        double n2 = 0.0;
        for (cxd z : column(j)) n2 += std::norm(z);
        return std::sqrt(n2);
    }

    void validate_unit_columns(double tol = BeamVector::norm_tolerance) const {
        if (!is_power_of_two(m2_))
            throw std::invalid_argument("BeamSet: size must be a power of two");
        for (std::size_t j = 0; j < m2_; ++j)
            if (std::abs(column_norm(j) - 1.0) > tol)
                throw std::invalid_argument("BeamSet: column norm differs from 1 beyond tolerance");
    }

    bool operator==(const BeamSet&) const = default;

private:
    std::size_t nt_, m2_;
    std::vector<cxd> cols_; // nt x m2, column-major
};

/// Feedback-rate budget of the reverse link: B1 + B2 <= R * t0.
struct FeedbackBudget {
    int b1 = 0;          ///< bits per power decision
    int b2 = 0;          ///< bits per beam decision
    double rate_r = 800; ///< feedback channel rate (bits/s)
    double t0 = 0.01;    ///< max feedback delay (s)

    bool allows(int bits1, int bits2) const noexcept {
        return bits1 >= 0 && bits2 >= 0 &&
               static_cast<double>(bits1 + bits2) <= rate_r * t0;
    }
    bool satisfied() const noexcept { return allows(b1, b2); }
};

/// A full transmitter decision set; construction rejects pairs that exceed
/// the feedback budget.
struct DecisionSet {
    PowerSet powers;
    BeamSet beams;
};

inline DecisionSet make_decision_set(PowerSet powers, BeamSet beams, const FeedbackBudget& budget) {
    powers.validate();
    beams.validate_unit_columns();
    const int b1 = powers.bits();
    const int b2 = beams.bits();
    if (!budget.allows(b1, b2))
        throw ConfigError("decision set exceeds feedback budget: B1 + B2 > R * t0");
    return DecisionSet{std::move(powers), std::move(beams)};
}

/// Index pair reported by the receiver.
struct Decision {
    std::size_t power_index = 0;
    std::size_t beam_index = 0;

    bool operator==(const Decision&) const = default;
};

struct BeamChoice {
    std::size_t index = 0;
    double gain = 0.0;
};

/// Receiver beam decision: argmax over the codebook of ||H w||^2, ties to
/// the lowest index.
inline BeamChoice select_beam(const ChannelMatrix& h, const BeamSet& beams) {
    if (beams.nt() != h.cols())
        throw std::invalid_argument("select_beam: beam length does not match channel columns");
    BeamChoice best{0, -1.0};
    for (std::size_t j = 0; j < beams.size(); ++j) {
        const auto col = beams.column(j);
        double g = 0.0;
        for (std::size_t r = 0; r < h.rows(); ++r) {
            const auto hr = h.row(r);
            double acc_re = 0.0, acc_im = 0.0;
            for (std::size_t c = 0; c < h.cols(); ++c) {
                const double a = hr[c].real(), b = hr[c].imag();
                const double x = col[c].real(), y = col[c].imag();
                acc_re += a * x - b * y;
                acc_im += a * y + b * x;
            }
            g += acc_re * acc_re + acc_im * acc_im;
        }
        if (g > best.gain) best = BeamChoice{j, g};
    }
    return best;
}

/// Receiver decision pair: the beam from select_beam, then the utility
/// argmax over the power grid at the achieved gain. Power ties break to the
/// lowest level (the energy-frugal choice).
inline Decision select_power(UtilityCase uc, const ChannelMatrix& h, const BeamSet& beams,
                             const PowerSet& powers, const EeConstants& k) {
    if (powers.levels.empty()) throw std::invalid_argument("select_power: empty power set");
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
    return Decision{best_i, bc.index};
}

// --- codebook JSON serialization -------------------------------------------
//
// {"b1": int, "b2": int, "powers": [..], "beams": [[re, im], ...]}
// with beams flattened column-major and reals printed with 17 significant
// digits, so write/load round-trips are bit-exact.

inline void save_codebook_json(const std::string& path, const PowerSet& powers,
                               const BeamSet& beams) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "{\n  \"b1\": " << powers.bits() << ",\n  \"b2\": " << beams.bits()
        << ",\n  \"powers\": [";
    for (std::size_t i = 0; i < powers.size(); ++i) {
        if (i) out << ", ";
        out << detail::fmt_g17(powers.levels[i]);
    }
    out << "],\n  \"beams\": [";
    const auto entries = beams.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out << ", ";
        out << '[' << detail::fmt_g17(entries[i].real()) << ", "
            << detail::fmt_g17(entries[i].imag()) << ']';
    }
    out << "]\n}\n";
    if (!out) throw IoError("write failed: " + path);
}

inline DecisionSet load_codebook_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed codebook JSON (" + path + "): " + e.what());
    }
    try {
        const int b1 = j.at("b1").get<int>();
        const int b2 = j.at("b2").get<int>();
        PowerSet powers;
        powers.levels = j.at("powers").get<std::vector<double>>();
        const auto& jb = j.at("beams");
        const std::size_t m2 = std::size_t{1} << b2;
        if (jb.size() % m2 != 0 || jb.empty())
            throw ConfigError("codebook JSON: beams length incompatible with b2");
        const std::size_t nt = jb.size() / m2;
        BeamSet beams(nt, m2);
        auto entries = beams.entries();
        for (std::size_t i = 0; i < jb.size(); ++i)
            entries[i] = cxd{jb[i].at(0).get<double>(), jb[i].at(1).get<double>()};
        if (powers.bits() != b1) throw ConfigError("codebook JSON: b1 inconsistent with powers");
        powers.validate();
        beams.validate_unit_columns();
        return DecisionSet{std::move(powers), std::move(beams)};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("codebook JSON (" + path + "): " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("codebook JSON (" + path + "): " + e.what());
    }
}

} // namespace dsopt

#endif
