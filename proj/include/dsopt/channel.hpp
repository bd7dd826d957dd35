// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_CHANNEL_HPP
#define DSOPT_CHANNEL_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dsopt/errors.hpp"
#include "dsopt/linalg.hpp"
#include "dsopt/rng.hpp"

namespace dsopt {

/// Rayleigh-fading sample: every entry i.i.d. CN(0,1).
inline ChannelMatrix sample_channel(std::size_t nr, std::size_t nt, RngStream& rng) {
    ChannelMatrix h(nr, nt);
    for (cxd& z : h.entries()) z = rng.next_cn();
    return h;
}

/// Immutable set of channel realizations. Fitness values compared across an
/// evolutionary run are only meaningful against one fixed batch, so batches
/// record their seed provenance and are never mutated after creation.
struct ChannelBatch {
    std::size_t nr = 0, nt = 0;
    std::vector<ChannelMatrix> channels;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::size_t size() const noexcept { return channels.size(); }
};

/// Draws n channels; channel l samples from base.substream(l), so the batch
/// content is independent of construction order or partitioning.
inline ChannelBatch make_batch(std::size_t nr, std::size_t nt, std::size_t n, RngStream base) {
    if (n < 1) throw std::invalid_argument("make_batch: need n >= 1");
    ChannelBatch batch;
    batch.nr = nr;
    batch.nt = nt;
    batch.seed = base.seed();
    batch.stream = base.stream();
    batch.channels.reserve(n);
    for (std::size_t l = 0; l < n; ++l) {
        RngStream r = base.substream(l);
        batch.channels.push_back(sample_channel(nr, nt, r));
    }
    return batch;
}

namespace detail {

/// Round-trip-exact decimal formatting (17 significant digits).
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace detail

/// Writes a batch as CSV: header "index,re_0_0,im_0_0,..." with entries in
/// row-major order, one channel per row, 17-significant-digit decimals so a
/// reload reproduces the batch bit-exactly.
inline void save_channels_csv(const std::string& path, const ChannelBatch& batch) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "index";
    for (std::size_t i = 0; i < batch.nr; ++i)
        for (std::size_t j = 0; j < batch.nt; ++j)
            out << ",re_" << i << "_" << j << ",im_" << i << "_" << j;
    out << "\n";
    for (std::size_t l = 0; l < batch.size(); ++l) {
        out << l;
        const ChannelMatrix& h = batch.channels[l];
        for (std::size_t i = 0; i < batch.nr; ++i)
            for (std::size_t j = 0; j < batch.nt; ++j)
                out << ',' << detail::fmt_g17(h(i, j).real()) << ',' << detail::fmt_g17(h(i, j).imag());
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

/// Reads a batch written by save_channels_csv. Dimensions come from the
/// header column names.
inline ChannelBatch load_channels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty channel CSV: " + path);
    const auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "index")
        throw IoError("malformed channel CSV header: " + path);
    std::size_t nr = 0, nt = 0;
    for (std::size_t k = 1; k < header.size(); k += 2) {
        unsigned long i = 0, j = 0;
        if (std::sscanf(header[k].c_str(), "re_%lu_%lu", &i, &j) != 2)
            throw IoError("malformed channel CSV header column: " + header[k]);
        nr = std::max<std::size_t>(nr, i + 1);
        nt = std::max<std::size_t>(nt, j + 1);
    }
    ChannelBatch batch;
    batch.nr = nr;
    batch.nt = nt;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 1 + 2 * nr * nt)
            throw IoError("malformed channel CSV row: " + path);
        ChannelMatrix h(nr, nt);
        std::size_t k = 1;
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nt; ++j) {
                const double re = std::stod(fields[k++]);
                const double im = std::stod(fields[k++]);
                h(i, j) = cxd{re, im};
            }
        if (!h.all_finite()) throw IoError("non-finite channel entry in " + path);
        batch.channels.push_back(std::move(h));
    }
    if (batch.channels.empty()) throw IoError("channel CSV has no rows: " + path);
    return batch;
}

} // namespace dsopt

#endif
