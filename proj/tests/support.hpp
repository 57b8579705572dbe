#pragma once

// Test-only dataset builders and naive long-double reference estimators.
// The references share no code with the library accumulators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "gisim/reconstruct.hpp"
#include "gisim/types.hpp"

namespace gisim::test {

inline Dataset make_dataset(std::size_t width, std::size_t height,
                            const std::vector<std::vector<double>>& frames,
                            const std::vector<double>& buckets) {
    Dataset d;
    d.header.width = width;
    d.header.height = height;
    d.header.n = frames.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        d.records.push_back({i, Frame(width, height, frames[i]), buckets[i]});
    }
    return d;
}

/// The 1x1 hand-check dataset: I = [0.5, 1, 2], S_B = [1, 2, 4].
inline Dataset hand_dataset() {
    return make_dataset(1, 1, {{0.5}, {1.0}, {2.0}}, {1.0, 2.0, 4.0});
}

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t width, std::size_t height,
                              std::size_t n) {
    std::uniform_real_distribution<double> pixel(0.0, 1.0);
    std::normal_distribution<double> bucket(0.0, 5.0);
    std::vector<std::vector<double>> frames(n, std::vector<double>(width * height));
    std::vector<double> buckets(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : frames[i]) v = pixel(rng);
        buckets[i] = bucket(rng);
    }
    return make_dataset(width, height, frames, buckets);
}

inline std::vector<double> as_vector(const ReconImage& image) {
    return {image.data().begin(), image.data().end()};
}

/// Worst elementwise |a - b| / max(|b_i|, max_j |b_j|).
inline double max_scaled_error(const std::vector<double>& a, const std::vector<double>& b) {
    double scale = 0.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(std::abs(b[i]), scale);
        const double err = denom > 0.0 ? std::abs(a[i] - b[i]) / denom : std::abs(a[i] - b[i]);
        worst = std::max(worst, err);
    }
    return worst;
}

namespace oracle {

using Images = std::vector<std::vector<double>>;

inline double px(const Dataset& d, std::size_t i, std::size_t x) { return d.records[i].frame.data()[x]; }
inline double sb(const Dataset& d, std::size_t i) { return d.records[i].bucket; }

inline std::vector<double> g2(const Dataset& d) {
    const std::size_t n = d.records.size(), p = d.header.width * d.header.height;
    std::vector<double> out(p);
    for (std::size_t x = 0; x < p; ++x) {
        long double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(sb(d, i)) * px(d, i, x);
        out[x] = static_cast<double>(s / n);
    }
    return out;
}

inline std::vector<double> delta_gi(const Dataset& d) {
    const std::size_t n = d.records.size(), p = d.header.width * d.header.height;
    long double mb = 0;
    for (std::size_t i = 0; i < n; ++i) mb += sb(d, i);
    mb /= n;
    std::vector<double> out(p);
    for (std::size_t x = 0; x < p; ++x) {
        long double mi = 0;
        for (std::size_t i = 0; i < n; ++i) mi += px(d, i, x);
        mi /= n;
        long double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (sb(d, i) - mb) * (px(d, i, x) - mi);
        out[x] = static_cast<double>(s / n);
    }
    return out;
}

inline std::vector<double> dgi(const Dataset& d) {
    const std::size_t n = d.records.size(), p = d.header.width * d.header.height;
    std::vector<long double> sr(n, 0);
    long double mb = 0, mr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t x = 0; x < p; ++x) sr[i] += px(d, i, x);
        mb += sb(d, i);
        mr += sr[i];
    }
    mb /= n;
    mr /= n;
    std::vector<double> out(p);
    for (std::size_t x = 0; x < p; ++x) {
        long double mi = 0;
        for (std::size_t i = 0; i < n; ++i) mi += px(d, i, x);
        mi /= n;
        long double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (sb(d, i) - mb / mr * sr[i]) * (px(d, i, x) - mi);
        out[x] = static_cast<double>(s / n);
    }
    return out;
}

inline Images ci(const Dataset& d) {
    const std::size_t n = d.records.size(), p = d.header.width * d.header.height;
    long double mb = 0;
    for (std::size_t i = 0; i < n; ++i) mb += sb(d, i);
    mb /= n;
    Images out(2, std::vector<double>(p));
    for (std::size_t x = 0; x < p; ++x) {
        long double plus = 0, minus = 0;
        std::size_t np = 0, nm = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sb(d, i) >= mb) {
                plus += px(d, i, x);
                ++np;
            } else {
                minus += px(d, i, x);
                ++nm;
            }
        }
        out[0][x] = static_cast<double>(plus / np);
        out[1][x] = static_cast<double>(minus / nm);
    }
    return out;
}

/// Pairs (newer, older) = (i + k, i), plus (0, N - 1) when closing the loop.
inline std::vector<std::pair<std::size_t, std::size_t>> sgi_pairs(std::size_t n, std::size_t k,
                                                                  bool close_loop) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i + k < n; ++i) pairs.emplace_back(i + k, i);
    if (close_loop) pairs.emplace_back(0, n - 1);
    return pairs;
}

/// mode 1: one image; modes 2 and 3: {plus, minus}.
inline Images sgi(const Dataset& d, int mode, std::size_t k, bool close_loop) {
    const std::size_t p = d.header.width * d.header.height;
    const auto pairs = sgi_pairs(d.records.size(), k, close_loop);
    Images out(mode == 1 ? 1 : 2, std::vector<double>(p));
    for (std::size_t x = 0; x < p; ++x) {
        long double a = 0, b = 0;
        for (auto [j, i] : pairs) {
            const long double ds = static_cast<long double>(sb(d, j)) - sb(d, i);
            const long double di = static_cast<long double>(px(d, j, x)) - px(d, i, x);
            if (mode == 1) {
                a += ds * di;
            } else if (mode == 2) {
                a += ds * px(d, j, x);
                b += ds * px(d, i, x);
            } else {
                a += sb(d, j) * di;
                b += sb(d, i) * di;
            }
        }
        out[0][x] = static_cast<double>(a / pairs.size());
        if (mode != 1) out[1][x] = static_cast<double>(b / pairs.size());
    }
    return out;
}

}  // namespace oracle

}  // namespace gisim::test
