#include "gisim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gisim/compensated.hpp"
#include "gisim/error.hpp"

namespace gisim {

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t count = 0;
};

// Two-pass population moments of the pixels selected by `keep`.
template <typename Pred>
Moments moments(std::span<const double> values, Pred keep) {
    Moments m;
    CompensatedSum sum;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (keep(i)) {
            sum.add(values[i]);
            ++m.count;
        }
    }
    if (m.count == 0) return m;
    m.mean = sum.value() / static_cast<double>(m.count);
    CompensatedSum sq;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (keep(i)) {
            const double d = values[i] - m.mean;
            sq.add(d * d);
        }
    }
    m.variance = sq.value() / static_cast<double>(m.count);
    return m;
}

}  // namespace

CnrReport cnr(const ReconImage& image, const ObjectMask& mask) {
    if (image.width() != mask.width() || image.height() != mask.height()) {
        throw Error(Errc::shape_mismatch, "cnr: image and mask shapes differ");
    }
    const auto data = image.data();
    const auto in = moments(data, [&](std::size_t i) { return mask[i]; });
    const auto out = moments(data, [&](std::size_t i) { return !mask[i]; });
    CnrReport r{0.0, in.mean, out.mean, in.variance, out.variance, in.count, out.count};
    const double pooled = 0.5 * (in.variance + out.variance);
    if (!(pooled > 0.0)) {
        throw Error(Errc::degenerate, "cnr: inside and outside variances are both zero");
    }
    r.cnr = (in.mean - out.mean) / std::sqrt(pooled);
    return r;
}

ObjectMask mask_from_scene(const ObjectScene& scene, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(Errc::invalid_argument, "mask: threshold must lie in (0, 1)");
    }
    std::vector<bool> inside(scene.size());
    const auto t = scene.transmission();
    for (std::size_t i = 0; i < inside.size(); ++i) inside[i] = t[i] >= threshold;
    return ObjectMask(scene.width(), scene.height(), std::move(inside));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(Errc::shape_mismatch, "pearson: inputs must be non-empty and equally sized");
    }
    const auto all = [](std::size_t) { return true; };
    const auto ma = moments(a, all);
    const auto mb = moments(b, all);
    if (!(ma.variance > 0.0) || !(mb.variance > 0.0)) {
        throw Error(Errc::degenerate, "pearson: an input has zero variance");
    }
    CompensatedSum cov;
    for (std::size_t i = 0; i < a.size(); ++i) cov.add((a[i] - ma.mean) * (b[i] - mb.mean));
    const double r = cov.value() / static_cast<double>(a.size()) / std::sqrt(ma.variance * mb.variance);
    return std::clamp(r, -1.0, 1.0);
}

double pearson(const ReconImage& image, std::span<const double> reference) {
    return pearson(image.data(), reference);
}

ReconImage normalize_minmax(const ReconImage& image) {
    const auto data = image.data();
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double min = *lo;
    const double span = *hi - *lo;
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = span > 0.0 ? std::clamp((data[i] - min) / span, 0.0, 1.0) : 0.5;
    }
    return ReconImage(image.width(), image.height(), std::move(out));
}

}  // namespace gisim
