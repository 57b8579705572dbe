#pragma once

#include <cstddef>
#include <span>

#include "gisim/simulator.hpp"
#include "gisim/types.hpp"

namespace gisim {

struct CnrReport {
    double cnr = 0.0;
    double mean_in = 0.0;
    double mean_out = 0.0;
    double var_in = 0.0;   // population variance
    double var_out = 0.0;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
};

/// Contrast-to-noise ratio (mean_in - mean_out) / sqrt((var_in + var_out) / 2).
/// Throws degenerate when both variances vanish.
CnrReport cnr(const ReconImage& image, const ObjectMask& mask);

/// mask(x) = T(x) >= threshold.
ObjectMask mask_from_scene(const ObjectScene& scene, double threshold = 0.5);

/// Product-moment correlation; throws degenerate on zero variance.
double pearson(std::span<const double> a, std::span<const double> b);
double pearson(const ReconImage& image, std::span<const double> reference);

/// Affine map of [min, max] onto [0, 1]; constant images map to 0.5.
ReconImage normalize_minmax(const ReconImage& image);

}  // namespace gisim
