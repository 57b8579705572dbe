#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace gisim {

/// Neumaier (improved Kahan) running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Pixel-wise Neumaier accumulator for image-sized sums.
class CompensatedImage {
public:
    CompensatedImage() = default;
    explicit CompensatedImage(std::size_t size) : sum_(size, 0.0), comp_(size, 0.0) {}

    std::size_t size() const noexcept { return sum_.size(); }

    void add_term(std::size_t i, double v) noexcept {
        double& s = sum_[i];
        const double t = s + v;
        if (std::abs(s) >= std::abs(v)) {
            comp_[i] += (s - t) + v;
        } else {
            comp_[i] += (v - t) + s;
        }
        s = t;
    }

    /// sum += weight * values
    void add_scaled(std::span<const double> values, double weight) noexcept {
        for (std::size_t i = 0; i < values.size(); ++i) add_term(i, weight * values[i]);
    }

    /// sum += weight * (a - b)
    void add_scaled_difference(std::span<const double> a, std::span<const double> b,
                               double weight) noexcept {
        for (std::size_t i = 0; i < a.size(); ++i) add_term(i, weight * (a[i] - b[i]));
    }

    double value(std::size_t i) const noexcept { return sum_[i] + comp_[i]; }

    /// Compensated totals multiplied by `scale`.
    std::vector<double> scaled(double scale) const {
        std::vector<double> out(sum_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (sum_[i] + comp_[i]) * scale;
        return out;
    }

private:
    std::vector<double> sum_;
    std::vector<double> comp_;
};

}  // namespace gisim
