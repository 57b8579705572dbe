#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gisim {

/// Reference-arm speckle intensity pattern. Row-major, finite, non-negative.
class Frame {
public:
    Frame(std::size_t width, std::size_t height, std::vector<double> data);

    static Frame zeros(std::size_t width, std::size_t height);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::span<const double> data() const noexcept { return data_; }

    double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    bool same_shape(const Frame& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> data_;
};

/// Sum of all pixels; the discrete integral over the full aperture.
double frame_sum(const Frame& frame);

struct MeasurementRecord {
    std::size_t index = 0;
    Frame frame;
    double bucket = 0.0;

    friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

struct DatasetHeader {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;
    std::string provenance;

    friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct Dataset {
    DatasetHeader header;
    std::vector<MeasurementRecord> records;

    std::size_t size() const noexcept { return records.size(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Real-valued reconstruction; signed values are allowed.
class ReconImage {
public:
    ReconImage(std::size_t width, std::size_t height, std::vector<double> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::span<const double> data() const noexcept { return data_; }

    double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    friend bool operator==(const ReconImage&, const ReconImage&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> data_;
};

/// Inside (true) / outside (false) transmitting region. Both classes are non-empty.
class ObjectMask {
public:
    ObjectMask(std::size_t width, std::size_t height, std::vector<bool> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool operator[](std::size_t i) const { return data_[i]; }
    const std::vector<bool>& data() const noexcept { return data_; }

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<bool> data_;
};

struct Violation {
    enum class Kind {
        empty_dataset,
        zero_dimension,
        count_mismatch,
        dimension_mismatch,
        non_finite,
        index_order,
    };

    Kind kind;
    std::optional<std::size_t> record;  // offending record position, if any
    std::string message;
};

const char* to_string(Violation::Kind kind) noexcept;

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

/// Checks every dataset invariant and reports all violations found.
ValidationReport validate_dataset(const Dataset& dataset);

/// Throws Error(invalid_argument) carrying the report summary when invalid.
void require_valid(const Dataset& dataset);

}  // namespace gisim
