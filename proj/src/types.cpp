#include "gisim/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gisim/error.hpp"

namespace gisim {

const char* to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::degenerate: return "degenerate input";
    case Errc::format: return "format error";
    case Errc::io: return "i/o error";
    }
    return "unknown error";
}

namespace {

void check_dims(std::size_t width, std::size_t height, std::size_t length, const char* what) {
    if (width == 0 || height == 0) {
        throw Error(Errc::invalid_argument, std::string(what) + ": zero dimension");
    }
    if (length != width * height) {
        std::ostringstream msg;
        msg << what << ": data length " << length << " does not match " << width << "x" << height;
        throw Error(Errc::shape_mismatch, msg.str());
    }
}

}  // namespace

Frame::Frame(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width_, height_, data_.size(), "frame");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const double v = data_[i];
        if (!std::isfinite(v) || v < 0.0) {
            std::ostringstream msg;
            msg << "frame: pixel " << i << " is " << v << " (must be finite and non-negative)";
            throw Error(Errc::invalid_argument, msg.str());
        }
    }
}

Frame Frame::zeros(std::size_t width, std::size_t height) {
    return Frame(width, height, std::vector<double>(width * height, 0.0));
}

double frame_sum(const Frame& frame) {
    // Neumaier summation.
    double sum = 0.0;
    double comp = 0.0;
    for (double v : frame.data()) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

ReconImage::ReconImage(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width_, height_, data_.size(), "image");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            std::ostringstream msg;
            msg << "image: pixel " << i << " is not finite";
            throw Error(Errc::invalid_argument, msg.str());
        }
    }
}

ObjectMask::ObjectMask(std::size_t width, std::size_t height, std::vector<bool> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width_, height_, data_.size(), "mask");
    const auto inside = std::count(data_.begin(), data_.end(), true);
    if (inside == 0 || static_cast<std::size_t>(inside) == data_.size()) {
        throw Error(Errc::degenerate, "mask: needs at least one inside and one outside pixel");
    }
}

const char* to_string(Violation::Kind kind) noexcept {
    using K = Violation::Kind;
    switch (kind) {
    case K::empty_dataset: return "empty-dataset";
    case K::zero_dimension: return "zero-dimension";
    case K::count_mismatch: return "count-mismatch";
    case K::dimension_mismatch: return "dimension-mismatch";
    case K::non_finite: return "non-finite";
    case K::index_order: return "index-order";
    }
    return "unknown";
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        const auto& v = violations[i];
        if (i) out << "; ";
        out << to_string(v.kind);
        if (v.record) out << " at index " << *v.record;
        out << ": " << v.message;
    }
    return out.str();
}

ValidationReport validate_dataset(const Dataset& dataset) {
    using K = Violation::Kind;
    ValidationReport report;
    auto add = [&](K kind, std::optional<std::size_t> at, std::string msg) {
        report.violations.push_back({kind, at, std::move(msg)});
    };

    const auto& h = dataset.header;
    if (h.width == 0 || h.height == 0) {
        add(K::zero_dimension, std::nullopt, "header width/height must be positive");
    }
    if (h.n == 0 || dataset.records.empty()) {
        add(K::empty_dataset, std::nullopt, "dataset needs at least one record");
    }
    if (h.n != dataset.records.size()) {
        add(K::count_mismatch, std::nullopt,
            "header n = " + std::to_string(h.n) + " but " +
                std::to_string(dataset.records.size()) + " records present");
    }

    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& r = dataset.records[i];
        if (r.index != i) {
            add(K::index_order, i,
                "record carries index " + std::to_string(r.index) + ", expected " + std::to_string(i));
        }
        if (r.frame.width() != h.width || r.frame.height() != h.height) {
            add(K::dimension_mismatch, i,
                "frame is " + std::to_string(r.frame.width()) + "x" +
                    std::to_string(r.frame.height()) + ", header says " + std::to_string(h.width) +
                    "x" + std::to_string(h.height));
        }
        if (!std::isfinite(r.bucket)) {
            add(K::non_finite, i, "bucket value is not finite");
        }
    }
    return report;
}

void require_valid(const Dataset& dataset) {
    const auto report = validate_dataset(dataset);
    if (!report.ok()) {
        throw Error(Errc::invalid_argument, "invalid dataset: " + report.summary());
    }
}

}  // namespace gisim
