#include "gisim/reconstruct.hpp"

#include <algorithm>

#include "gisim/error.hpp"

namespace gisim {

std::string to_string(Method method) {
    switch (method) {
    case Method::g2: return "g2";
    case Method::delta_gi: return "dgi-delta";
    case Method::dgi: return "dgi";
    case Method::ci: return "ci";
    case Method::sgi1: return "sgi1";
    case Method::sgi2: return "sgi2";
    case Method::sgi3: return "sgi3";
    }
    return "unknown";
}

Method parse_method(const std::string& text) {
    if (text == "g2") return Method::g2;
    if (text == "dgi-delta" || text == "delta-gi" || text == "delta_gi") return Method::delta_gi;
    if (text == "dgi") return Method::dgi;
    if (text == "ci") return Method::ci;
    if (text == "sgi1") return Method::sgi1;
    if (text == "sgi2") return Method::sgi2;
    if (text == "sgi3") return Method::sgi3;
    throw Error(Errc::invalid_argument, "unknown method '" + text + "'");
}

bool is_sgi(Method method) noexcept {
    return method == Method::sgi1 || method == Method::sgi2 || method == Method::sgi3;
}

bool yields_pair(Method method) noexcept {
    return method == Method::ci || method == Method::sgi2 || method == Method::sgi3;
}

SgiMode sgi_mode(Method method) {
    switch (method) {
    case Method::sgi1: return SgiMode::both;
    case Method::sgi2: return SgiMode::bucket;
    case Method::sgi3: return SgiMode::reference;
    default: throw Error(Errc::invalid_argument, to_string(method) + " is not an SGI method");
    }
}

namespace {

double plain_sum(std::span<const double> values) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

void check_frame(std::span<const double> frame, std::size_t expected, const char* who) {
    if (frame.size() != expected) {
        throw Error(Errc::shape_mismatch, std::string(who) + ": frame size " +
                                              std::to_string(frame.size()) + " != " +
                                              std::to_string(expected));
    }
}

SrDiagnostics deviations_of(std::vector<double> totals, std::size_t shift) {
    SrDiagnostics d;
    if (totals.size() > shift) {
        d.deviations.resize(totals.size() - shift);
        for (std::size_t i = 0; i + shift < totals.size(); ++i) {
            d.deviations[i] = totals[i + shift] - totals[i];
        }
    }
    d.totals = std::move(totals);
    return d;
}

}  // namespace

CorrelationAccumulator::CorrelationAccumulator(std::size_t width, std::size_t height)
    : width_(width),
      height_(height),
      sum_bucket_frame_(width * height),
      sum_frame_(width * height),
      sum_total_frame_(width * height) {}

void CorrelationAccumulator::push(std::span<const double> frame, double bucket) {
    check_frame(frame, width_ * height_, "correlation");
    const double total = plain_sum(frame);
    sum_bucket_frame_.add_scaled(frame, bucket);
    sum_frame_.add_scaled(frame, 1.0);
    sum_total_frame_.add_scaled(frame, total);
    sum_bucket_.add(bucket);
    sum_total_.add(total);
    ++count_;
}

ReconImage CorrelationAccumulator::g2() const {
    if (count_ == 0) throw Error(Errc::insufficient_data, "g2: no measurements");
    return ReconImage(width_, height_, sum_bucket_frame_.scaled(1.0 / static_cast<double>(count_)));
}

ReconImage CorrelationAccumulator::delta_gi() const {
    if (count_ < 2) throw Error(Errc::insufficient_data, "delta-GI: needs at least 2 measurements");
    const double n = static_cast<double>(count_);
    const double mean_bucket = sum_bucket_.value() / n;
    std::vector<double> out(width_ * height_);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sum_bucket_frame_.value(i) / n - mean_bucket * (sum_frame_.value(i) / n);
    }
    return ReconImage(width_, height_, std::move(out));
}

ReconImage CorrelationAccumulator::dgi() const {
    if (count_ < 2) throw Error(Errc::insufficient_data, "DGI: needs at least 2 measurements");
    const double n = static_cast<double>(count_);
    const double mean_total = sum_total_.value() / n;
    if (mean_total == 0.0) throw Error(Errc::degenerate, "DGI: mean frame total <S_R> is zero");
    const double ratio = (sum_bucket_.value() / n) / mean_total;
    std::vector<double> out(width_ * height_);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sum_bucket_frame_.value(i) / n - ratio * (sum_total_frame_.value(i) / n);
    }
    return ReconImage(width_, height_, std::move(out));
}

SgiAccumulator::SgiAccumulator(std::size_t width, std::size_t height, SgiMode mode,
                               std::size_t shift, bool close_loop)
    : width_(width), height_(height), mode_(mode), shift_(shift), close_loop_(close_loop) {
    if (width_ == 0 || height_ == 0) throw Error(Errc::invalid_argument, "SGI: zero dimension");
    if (shift_ == 0) throw Error(Errc::invalid_argument, "SGI: shift must be at least 1");
    if (close_loop_ && shift_ != 1) {
        throw Error(Errc::invalid_argument,
                    "SGI: close-loop is only defined for shift 1 (closing pairs for k > 1 are ambiguous)");
    }
    const std::size_t p = width_ * height_;
    ring_frames_.assign(shift_, std::vector<double>(p, 0.0));
    ring_buckets_.assign(shift_, 0.0);
    first_ = CompensatedImage(p);
    if (mode_ != SgiMode::both) second_ = CompensatedImage(p);
}

void SgiAccumulator::accumulate(std::span<const double> newer, double newer_bucket,
                                std::span<const double> older, double older_bucket,
                                CompensatedImage& first, CompensatedImage& second) const {
    const double delta_bucket = newer_bucket - older_bucket;
    switch (mode_) {
    case SgiMode::both:
        first.add_scaled_difference(newer, older, delta_bucket);
        break;
    case SgiMode::bucket:
        first.add_scaled(newer, delta_bucket);
        second.add_scaled(older, delta_bucket);
        break;
    case SgiMode::reference:
        first.add_scaled_difference(newer, older, newer_bucket);
        second.add_scaled_difference(newer, older, older_bucket);
        break;
    }
}

void SgiAccumulator::push(std::span<const double> frame, double bucket) {
    check_frame(frame, width_ * height_, "SGI");
    const std::size_t slot = seen_ % shift_;
    if (seen_ >= shift_) {
        // The slot still holds record seen_ - k.
        accumulate(frame, bucket, ring_frames_[slot], ring_buckets_[slot], first_, second_);
        ++pairs_;
    } else if (seen_ == 0 && close_loop_) {
        first_frame_.assign(frame.begin(), frame.end());
        first_bucket_ = bucket;
    }
    std::copy(frame.begin(), frame.end(), ring_frames_[slot].begin());
    ring_buckets_[slot] = bucket;
    ++seen_;
}

std::size_t SgiAccumulator::snapshot_pairs() const noexcept {
    return pairs_ + (close_loop_ && seen_ >= 2 ? 1 : 0);
}

std::vector<ReconImage> SgiAccumulator::snapshot() const {
    const std::size_t m = snapshot_pairs();
    if (m == 0) {
        throw Error(Errc::insufficient_data, "SGI: needs more than " + std::to_string(shift_) +
                                                 " records, have " + std::to_string(seen_));
    }
    const double scale = 1.0 / static_cast<double>(m);
    std::vector<ReconImage> out;
    if (close_loop_ && seen_ >= 2) {
        // Closing pair (0, N-1): record 0 plays the newer role after the last one.
        const std::size_t last = (seen_ - 1) % shift_;
        CompensatedImage first = first_;
        CompensatedImage second = second_;
        accumulate(first_frame_, first_bucket_, ring_frames_[last], ring_buckets_[last], first, second);
        out.emplace_back(width_, height_, first.scaled(scale));
        if (mode_ != SgiMode::both) out.emplace_back(width_, height_, second.scaled(scale));
    } else {
        out.emplace_back(width_, height_, first_.scaled(scale));
        if (mode_ != SgiMode::both) out.emplace_back(width_, height_, second_.scaled(scale));
    }
    return out;
}

std::size_t minimum_records(const ReconOptions& options) {
    switch (options.method) {
    case Method::g2: return 1;
    case Method::delta_gi:
    case Method::dgi:
    case Method::ci: return 2;
    default: return options.shift + 1;
    }
}

void validate_options(const ReconOptions& options, std::size_t n) {
    if (is_sgi(options.method)) {
        if (options.shift == 0) throw Error(Errc::invalid_argument, "shift must be at least 1");
        if (options.close_loop && options.shift != 1) {
            throw Error(Errc::invalid_argument,
                        "close-loop requires shift 1 (closing pairs for k > 1 are ambiguous)");
        }
    } else if (options.shift != 1 || options.close_loop) {
        throw Error(Errc::invalid_argument, "shift/close-loop only apply to SGI methods");
    }
    const std::size_t need = minimum_records(options);
    if (n < need) {
        throw Error(Errc::insufficient_data, to_string(options.method) + " needs at least " +
                                                 std::to_string(need) + " records, have " +
                                                 std::to_string(n));
    }
}

ReconResult reconstruct(RecordSource& source, const ReconOptions& options, const Progress& progress) {
    const DatasetHeader& header = source.header();
    validate_options(options, header.n);
    const std::size_t width = header.width;
    const std::size_t height = header.height;
    const std::size_t diag_shift = is_sgi(options.method) ? options.shift : 1;

    ReconResult result;
    result.method = options.method;
    std::vector<double> totals;
    totals.reserve(header.n);
    source.rewind();

    auto too_few = [&](std::size_t have) {
        if (have < minimum_records(options)) {
            throw Error(Errc::insufficient_data, to_string(options.method) + ": source ended after " +
                                                     std::to_string(have) + " records");
        }
    };

    if (is_sgi(options.method)) {
        SgiAccumulator acc(width, height, sgi_mode(options.method), options.shift, options.close_loop);
        while (const auto* rec = source.next()) {
            acc.push(*rec);
            totals.push_back(plain_sum(rec->frame.data()));
            if (progress.every > 0 && progress.callback && acc.records_seen() % progress.every == 0 &&
                acc.snapshot_pairs() > 0) {
                progress.callback(acc.records_seen(), acc.snapshot());
            }
        }
        too_few(acc.records_seen());
        result.images = acc.snapshot();
        result.count = acc.snapshot_pairs();
    } else if (options.method == Method::ci) {
        // The bucket mean must be known before any frame can be assigned.
        CompensatedSum bucket_sum;
        std::size_t n = 0;
        while (const auto* rec = source.next()) {
            check_frame(rec->frame.data(), width * height, "CI");
            bucket_sum.add(rec->bucket);
            totals.push_back(plain_sum(rec->frame.data()));
            ++n;
        }
        too_few(n);
        const double mean = bucket_sum.value() / static_cast<double>(n);
        source.rewind();
        CompensatedImage plus(width * height);
        CompensatedImage minus(width * height);
        std::size_t n_plus = 0;
        std::size_t n_minus = 0;
        while (const auto* rec = source.next()) {
            if (rec->bucket >= mean) {
                plus.add_scaled(rec->frame.data(), 1.0);
                ++n_plus;
            } else {
                minus.add_scaled(rec->frame.data(), 1.0);
                ++n_minus;
            }
        }
        if (n_plus == 0 || n_minus == 0) {
            throw Error(Errc::degenerate, "CI: bucket values do not split into two non-empty subsets");
        }
        result.images.emplace_back(width, height, plus.scaled(1.0 / static_cast<double>(n_plus)));
        result.images.emplace_back(width, height, minus.scaled(1.0 / static_cast<double>(n_minus)));
        result.count = n;
    } else {
        CorrelationAccumulator acc(width, height);
        while (const auto* rec = source.next()) {
            acc.push(*rec);
            totals.push_back(plain_sum(rec->frame.data()));
        }
        too_few(acc.count());
        switch (options.method) {
        case Method::g2: result.images.push_back(acc.g2()); break;
        case Method::delta_gi: result.images.push_back(acc.delta_gi()); break;
        default: result.images.push_back(acc.dgi()); break;
        }
        result.count = acc.count();
    }
    result.diagnostics = deviations_of(std::move(totals), diag_shift);
    return result;
}

namespace {

ReconResult run(const Dataset& dataset, ReconOptions options) {
    require_valid(dataset);
    DatasetSource source(dataset);
    return reconstruct(source, options);
}

}  // namespace

ReconResult recon_g2(const Dataset& dataset) { return run(dataset, {Method::g2}); }
ReconResult recon_delta_gi(const Dataset& dataset) { return run(dataset, {Method::delta_gi}); }
ReconResult recon_dgi(const Dataset& dataset) { return run(dataset, {Method::dgi}); }
ReconResult recon_ci(const Dataset& dataset) { return run(dataset, {Method::ci}); }

ReconResult recon_sgi(const Dataset& dataset, SgiMode mode, std::size_t shift, bool close_loop) {
    const Method method = mode == SgiMode::both     ? Method::sgi1
                          : mode == SgiMode::bucket ? Method::sgi2
                                                    : Method::sgi3;
    return run(dataset, {method, shift, close_loop});
}

SrDiagnostics sr_diagnostics(RecordSource& source, std::size_t shift) {
    if (shift == 0) throw Error(Errc::invalid_argument, "diagnostics: shift must be at least 1");
    source.rewind();
    std::vector<double> totals;
    while (const auto* rec = source.next()) totals.push_back(plain_sum(rec->frame.data()));
    if (totals.size() <= shift) {
        throw Error(Errc::insufficient_data, "diagnostics: need more than " + std::to_string(shift) +
                                                 " frames, have " + std::to_string(totals.size()));
    }
    return deviations_of(std::move(totals), shift);
}

SrDiagnostics sr_diagnostics(const Dataset& dataset, std::size_t shift) {
    DatasetSource source(dataset);
    return sr_diagnostics(source, shift);
}

}  // namespace gisim
