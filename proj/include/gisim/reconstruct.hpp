#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gisim/compensated.hpp"
#include "gisim/source.hpp"
#include "gisim/types.hpp"

namespace gisim {

enum class Method { g2, delta_gi, dgi, ci, sgi1, sgi2, sgi3 };

/// CLI names: g2, dgi-delta, dgi, ci, sgi1, sgi2, sgi3.
std::string to_string(Method method);
/// Also accepts "delta-gi" and "delta_gi" for the background-subtracted estimator.
Method parse_method(const std::string& text);

bool is_sgi(Method method) noexcept;
/// True for estimators that produce a positive/negative image pair.
bool yields_pair(Method method) noexcept;

/// Numeric SGI mode of an sgi* method.
enum class SgiMode { both = 1, bucket = 2, reference = 3 };

SgiMode sgi_mode(Method method);

struct SrDiagnostics {
    std::vector<double> totals;      // S_R(i)
    std::vector<double> deviations;  // S_R(i + k) - S_R(i)
};

struct ReconResult {
    Method method = Method::g2;
    std::vector<ReconImage> images;  // one image, or {positive, negative}
    std::size_t count = 0;           // pairs for SGI, measurements otherwise
    SrDiagnostics diagnostics;

    const ReconImage& image() const { return images.front(); }
    const ReconImage& positive() const { return images.at(0); }
    const ReconImage& negative() const { return images.at(1); }
};

/// One-pass sums behind G2, delta-GI and DGI.
class CorrelationAccumulator {
public:
    CorrelationAccumulator(std::size_t width, std::size_t height);

    void push(std::span<const double> frame, double bucket);
    void push(const MeasurementRecord& record) { push(record.frame.data(), record.bucket); }

    std::size_t count() const noexcept { return count_; }

    /// <S_B I_R>
    ReconImage g2() const;
    /// <S_B I_R> - <S_B><I_R>
    ReconImage delta_gi() const;
    /// <S_B I_R> - (<S_B>/<S_R>) <S_R I_R>
    ReconImage dgi() const;

private:
    std::size_t width_;
    std::size_t height_;
    std::size_t count_ = 0;
    CompensatedImage sum_bucket_frame_;
    CompensatedImage sum_frame_;
    CompensatedImage sum_total_frame_;
    CompensatedSum sum_bucket_;
    CompensatedSum sum_total_;
};

/// Streaming successive-deviation reconstruction. Each push is O(P) work;
/// state is the last `shift` records plus one or two image accumulators.
class SgiAccumulator {
public:
    SgiAccumulator(std::size_t width, std::size_t height, SgiMode mode, std::size_t shift = 1,
                   bool close_loop = false);

    void push(std::span<const double> frame, double bucket);
    void push(const MeasurementRecord& record) { push(record.frame.data(), record.bucket); }

    SgiMode mode() const noexcept { return mode_; }
    std::size_t shift() const noexcept { return shift_; }
    bool close_loop() const noexcept { return close_loop_; }
    std::size_t records_seen() const noexcept { return seen_; }
    /// Pairs (i + k, i) accumulated so far: max(0, seen - k).
    std::size_t pair_count() const noexcept { return pairs_; }
    /// Pairs a snapshot would average over, counting the closing pair.
    std::size_t snapshot_pairs() const noexcept;

    /// Current estimate; one image for mode-1, {plus, minus} otherwise.
    /// Throws insufficient_data before the first pair exists.
    std::vector<ReconImage> snapshot() const;

private:
    void accumulate(std::span<const double> newer, double newer_bucket, std::span<const double> older,
                    double older_bucket, CompensatedImage& first, CompensatedImage& second) const;

    std::size_t width_;
    std::size_t height_;
    SgiMode mode_;
    std::size_t shift_;
    bool close_loop_;
    std::size_t seen_ = 0;
    std::size_t pairs_ = 0;
    std::vector<std::vector<double>> ring_frames_;
    std::vector<double> ring_buckets_;
    std::vector<double> first_frame_;
    double first_bucket_ = 0.0;
    CompensatedImage first_;   // mode-1 image, or the plus image
    CompensatedImage second_;  // minus image (modes 2 and 3)
};

struct ReconOptions {
    Method method = Method::g2;
    std::size_t shift = 1;
    bool close_loop = false;
};

/// Smallest record count `options` can reconstruct from.
std::size_t minimum_records(const ReconOptions& options);

/// Throws invalid_argument for unusable option combinations and
/// insufficient_data when `n` records cannot support the method.
void validate_options(const ReconOptions& options, std::size_t n);

/// Called with (records seen, current SGI snapshot) every `every` records.
struct Progress {
    std::size_t every = 0;
    std::function<void(std::size_t, const std::vector<ReconImage>&)> callback;
};

/// Runs any estimator over a record stream. CI rewinds the source once.
ReconResult reconstruct(RecordSource& source, const ReconOptions& options,
                        const Progress& progress = {});

ReconResult recon_g2(const Dataset& dataset);
ReconResult recon_delta_gi(const Dataset& dataset);
ReconResult recon_dgi(const Dataset& dataset);
ReconResult recon_ci(const Dataset& dataset);
ReconResult recon_sgi(const Dataset& dataset, SgiMode mode, std::size_t shift = 1,
                      bool close_loop = false);

/// Frame totals S_R(i) and their shift-k successive deviations.
SrDiagnostics sr_diagnostics(RecordSource& source, std::size_t shift = 1);
SrDiagnostics sr_diagnostics(const Dataset& dataset, std::size_t shift = 1);

}  // namespace gisim
