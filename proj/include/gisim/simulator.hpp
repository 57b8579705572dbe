#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gisim/source.hpp"
#include "gisim/types.hpp"

namespace gisim {

/// Object transmission T(x) with values in [0, 1].
class ObjectScene {
public:
    ObjectScene(std::size_t width, std::size_t height, std::vector<double> transmission);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return transmission_.size(); }
    std::span<const double> transmission() const noexcept { return transmission_; }

    /// True when every value is exactly 0 or 1.
    bool is_binary() const noexcept { return binary_; }

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> transmission_;
    bool binary_;
};

struct PatternModel {
    enum class Kind { iid_uniform, correlated_speckle };

    Kind kind = Kind::iid_uniform;
    double grain_radius = 0.0;      // Gaussian blur sigma, pixels
    std::size_t step_shift = 0;     // horizontal translation per measurement, pixels
    double jitter = 0.0;            // stddev of the random shift perturbation, pixels

    static PatternModel iid() { return {}; }
    static PatternModel speckle(double grain, std::size_t step, double jitter = 0.0) {
        return {Kind::correlated_speckle, grain, step, jitter};
    }
};

/// Multiplicative source gain d_i applied to the whole field of shot i.
struct DriftProfile {
    enum class Kind { none, linear, sinusoidal, step, random_walk };

    Kind kind = Kind::none;
    double amplitude = 0.0;
    double period = 0.0;               // sinusoidal; 0 selects one cycle over the run
    std::vector<std::size_t> knots;    // step; empty selects a single switch at n/2
    double lower_bound = 0.05;         // random-walk clamp
    double upper_bound = 20.0;

    static DriftProfile none() { return {}; }
    static DriftProfile linear(double a) { return make(Kind::linear, a); }
    static DriftProfile sinusoidal(double a, double period = 0.0) {
        auto d = make(Kind::sinusoidal, a);
        d.period = period;
        return d;
    }
    static DriftProfile step(double a, std::vector<std::size_t> knots = {}) {
        auto d = make(Kind::step, a);
        d.knots = std::move(knots);
        return d;
    }
    static DriftProfile random_walk(double a) { return make(Kind::random_walk, a); }

private:
    static DriftProfile make(Kind kind, double a) {
        DriftProfile d;
        d.kind = kind;
        d.amplitude = a;
        return d;
    }
};

struct NoiseModel {
    enum class Target { bucket, object_field };

    double mean = 0.0;
    double stddev = 0.0;
    Target target = Target::bucket;

    bool disabled() const noexcept { return mean == 0.0 && stddev == 0.0; }
};

std::string to_string(PatternModel::Kind kind);
std::string to_string(DriftProfile::Kind kind);
std::string to_string(NoiseModel::Target target);

/// Parses "iid" or "speckle[:grain[:step[:jitter]]]".
PatternModel parse_pattern(const std::string& text);
/// Parses "none", "linear:A", "sinusoidal:A[:PERIOD]", "step:A[:K1,K2,...]",
/// "random-walk:A".
DriftProfile parse_drift(const std::string& text);
NoiseModel::Target parse_noise_target(const std::string& text);

/// Independent stream seed for a (seed, stream) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Produces the pattern sequence one frame at a time.
class PatternGenerator {
public:
    PatternGenerator(std::size_t width, std::size_t height, PatternModel model, std::uint64_t seed);

    Frame frame(std::size_t index);  // iid: random access; speckle: must be sequential
    Frame next() { return frame(cursor_); }
    void rewind();

    /// The untranslated speckle field (correlated-speckle only).
    const std::vector<double>& base_field() const noexcept { return base_; }

private:
    Frame iid_frame(std::size_t index) const;
    Frame speckle_frame();

    std::size_t width_;
    std::size_t height_;
    PatternModel model_;
    std::uint64_t seed_;
    std::size_t cursor_ = 0;
    std::vector<double> base_;
    std::mt19937_64 jitter_rng_;
    long long offset_x_ = 0;
    long long offset_y_ = 0;
};

std::vector<Frame> generate_patterns(std::size_t width, std::size_t height, std::size_t n,
                                     const PatternModel& model, std::uint64_t seed);

/// Bucket value: sum over pixels of pattern(x) * T(x).
double forward_bucket(const Frame& pattern, const ObjectScene& scene);

/// Gains d_0..d_{n-1}. `seed` only matters for random-walk.
std::vector<double> drift_gains(const DriftProfile& profile, std::size_t n, std::uint64_t seed = 0);

std::vector<Frame> apply_drift(const std::vector<Frame>& patterns, const DriftProfile& profile,
                               std::uint64_t seed = 0);

Frame scale_frame(const Frame& frame, double gain);

/// Per-shot detector noise, drawn in record order.
class NoiseInjector {
public:
    NoiseInjector(NoiseModel model, std::size_t pixels, std::uint64_t seed);

    double apply(double bucket);
    void reset();

private:
    NoiseModel model_;
    std::size_t pixels_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

/// Adds noise to the bucket values. Reference frames are untouched.
Dataset apply_noise(Dataset dataset, const NoiseModel& model, std::uint64_t seed);

struct SimulationConfig {
    PatternModel pattern;
    DriftProfile drift;
    NoiseModel noise;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// JSON description of every simulation setting.
std::string provenance_json(const SimulationConfig& config, const ObjectScene& scene);

/// Streaming simulation: records are regenerated on demand, so rewinding
/// replays the identical sequence.
class Simulation final : public RecordSource {
public:
    Simulation(const ObjectScene& scene, SimulationConfig config);

    const DatasetHeader& header() const override { return header_; }
    const MeasurementRecord* next() override;
    void rewind() override;

    const std::vector<double>& gains() const noexcept { return gains_; }

private:
    const ObjectScene& scene_;
    SimulationConfig config_;
    DatasetHeader header_;
    PatternGenerator patterns_;
    std::vector<double> gains_;
    NoiseInjector noise_;
    std::size_t cursor_ = 0;
    std::optional<MeasurementRecord> current_;
};

Dataset simulate(const ObjectScene& scene, const PatternModel& pattern, const DriftProfile& drift,
                 const NoiseModel& noise, std::size_t n, std::uint64_t seed);

}  // namespace gisim
