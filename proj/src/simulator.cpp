#include "gisim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gisim/compensated.hpp"
#include "gisim/error.hpp"

namespace gisim {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

double parse_number(const std::string& text, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::invalid_argument, context + ": '" + text + "' is not a number");
    }
}

std::size_t parse_count(const std::string& text, const std::string& context) {
    const double v = parse_number(text, context);
    if (v < 0 || v != std::floor(v)) {
        throw Error(Errc::invalid_argument, context + ": '" + text + "' is not a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

long long wrap(long long v, long long m) {
    const long long r = v % m;
    return r < 0 ? r + m : r;
}

// Cyclic separable Gaussian blur of a width x height field.
std::vector<double> gaussian_blur(const std::vector<double>& field, std::size_t width,
                                  std::size_t height, double sigma) {
    if (sigma <= 0.0) return field;
    const auto radius = static_cast<long long>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (long long d = -radius; d <= radius; ++d) {
        kernel[d + radius] = std::exp(-static_cast<double>(d * d) / (2.0 * sigma * sigma));
        norm += kernel[d + radius];
    }
    for (double& k : kernel) k /= norm;

    const auto w = static_cast<long long>(width);
    const auto h = static_cast<long long>(height);
    std::vector<double> tmp(field.size(), 0.0);
    for (long long y = 0; y < h; ++y) {
        for (long long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (long long d = -radius; d <= radius; ++d) {
                acc += kernel[d + radius] * field[y * w + wrap(x + d, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    std::vector<double> out(field.size(), 0.0);
    for (long long y = 0; y < h; ++y) {
        for (long long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (long long d = -radius; d <= radius; ++d) {
                acc += kernel[d + radius] * tmp[wrap(y + d, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    return out;
}

}  // namespace

ObjectScene::ObjectScene(std::size_t width, std::size_t height, std::vector<double> transmission)
    : width_(width), height_(height), transmission_(std::move(transmission)), binary_(true) {
    if (width_ == 0 || height_ == 0) throw Error(Errc::invalid_argument, "scene: zero dimension");
    if (transmission_.size() != width_ * height_) {
        throw Error(Errc::shape_mismatch, "scene: data length does not match dimensions");
    }
    for (double t : transmission_) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw Error(Errc::invalid_argument, "scene: transmission values must lie in [0, 1]");
        }
        if (t != 0.0 && t != 1.0) binary_ = false;
    }
}

std::string to_string(PatternModel::Kind kind) {
    return kind == PatternModel::Kind::iid_uniform ? "iid" : "speckle";
}

std::string to_string(DriftProfile::Kind kind) {
    switch (kind) {
    case DriftProfile::Kind::none: return "none";
    case DriftProfile::Kind::linear: return "linear";
    case DriftProfile::Kind::sinusoidal: return "sinusoidal";
    case DriftProfile::Kind::step: return "step";
    case DriftProfile::Kind::random_walk: return "random-walk";
    }
    return "none";
}

std::string to_string(NoiseModel::Target target) {
    return target == NoiseModel::Target::bucket ? "bucket" : "object-field";
}

PatternModel parse_pattern(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.empty()) throw Error(Errc::invalid_argument, "pattern: empty description");
    if (parts[0] == "iid") {
        if (parts.size() != 1) throw Error(Errc::invalid_argument, "pattern: 'iid' takes no parameters");
        return PatternModel::iid();
    }
    if (parts[0] == "speckle") {
        if (parts.size() > 4) throw Error(Errc::invalid_argument, "pattern: too many speckle parameters");
        PatternModel m = PatternModel::speckle(2.0, 1, 0.0);
        if (parts.size() > 1) m.grain_radius = parse_number(parts[1], "pattern grain");
        if (parts.size() > 2) m.step_shift = parse_count(parts[2], "pattern step");
        if (parts.size() > 3) m.jitter = parse_number(parts[3], "pattern jitter");
        if (m.grain_radius < 0 || m.jitter < 0) {
            throw Error(Errc::invalid_argument, "pattern: grain and jitter must be non-negative");
        }
        return m;
    }
    throw Error(Errc::invalid_argument, "pattern: unknown kind '" + parts[0] + "'");
}

DriftProfile parse_drift(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.empty()) throw Error(Errc::invalid_argument, "drift: empty description");
    const std::string& kind = parts[0];
    if (kind == "none") {
        if (parts.size() != 1) throw Error(Errc::invalid_argument, "drift: 'none' takes no parameters");
        return DriftProfile::none();
    }
    if (parts.size() < 2) throw Error(Errc::invalid_argument, "drift: '" + kind + "' needs an amplitude");
    const double a = parse_number(parts[1], "drift amplitude");
    if (kind == "linear" && parts.size() == 2) return DriftProfile::linear(a);
    if (kind == "random-walk" && parts.size() == 2) return DriftProfile::random_walk(a);
    if (kind == "sinusoidal" && parts.size() <= 3) {
        return DriftProfile::sinusoidal(a, parts.size() == 3 ? parse_number(parts[2], "drift period") : 0.0);
    }
    if (kind == "step" && parts.size() <= 3) {
        std::vector<std::size_t> knots;
        if (parts.size() == 3) {
            for (const auto& k : split(parts[2], ',')) knots.push_back(parse_count(k, "drift knot"));
        }
        return DriftProfile::step(a, std::move(knots));
    }
    throw Error(Errc::invalid_argument, "drift: cannot parse '" + text + "'");
}

NoiseModel::Target parse_noise_target(const std::string& text) {
    if (text == "bucket") return NoiseModel::Target::bucket;
    if (text == "object-field") return NoiseModel::Target::object_field;
    throw Error(Errc::invalid_argument, "noise target must be 'bucket' or 'object-field'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    // splitmix64 finalizer over a golden-ratio counter.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PatternGenerator::PatternGenerator(std::size_t width, std::size_t height, PatternModel model,
                                   std::uint64_t seed)
    : width_(width), height_(height), model_(model), seed_(seed) {
    if (width_ == 0 || height_ == 0) throw Error(Errc::invalid_argument, "patterns: zero dimension");
    if (model_.grain_radius < 0 || model_.jitter < 0 || !std::isfinite(model_.grain_radius) ||
        !std::isfinite(model_.jitter)) {
        throw Error(Errc::invalid_argument, "patterns: grain radius and jitter must be finite and >= 0");
    }
    if (model_.kind == PatternModel::Kind::correlated_speckle) {
        std::mt19937_64 rng(derive_seed(seed_, 0));
        std::vector<double> white(width_ * height_);
        for (double& v : white) v = uniform01(rng);
        base_ = gaussian_blur(white, width_, height_, model_.grain_radius);
        const auto [lo, hi] = std::minmax_element(base_.begin(), base_.end());
        const double min = *lo;
        const double span = *hi - *lo;
        const double top = std::nextafter(1.0, 0.0);
        for (double& v : base_) v = span > 0.0 ? std::min((v - min) / span, top) : 0.5;
    }
    rewind();
}

void PatternGenerator::rewind() {
    cursor_ = 0;
    offset_x_ = 0;
    offset_y_ = 0;
    jitter_rng_.seed(derive_seed(seed_, 1));
}

Frame PatternGenerator::frame(std::size_t index) {
    if (model_.kind == PatternModel::Kind::iid_uniform) {
        cursor_ = index + 1;
        return iid_frame(index);
    }
    if (index != cursor_) {
        throw Error(Errc::invalid_argument, "patterns: correlated speckle must be generated in order");
    }
    ++cursor_;
    return speckle_frame();
}

Frame PatternGenerator::iid_frame(std::size_t index) const {
    std::mt19937_64 rng(derive_seed(seed_, index + 2));
    std::vector<double> data(width_ * height_);
    for (double& v : data) v = uniform01(rng);
    return Frame(width_, height_, std::move(data));
}

Frame PatternGenerator::speckle_frame() {
    const auto w = static_cast<long long>(width_);
    const auto h = static_cast<long long>(height_);
    std::vector<double> data(width_ * height_);
    for (long long y = 0; y < h; ++y) {
        const long long src_y = wrap(y - offset_y_, h);
        for (long long x = 0; x < w; ++x) {
            data[y * w + x] = base_[src_y * w + wrap(x - offset_x_, w)];
        }
    }
    // Advance the translation for the following shot.
    long long dx = static_cast<long long>(model_.step_shift);
    long long dy = 0;
    if (model_.jitter > 0.0) {
        std::normal_distribution<double> normal(0.0, model_.jitter);
        dx += std::llround(normal(jitter_rng_));
        dy += std::llround(normal(jitter_rng_));
    }
    offset_x_ = wrap(offset_x_ + dx, w);
    offset_y_ = wrap(offset_y_ + dy, h);
    return Frame(width_, height_, std::move(data));
}

std::vector<Frame> generate_patterns(std::size_t width, std::size_t height, std::size_t n,
                                     const PatternModel& model, std::uint64_t seed) {
    if (n == 0) throw Error(Errc::invalid_argument, "patterns: n must be at least 1");
    PatternGenerator gen(width, height, model, seed);
    std::vector<Frame> frames;
    frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i) frames.push_back(gen.next());
    return frames;
}

double forward_bucket(const Frame& pattern, const ObjectScene& scene) {
    if (pattern.width() != scene.width() || pattern.height() != scene.height()) {
        throw Error(Errc::shape_mismatch, "forward_bucket: pattern and scene shapes differ");
    }
    const auto p = pattern.data();
    const auto t = scene.transmission();
    CompensatedSum acc;
    for (std::size_t i = 0; i < p.size(); ++i) acc.add(p[i] * t[i]);
    return acc.value();
}

std::vector<double> drift_gains(const DriftProfile& profile, std::size_t n, std::uint64_t seed) {
    const double a = profile.amplitude;
    if (!std::isfinite(a)) throw Error(Errc::invalid_argument, "drift: amplitude must be finite");
    std::vector<double> gains(n, 1.0);
    const double dn = static_cast<double>(n);
    switch (profile.kind) {
    case DriftProfile::Kind::none:
        break;
    case DriftProfile::Kind::linear:
        for (std::size_t i = 0; i < n; ++i) gains[i] = 1.0 + a * (static_cast<double>(i) / dn - 0.5);
        break;
    case DriftProfile::Kind::sinusoidal: {
        const double period = profile.period > 0.0 ? profile.period : dn;
        for (std::size_t i = 0; i < n; ++i) {
            gains[i] = 1.0 + a * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
        }
        break;
    }
    case DriftProfile::Kind::step: {
        auto knots = profile.knots;
        if (knots.empty()) knots.push_back(n / 2);
        std::sort(knots.begin(), knots.end());
        for (std::size_t i = 0; i < n; ++i) {
            const auto passed = std::upper_bound(knots.begin(), knots.end(), i) - knots.begin();
            gains[i] = passed % 2 == 0 ? 1.0 + a : 1.0 - a;
        }
        break;
    }
    case DriftProfile::Kind::random_walk: {
        if (!(profile.lower_bound > 0.0 && profile.lower_bound <= 1.0 && profile.upper_bound >= 1.0)) {
            throw Error(Errc::invalid_argument, "drift: random-walk bounds must satisfy 0 < lower <= 1 <= upper");
        }
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> step(0.0, std::abs(a));
        for (std::size_t i = 1; i < n; ++i) {
            const double eps = a == 0.0 ? 0.0 : step(rng);
            gains[i] = std::clamp(gains[i - 1] * std::exp(eps), profile.lower_bound, profile.upper_bound);
        }
        break;
    }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(gains[i] > 0.0) || !std::isfinite(gains[i])) {
            throw Error(Errc::invalid_argument,
                        "drift: gain at shot " + std::to_string(i) + " is not positive (amplitude too large)");
        }
    }
    return gains;
}

Frame scale_frame(const Frame& frame, double gain) {
    if (gain == 1.0) return frame;
    std::vector<double> data(frame.data().begin(), frame.data().end());
    for (double& v : data) v *= gain;
    return Frame(frame.width(), frame.height(), std::move(data));
}

std::vector<Frame> apply_drift(const std::vector<Frame>& patterns, const DriftProfile& profile,
                               std::uint64_t seed) {
    const auto gains = drift_gains(profile, patterns.size(), seed);
    std::vector<Frame> out;
    out.reserve(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) out.push_back(scale_frame(patterns[i], gains[i]));
    return out;
}

NoiseInjector::NoiseInjector(NoiseModel model, std::size_t pixels, std::uint64_t seed)
    : model_(model), pixels_(pixels), seed_(seed), rng_(seed) {
    if (!(model_.stddev >= 0.0) || !std::isfinite(model_.stddev) || !std::isfinite(model_.mean)) {
        throw Error(Errc::invalid_argument, "noise: mean must be finite and stddev finite and >= 0");
    }
}

void NoiseInjector::reset() {
    rng_.seed(seed_);
    normal_.reset();
}

double NoiseInjector::apply(double bucket) {
    if (model_.disabled()) return bucket;
    if (model_.target == NoiseModel::Target::bucket) {
        return bucket + model_.mean + (model_.stddev > 0.0 ? model_.stddev * normal_(rng_) : 0.0);
    }
    // Independent noise on every pixel of the collected field, then integrated.
    if (model_.stddev == 0.0) return bucket + model_.mean * static_cast<double>(pixels_);
    CompensatedSum acc;
    acc.add(bucket);
    for (std::size_t p = 0; p < pixels_; ++p) acc.add(model_.mean + model_.stddev * normal_(rng_));
    return acc.value();
}

Dataset apply_noise(Dataset dataset, const NoiseModel& model, std::uint64_t seed) {
    NoiseInjector noise(model, dataset.header.width * dataset.header.height, seed);
    for (auto& r : dataset.records) r.bucket = noise.apply(r.bucket);
    return dataset;
}

std::string provenance_json(const SimulationConfig& config, const ObjectScene& scene) {
    using nlohmann::json;
    json drift = {{"kind", to_string(config.drift.kind)}, {"amplitude", config.drift.amplitude}};
    if (config.drift.kind == DriftProfile::Kind::sinusoidal) drift["period"] = config.drift.period;
    if (config.drift.kind == DriftProfile::Kind::step) drift["knots"] = config.drift.knots;
    if (config.drift.kind == DriftProfile::Kind::random_walk) {
        drift["bounds"] = {config.drift.lower_bound, config.drift.upper_bound};
    }
    json pattern = {{"kind", to_string(config.pattern.kind)}};
    if (config.pattern.kind == PatternModel::Kind::correlated_speckle) {
        pattern["grain_radius"] = config.pattern.grain_radius;
        pattern["step_shift"] = config.pattern.step_shift;
        pattern["jitter"] = config.pattern.jitter;
    }
    const json doc = {
        {"source", "simulation"},
        {"scene", {{"width", scene.width()}, {"height", scene.height()}, {"binary", scene.is_binary()}}},
        {"pattern", pattern},
        {"drift", drift},
        {"noise",
         {{"mean", config.noise.mean},
          {"stddev", config.noise.stddev},
          {"target", to_string(config.noise.target)}}},
        {"n", config.n},
        {"seed", config.seed},
    };
    return doc.dump();
}

Simulation::Simulation(const ObjectScene& scene, SimulationConfig config)
    : scene_(scene),
      config_(std::move(config)),
      patterns_(scene.width(), scene.height(), config_.pattern, derive_seed(config_.seed, 1)),
      gains_(drift_gains(config_.drift, config_.n, derive_seed(config_.seed, 2))),
      noise_(config_.noise, scene.size(), derive_seed(config_.seed, 3)) {
    if (config_.n == 0) throw Error(Errc::invalid_argument, "simulate: n must be at least 1");
    header_.width = scene.width();
    header_.height = scene.height();
    header_.n = config_.n;
    header_.seed = config_.seed;
    header_.provenance = provenance_json(config_, scene);
}

const MeasurementRecord* Simulation::next() {
    if (cursor_ >= config_.n) return nullptr;
    // Source drift reaches both arms; detector noise only the bucket.
    Frame frame = scale_frame(patterns_.next(), gains_[cursor_]);
    const double bucket = noise_.apply(forward_bucket(frame, scene_));
    current_.emplace(MeasurementRecord{cursor_, std::move(frame), bucket});
    ++cursor_;
    return &*current_;
}

void Simulation::rewind() {
    patterns_.rewind();
    noise_.reset();
    cursor_ = 0;
    current_.reset();
}

Dataset simulate(const ObjectScene& scene, const PatternModel& pattern, const DriftProfile& drift,
                 const NoiseModel& noise, std::size_t n, std::uint64_t seed) {
    Simulation sim(scene, SimulationConfig{pattern, drift, noise, n, seed});
    return collect(sim);
}

}  // namespace gisim
