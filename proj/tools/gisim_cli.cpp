// gisim: simulate ghost-imaging measurements, reconstruct, sweep, diagnose.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gisim/error.hpp"
#include "gisim/io.hpp"
#include "gisim/metrics.hpp"
#include "gisim/reconstruct.hpp"
#include "gisim/scenes.hpp"
#include "gisim/simulator.hpp"
#include "gisim/source.hpp"

namespace fs = std::filesystem;
using namespace gisim;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

const CLI::Validator kPositive(
    [](std::string& text) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        return used == text.size() && v >= 1 ? std::string{} : "expected an integer >= 1, got '" + text + "'";
    },
    "INT>=1");

// A file path if one exists, otherwise a built-in scene name.
ObjectScene load_scene(const std::string& source, std::size_t width, std::size_t height) {
    if (fs::exists(source)) return io::import_scene(fs::path(source));
    return builtin_scene(source, width, height);
}

// Forwards records under a replacement header.
class Relabeled final : public RecordSource {
public:
    Relabeled(RecordSource& inner, DatasetHeader header) : inner_(inner), header_(std::move(header)) {}
    const DatasetHeader& header() const override { return header_; }
    const MeasurementRecord* next() override { return inner_.next(); }
    void rewind() override { inner_.rewind(); }

private:
    RecordSource& inner_;
    DatasetHeader header_;
};

struct SimFlags {
    std::string scene;
    std::size_t size = 32;
    std::size_t n = 0;
    std::string pattern = "iid";
    std::uint64_t seed = 0;
    std::string drift = "none";
    double noise_mean = 0.0;
    double noise_std = 0.0;
    std::string noise_target = "bucket";

    SimulationConfig config() const {
        NoiseModel noise{noise_mean, noise_std, parse_noise_target(noise_target)};
        if (noise_std < 0.0) throw Error(Errc::invalid_argument, "noise stddev must be >= 0");
        return {parse_pattern(pattern), parse_drift(drift), noise, n, seed};
    }

    json to_json() const {
        return {{"scene", scene},         {"size", size},           {"n", n},
                {"pattern", pattern},     {"seed", seed},           {"drift", drift},
                {"noise_mean", noise_mean}, {"noise_std", noise_std}, {"noise_target", noise_target}};
    }
};

void add_sim_flags(CLI::App* cmd, SimFlags& f, bool n_required) {
    cmd->add_option("--scene", f.scene, "PGM file or built-in scene (gi, disk)")->required();
    cmd->add_option("--size", f.size, "edge length for built-in scenes")->check(kPositive);
    auto* n = cmd->add_option("--n", f.n, "number of measurements")->check(kPositive);
    if (n_required) n->required();
    cmd->add_option("--pattern", f.pattern, "iid | speckle[:grain[:step[:jitter]]]");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--drift", f.drift, "none | linear:A | sinusoidal:A[:P] | step:A[:k1,k2] | random-walk:A");
    cmd->add_option("--noise-mean", f.noise_mean, "additive noise mean");
    cmd->add_option("--noise-std", f.noise_std, "additive noise stddev")->check(CLI::NonNegativeNumber);
    cmd->add_option("--noise-target", f.noise_target, "bucket | object-field");
}

void write_images(const std::vector<ReconImage>& images, const std::string& prefix, bool raw) {
    if (images.size() == 1) {
        io::export_image(images[0], fs::path(prefix + ".pgm"));
        if (raw) io::export_raw(images[0], fs::path(prefix + ".f64"));
        return;
    }
    const char* suffix[] = {"_pos", "_neg"};
    for (std::size_t i = 0; i < 2; ++i) {
        io::export_image(images[i], fs::path(prefix + suffix[i] + ".pgm"));
        if (raw) io::export_raw(images[i], fs::path(prefix + suffix[i] + ".f64"));
    }
}

std::optional<double> image_cnr(const ReconResult& r, const std::optional<ObjectMask>& mask) {
    if (!mask) return std::nullopt;
    return cnr(r.positive(), *mask).cnr;
}

// drift kind and noise mean recorded by the simulator, if any
std::pair<std::string, std::optional<double>> provenance_fields(const DatasetHeader& header) {
    const json doc = json::parse(header.provenance, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return {"unknown", std::nullopt};
    std::string drift = "unknown";
    std::optional<double> noise;
    if (doc.contains("drift") && doc["drift"].contains("kind")) drift = doc["drift"]["kind"].get<std::string>();
    if (doc.contains("noise") && doc["noise"].contains("mean")) noise = doc["noise"]["mean"].get<double>();
    return {drift, noise};
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const SimFlags& f, const std::string& out) {
    const auto config = f.config();
    const auto scene = load_scene(f.scene, f.size, f.size);
    Simulation sim(scene, config);
    DatasetHeader header = sim.header();
    json prov = json::parse(header.provenance);
    prov["flags"] = f.to_json();
    header.provenance = prov.dump();
    Relabeled labeled(sim, header);
    io::write_dataset(labeled, fs::path(out));
    std::cout << "wrote " << out << ": " << header.width << "x" << header.height << " x " << header.n
              << " records, pattern " << to_string(config.pattern.kind) << ", drift "
              << to_string(config.drift.kind) << ", seed " << config.seed << ", " << fs::file_size(out)
              << " bytes\n";
    return kOk;
}

// ---------------------------------------------------------------- reconstruct

struct ReconFlags {
    std::string method;
    std::string in;
    std::size_t shift = 1;
    bool close_loop = false;
    std::size_t limit = 0;
    std::size_t progressive = 0;
    std::string out;
    std::string scene;
    std::string manifest;
    bool timing = false;
    bool raw = false;
};

int cmd_reconstruct(const ReconFlags& f) {
    const ReconOptions options{parse_method(f.method), f.shift, f.close_loop};
    if (f.progressive > 0 && !is_sgi(options.method)) {
        throw Error(Errc::invalid_argument, "--progressive only applies to SGI methods");
    }
    io::GidReader reader{fs::path(f.in)};
    const auto& header = reader.header();
    const std::size_t n = f.limit > 0 ? std::min(f.limit, header.n) : header.n;
    validate_options(options, n);

    std::optional<ObjectMask> mask;
    if (!f.scene.empty()) {
        const auto scene = load_scene(f.scene, header.width, header.height);
        if (scene.width() != header.width || scene.height() != header.height) {
            throw Error(Errc::shape_mismatch, "scene is " + std::to_string(scene.width()) + "x" +
                                                  std::to_string(scene.height()) + ", dataset is " +
                                                  std::to_string(header.width) + "x" +
                                                  std::to_string(header.height));
        }
        mask = mask_from_scene(scene);
    }

    Progress progress;
    if (f.progressive > 0) {
        progress.every = f.progressive;
        progress.callback = [&](std::size_t seen, const std::vector<ReconImage>& images) {
            write_images(images, f.out + "_snap" + std::to_string(seen), false);
            std::cout << "snapshot at " << seen << " records\n";
        };
    }

    PrefixSource source(reader, n);
    const auto start = std::chrono::steady_clock::now();
    const auto result = reconstruct(source, options, progress);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    write_images(result.images, f.out, f.raw);
    const auto score = image_cnr(result, mask);
    std::cout << to_string(options.method) << ": " << n << " records";
    if (is_sgi(options.method)) std::cout << ", " << result.count << " pairs";
    if (score) std::cout << ", cnr " << io::format_number(*score);
    std::cout << "\n";

    if (!f.manifest.empty()) {
        const auto [drift, noise] = provenance_fields(header);
        io::ManifestRow row{to_string(options.method), n, options.shift, drift, noise, score,
                            is_sgi(options.method) ? result.count : 0, std::nullopt};
        if (f.timing) row.wall_time_ms = ms;
        io::append_manifest_row(row, fs::path(f.manifest));
    }
    return kOk;
}

// ---------------------------------------------------------------- sweep

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !std::isfinite(v)) throw Error(Errc::invalid_argument, "not a number: '" + text + "'");
    return v;
}

// "a,b,c" or "start:stop:step" (inclusive)
std::vector<std::string> expand_values(const std::string& axis, const std::string& text) {
    if (axis == "drift-kind") return split(text, ',');
    const auto range = split(text, ':');
    if (range.size() == 3 && text.find(',') == std::string::npos) {
        const double a = parse_double(range[0]), b = parse_double(range[1]), step = parse_double(range[2]);
        if (step <= 0.0 || b < a) throw Error(Errc::invalid_argument, "bad range '" + text + "'");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        std::vector<std::string> out;
        for (std::size_t i = 0; i < count; ++i) {
            // round away step accumulation error
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g", a + static_cast<double>(i) * step);
            const double v = std::stod(buf);
            out.push_back(axis == "n" ? std::to_string(std::llround(v)) : io::format_number(v));
        }
        return out;
    }
    return split(text, ',');
}

std::size_t parse_count(const std::string& text) {
    const double v = parse_double(text);
    if (v < 1.0 || v != std::floor(v)) throw Error(Errc::invalid_argument, "n must be a positive integer, got '" + text + "'");
    return static_cast<std::size_t>(v);
}

struct SweepFlags {
    std::string axis;
    std::string values;
    std::string methods = "dgi,sgi1";
    std::size_t repeats = 1;
    std::size_t shift = 1;
    bool close_loop = false;
    std::string out;
    bool timing = false;
};

int cmd_sweep(const SimFlags& sim, const SweepFlags& f) {
    const auto values = expand_values(f.axis, f.values);
    const auto method_names = split(f.methods, ',');
    if (values.empty()) throw Error(Errc::invalid_argument, "empty sweep set");
    if (method_names.empty()) throw Error(Errc::invalid_argument, "no methods given");

    std::vector<ReconOptions> methods;
    for (const auto& m : method_names) {
        const auto method = parse_method(m);
        methods.push_back({method, is_sgi(method) ? f.shift : 1, is_sgi(method) && f.close_loop});
    }

    // Resolve every point before any work so bad values fail fast.
    struct Point {
        std::string value;
        SimulationConfig config;
        std::size_t n;
    };
    std::vector<Point> points;
    for (const auto& v : values) {
        SimFlags point = sim;
        if (f.axis == "n") point.n = parse_count(v);
        else if (f.axis == "noise-mean") point.noise_mean = parse_double(v);
        else point.drift = v;
        if (point.n == 0) throw Error(Errc::invalid_argument, "--n is required unless sweeping n");
        points.push_back({v, point.config(), point.n});
        for (const auto& opt : methods) validate_options(opt, point.n);
    }

    const auto scene = load_scene(sim.scene, sim.size, sim.size);
    const auto mask = mask_from_scene(scene);
    std::size_t max_n = 0;
    for (const auto& p : points) max_n = std::max(max_n, p.n);

    std::vector<io::ManifestRow> rows;
    for (std::size_t rep = 0; rep < f.repeats; ++rep) {
        // The n axis reuses prefixes of one max-length run per repeat.
        std::optional<Simulation> shared;
        if (f.axis == "n") {
            auto config = points.front().config;
            config.n = max_n;
            config.seed = sim.seed + rep;
            shared.emplace(scene, config);
        }
        for (const auto& p : points) {
            auto config = p.config;
            config.seed = sim.seed + rep;
            std::optional<Simulation> own;
            if (!shared) own.emplace(scene, config);
            RecordSource& base = shared ? static_cast<RecordSource&>(*shared) : *own;
            for (const auto& opt : methods) {
                PrefixSource source(base, p.n);
                const auto start = std::chrono::steady_clock::now();
                const auto result = reconstruct(source, opt);
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                io::ManifestRow row{to_string(opt.method),
                                    p.n,
                                    opt.shift,
                                    to_string(config.drift.kind),
                                    config.noise.mean,
                                    image_cnr(result, mask),
                                    is_sgi(opt.method) ? result.count : 0,
                                    std::nullopt};
                if (f.timing) row.wall_time_ms = ms;
                rows.push_back(row);
            }
        }
    }

    json settings = sim.to_json();
    settings["axis"] = f.axis;
    settings["values"] = values;
    settings["methods"] = method_names;
    settings["repeats"] = f.repeats;
    settings["shift"] = f.shift;
    settings["close_loop"] = f.close_loop;
    settings["seed_rule"] = "repeat r uses seed + r";
    io::write_manifest(rows, settings, fs::path(f.out));
    std::cout << "wrote " << rows.size() << " rows to " << f.out << "\n";
    return kOk;
}

// ---------------------------------------------------------------- diagnose

int cmd_diagnose(const std::string& in, std::size_t shift, const std::string& out) {
    io::GidReader reader{fs::path(in)};
    const auto diag = sr_diagnostics(reader, shift);
    const std::string csv = io::diagnostics_csv(diag);
    if (out.empty() || out == "-") std::cout << csv;
    else io::write_text(csv, fs::path(out));
    return kOk;
}

int exit_code(Errc code) {
    switch (code) {
    case Errc::invalid_argument:
    case Errc::shape_mismatch:
    case Errc::insufficient_data: return kUsage;
    default: return kRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ghost-imaging simulator and reconstructor"};
    app.require_subcommand(1);

    SimFlags sim_flags;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "simulate a measurement dataset");
    add_sim_flags(simulate, sim_flags, true);
    simulate->add_option("--out", sim_out, "output .gid path")->required();

    ReconFlags recon;
    auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct an image from a dataset");
    reconstruct->add_option("--method", recon.method, "g2 | dgi-delta | dgi | ci | sgi1 | sgi2 | sgi3")->required();
    reconstruct->add_option("--in", recon.in, "input .gid path")->required();
    reconstruct->add_option("--shift", recon.shift, "SGI record offset k")->check(kPositive);
    reconstruct->add_flag("--close-loop", recon.close_loop, "add the pair (first, last), k = 1 only");
    reconstruct->add_option("--limit", recon.limit, "use only the first M records")->check(kPositive);
    reconstruct->add_option("--progressive", recon.progressive, "SGI snapshot every E records")
        ->check(kPositive);
    reconstruct->add_option("--out", recon.out, "output prefix (.pgm, _pos/_neg.pgm)")->required();
    reconstruct->add_option("--scene", recon.scene, "ground truth for CNR (PGM or built-in)");
    reconstruct->add_option("--manifest", recon.manifest, "append a manifest row to this CSV");
    reconstruct->add_flag("--timing", recon.timing, "record wall time in the manifest");
    reconstruct->add_flag("--raw", recon.raw, "also write float64 images (.f64)");

    SimFlags sweep_sim;
    SweepFlags sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "CNR over a swept parameter");
    add_sim_flags(sweep_cmd, sweep_sim, false);
    sweep_cmd->add_option("--axis", sweep.axis, "n | noise-mean | drift-kind")
        ->required()
        ->check(CLI::IsMember({"n", "noise-mean", "drift-kind"}));
    sweep_cmd->add_option("--values", sweep.values, "comma list or start:stop:step")->required();
    sweep_cmd->add_option("--methods", sweep.methods, "comma list of methods");
    sweep_cmd->add_option("--repeats", sweep.repeats, "seeds per point (seed, seed+1, ...)")
        ->check(kPositive);
    sweep_cmd->add_option("--shift", sweep.shift, "SGI record offset k")->check(kPositive);
    sweep_cmd->add_flag("--close-loop", sweep.close_loop, "close the SGI loop");
    sweep_cmd->add_option("--out", sweep.out, "manifest CSV (JSON sidecar alongside)")->required();
    sweep_cmd->add_flag("--timing", sweep.timing, "record wall time");

    std::string diag_in, diag_out;
    std::size_t diag_shift = 1;
    auto* diagnose = app.add_subcommand("diagnose", "S_R and successive-deviation series as CSV");
    diagnose->add_option("--in", diag_in, "input .gid path")->required();
    diagnose->add_option("--shift", diag_shift, "deviation offset k")->check(kPositive);
    diagnose->add_option("--out", diag_out, "output CSV (stdout if omitted)");

    std::string scene_name, scene_out;
    std::size_t scene_size = 32;
    auto* scene_cmd = app.add_subcommand("scene", "export a built-in scene as PGM");
    scene_cmd->add_option("--name", scene_name, "gi | disk")->required();
    scene_cmd->add_option("--size", scene_size, "edge length")->check(kPositive);
    scene_cmd->add_option("--out", scene_out, "output .pgm path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_flags, sim_out);
        if (reconstruct->parsed()) return cmd_reconstruct(recon);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_sim, sweep);
        if (diagnose->parsed()) return cmd_diagnose(diag_in, diag_shift, diag_out);
        if (scene_cmd->parsed()) {
            io::export_scene(builtin_scene(scene_name, scene_size, scene_size), fs::path(scene_out));
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
