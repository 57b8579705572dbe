#include "gisim/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "gisim/error.hpp"
#include "gisim/metrics.hpp"

namespace gisim::io {

namespace {

void put_u32(unsigned char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
    return out;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(Errc::io, "write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string diagnostics_csv(const SrDiagnostics& diag) {
    std::string out = "i,s_r,deviation\n";
    for (std::size_t i = 0; i < diag.totals.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_number(diag.totals[i]);
        out += ',';
        if (i < diag.deviations.size()) out += format_number(diag.deviations[i]);
        out += '\n';
    }
    return out;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << text;
    check_written(out, path);
}

std::size_t record_bytes(std::size_t width, std::size_t height) noexcept {
    return 8 + 4 * width * height;
}

std::string header_json(const DatasetHeader& header) {
    nlohmann::json doc = {
        {"schema", "gid"},
        {"version", kSchemaVersion},
        {"width", header.width},
        {"height", header.height},
        {"n", header.n},
        {"seed", header.seed ? nlohmann::json(*header.seed) : nlohmann::json(nullptr)},
        {"provenance", header.provenance},
    };
    return doc.dump();
}

GidWriter::GidWriter(std::ostream& out, const DatasetHeader& header)
    : out_(out), header_(header), buffer_(record_bytes(header.width, header.height)) {
    if (header_.width == 0 || header_.height == 0 || header_.n == 0) {
        throw Error(Errc::invalid_argument, "container: header needs positive width, height and n");
    }
    const std::string json = header_json(header_);
    unsigned char len[4];
    put_u32(len, static_cast<std::uint32_t>(json.size()));
    out_.write(kMagic, 4);
    out_.write(reinterpret_cast<const char*>(len), 4);
    out_.write(json.data(), static_cast<std::streamsize>(json.size()));
    if (!out_) throw Error(Errc::io, "container: header write failed");
}

void GidWriter::append(const MeasurementRecord& record) {
    if (written_ >= header_.n) throw Error(Errc::invalid_argument, "container: more records than header n");
    if (record.frame.width() != header_.width || record.frame.height() != header_.height) {
        throw Error(Errc::shape_mismatch, "container: record " + std::to_string(written_) +
                                              " does not match header dimensions");
    }
    if (!std::isfinite(record.bucket)) {
        throw Error(Errc::invalid_argument, "container: non-finite bucket at " + std::to_string(written_));
    }
    unsigned char* p = buffer_.data();
    put_u64(p, std::bit_cast<std::uint64_t>(record.bucket));
    p += 8;
    for (double v : record.frame.data()) {
        const auto f = static_cast<float>(v);
        if (!std::isfinite(f)) {
            throw Error(Errc::invalid_argument, "container: pixel overflows float32 at record " +
                                                    std::to_string(written_));
        }
        put_u32(p, std::bit_cast<std::uint32_t>(f));
        p += 4;
    }
    out_.write(reinterpret_cast<const char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) throw Error(Errc::io, "container: payload write failed");
    ++written_;
}

void GidWriter::finish() {
    if (written_ != header_.n) {
        throw Error(Errc::invalid_argument, "container: header promises " + std::to_string(header_.n) +
                                                " records, wrote " + std::to_string(written_));
    }
    out_.flush();
    if (!out_) throw Error(Errc::io, "container: flush failed");
}

GidReader::GidReader(const std::filesystem::path& path)
    : owned_(std::make_unique<std::ifstream>(path, std::ios::binary)), in_(owned_.get()) {
    if (!*owned_) throw Error(Errc::io, "cannot open '" + path.string() + "'");
    open();
}

GidReader::GidReader(std::istream& in) : in_(&in) { open(); }

void GidReader::open() {
    auto& in = *in_;
    in.seekg(0, std::ios::end);
    const std::streamoff file_size = in.tellg();
    in.seekg(0, std::ios::beg);

    unsigned char prefix[8];
    if (file_size < 8 || !in.read(reinterpret_cast<char*>(prefix), 8)) {
        throw Error(Errc::format, "container: file too short for magic and header length");
    }
    if (std::memcmp(prefix, kMagic, 4) != 0) {
        throw Error(Errc::format, "container: bad magic '" +
                                      std::string(reinterpret_cast<const char*>(prefix), 4) +
                                      "' (expected 'GID1')");
    }
    const std::uint32_t json_len = get_u32(prefix + 4);
    if (static_cast<std::streamoff>(json_len) > file_size - 8) {
        throw Error(Errc::format, "container: header length exceeds file size");
    }
    std::string text(json_len, '\0');
    in.read(text.data(), json_len);

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
        if (doc.value("schema", std::string{}) != "gid") {
            throw Error(Errc::format, "container: header schema is not 'gid'");
        }
        const int version = doc.at("version").get<int>();
        if (version != kSchemaVersion) {
            throw Error(Errc::format, "container: version " + std::to_string(version) +
                                          " unsupported (expected " + std::to_string(kSchemaVersion) + ")");
        }
        header_.width = doc.at("width").get<std::size_t>();
        header_.height = doc.at("height").get<std::size_t>();
        header_.n = doc.at("n").get<std::size_t>();
        if (!doc.at("seed").is_null()) header_.seed = doc.at("seed").get<std::uint64_t>();
        header_.provenance = doc.at("provenance").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::format, std::string("container: malformed header: ") + e.what());
    }
    if (header_.width == 0 || header_.height == 0 || header_.n == 0) {
        throw Error(Errc::format, "container: header has zero width, height or n");
    }

    payload_start_ = 8 + static_cast<std::streamoff>(json_len);
    const auto expected = static_cast<std::streamoff>(header_.n * record_bytes(header_.width, header_.height));
    const std::streamoff actual = file_size - payload_start_;
    if (actual != expected) {
        throw Error(Errc::format, std::string("container: ") + (actual < expected ? "truncated" : "oversized") +
                                      " payload, expected " + std::to_string(expected) +
                                      " bytes, found " + std::to_string(actual));
    }
    buffer_.resize(record_bytes(header_.width, header_.height));
    rewind();
}

void GidReader::rewind() {
    in_->clear();
    in_->seekg(payload_start_, std::ios::beg);
    cursor_ = 0;
    current_.reset();
}

const MeasurementRecord* GidReader::next() {
    if (cursor_ >= header_.n) return nullptr;
    if (!in_->read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()))) {
        throw Error(Errc::format, "container: payload ended early at record " + std::to_string(cursor_));
    }
    const unsigned char* p = buffer_.data();
    const double bucket = std::bit_cast<double>(get_u64(p));
    p += 8;
    if (!std::isfinite(bucket)) {
        throw Error(Errc::format, "container: NaN or infinite bucket at record " + std::to_string(cursor_));
    }
    std::vector<double> pixels(header_.width * header_.height);
    for (double& v : pixels) {
        const float f = std::bit_cast<float>(get_u32(p));
        p += 4;
        if (!std::isfinite(f)) {
            throw Error(Errc::format, "container: NaN or infinite pixel at record " + std::to_string(cursor_));
        }
        v = f;
    }
    try {
        current_.emplace(MeasurementRecord{cursor_, Frame(header_.width, header_.height, std::move(pixels)), bucket});
    } catch (const Error& e) {
        throw Error(Errc::format, "container: record " + std::to_string(cursor_) + ": " + e.what());
    }
    ++cursor_;
    return &*current_;
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
    require_valid(dataset);
    GidWriter writer(out, dataset.header);
    for (const auto& r : dataset.records) writer.append(r);
    writer.finish();
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_dataset(dataset, out);
    check_written(out, path);
}

void write_dataset(RecordSource& source, const std::filesystem::path& path) {
    auto out = open_out(path);
    source.rewind();
    GidWriter writer(out, source.header());
    while (const auto* rec = source.next()) writer.append(*rec);
    writer.finish();
    check_written(out, path);
}

Dataset read_dataset(std::istream& in) {
    GidReader reader(in);
    return collect(reader);
}

Dataset read_dataset(const std::filesystem::path& path) {
    GidReader reader(path);
    return collect(reader);
}

namespace {

// Next whitespace-delimited PNM header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            if (!token.empty()) break;
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token;
}

std::size_t pnm_number(std::istream& in, const char* what) {
    const std::string token = pnm_token(in);
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || end != token.data() + token.size()) {
        throw Error(Errc::format, std::string("pgm: bad ") + what + " '" + token + "'");
    }
    return v;
}

}  // namespace

ObjectScene import_scene(std::istream& in) {
    const std::string magic = pnm_token(in);
    if (magic != "P5" && magic != "P2") {
        throw Error(Errc::format, "pgm: unsupported format '" + magic + "' (need P5 or P2)");
    }
    const std::size_t width = pnm_number(in, "width");
    const std::size_t height = pnm_number(in, "height");
    const std::size_t maxval = pnm_number(in, "maxval");
    if (width == 0 || height == 0) throw Error(Errc::format, "pgm: zero-dimension image");
    if (maxval == 0 || maxval > 65535) throw Error(Errc::format, "pgm: maxval must be in 1..65535");

    std::vector<double> t(width * height);
    if (magic == "P5") {
        // pnm_token consumed exactly one whitespace byte after maxval.
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(t.size() * bytes_per);
        if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
            throw Error(Errc::format, "pgm: pixel data truncated");
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::size_t v = bytes_per == 2 ? (std::size_t{raw[2 * i]} << 8) | raw[2 * i + 1] : raw[i];
            if (v > maxval) throw Error(Errc::format, "pgm: pixel exceeds maxval");
            t[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    } else {
        for (double& v : t) {
            const std::size_t p = pnm_number(in, "pixel");
            if (p > maxval) throw Error(Errc::format, "pgm: pixel exceeds maxval");
            v = static_cast<double>(p) / static_cast<double>(maxval);
        }
    }
    return ObjectScene(width, height, std::move(t));
}

ObjectScene import_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
    return import_scene(in);
}

namespace {

void write_p5_16(std::ostream& out, std::size_t width, std::size_t height, std::span<const double> unit) {
    out << "P5\n" << width << " " << height << "\n65535\n";
    std::vector<unsigned char> raw(unit.size() * 2);
    for (std::size_t i = 0; i < unit.size(); ++i) {
        const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(unit[i], 0.0, 1.0) * 65535.0));
        raw[2 * i] = static_cast<unsigned char>(v >> 8);
        raw[2 * i + 1] = static_cast<unsigned char>(v & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace

void export_image(const ReconImage& image, std::ostream& out) {
    const auto unit = normalize_minmax(image);
    write_p5_16(out, unit.width(), unit.height(), unit.data());
}

void export_image(const ReconImage& image, const std::filesystem::path& path) {
    auto out = open_out(path);
    export_image(image, out);
    check_written(out, path);
}

void export_scene(const ObjectScene& scene, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_p5_16(out, scene.width(), scene.height(), scene.transmission());
    check_written(out, path);
}

void export_raw(const ReconImage& image, const std::filesystem::path& path) {
    auto out = open_out(path);
    unsigned char b[8];
    for (double v : image.data()) {
        put_u64(b, std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
    check_written(out, path);
}

const std::vector<std::string>& manifest_columns() {
    static const std::vector<std::string> columns = {
        "method", "n", "k", "drift_kind", "noise_mean", "cnr", "pair_count", "wall_time_ms"};
    return columns;
}

namespace {

std::string csv_header() {
    std::string line;
    for (const auto& c : manifest_columns()) {
        if (!line.empty()) line += ',';
        line += c;
    }
    return line + '\n';
}

std::string csv_line(const ManifestRow& r) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; };
    std::ostringstream line;
    line << r.method << ',' << r.n << ',' << r.shift << ',' << r.drift_kind << ',' << opt(r.noise_mean)
         << ',' << opt(r.cnr) << ',' << r.pair_count << ',' << opt(r.wall_time_ms) << '\n';
    return line.str();
}

}  // namespace

std::string manifest_csv(const std::vector<ManifestRow>& rows) {
    std::string out = csv_header();
    for (const auto& r : rows) out += csv_line(r);
    return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".json");
    if (p == csv_path) p += ".json";
    return p;
}

void write_manifest(const std::vector<ManifestRow>& rows, const nlohmann::json& settings,
                    const std::filesystem::path& csv_path) {
    {
        auto out = open_out(csv_path);
        out << manifest_csv(rows);
        check_written(out, csv_path);
    }
    const auto json_path = sidecar_path(csv_path);
    auto out = open_out(json_path);
    const nlohmann::json doc = {{"columns", manifest_columns()}, {"rows", rows.size()}, {"settings", settings}};
    out << doc.dump(2) << '\n';
    check_written(out, json_path);
}

void append_manifest_row(const ManifestRow& row, const std::filesystem::path& csv_path) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(csv_path, ec) || std::filesystem::file_size(csv_path, ec) == 0;
    std::ofstream out(csv_path, std::ios::binary | std::ios::app);
    if (!out) throw Error(Errc::io, "cannot open '" + csv_path.string() + "' for appending");
    if (fresh) out << csv_header();
    out << csv_line(row);
    check_written(out, csv_path);
}

}  // namespace gisim::io
