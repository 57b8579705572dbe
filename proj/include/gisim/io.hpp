#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gisim/reconstruct.hpp"
#include "gisim/simulator.hpp"
#include "gisim/source.hpp"
#include "gisim/types.hpp"

namespace gisim::io {

// GID container layout (all integers little-endian):
//   "GID1" | u32 header length L | L bytes of UTF-8 JSON header | payload
// Payload: for each record, f64 bucket then width*height f32 pixels, row-major.
inline constexpr char kMagic[4] = {'G', 'I', 'D', '1'};
inline constexpr int kSchemaVersion = 1;

std::size_t record_bytes(std::size_t width, std::size_t height) noexcept;

std::string header_json(const DatasetHeader& header);

/// Single-writer streaming container writer; records must be appended in order.
class GidWriter {
public:
    GidWriter(std::ostream& out, const DatasetHeader& header);

    void append(const MeasurementRecord& record);
    /// Throws if fewer records than header.n were appended.
    void finish();

    std::size_t written() const noexcept { return written_; }

private:
    std::ostream& out_;
    DatasetHeader header_;
    std::size_t written_ = 0;
    std::vector<unsigned char> buffer_;
};

/// Validates magic, version and payload length up front, then streams records.
class GidReader final : public RecordSource {
public:
    explicit GidReader(const std::filesystem::path& path);
    explicit GidReader(std::istream& in);

    const DatasetHeader& header() const override { return header_; }
    const MeasurementRecord* next() override;
    void rewind() override;

private:
    void open();

    std::unique_ptr<std::ifstream> owned_;
    std::istream* in_;
    DatasetHeader header_;
    std::streamoff payload_start_ = 0;
    std::size_t cursor_ = 0;
    std::vector<unsigned char> buffer_;
    std::optional<MeasurementRecord> current_;
};

void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// Streams every record of `source` into a container file.
void write_dataset(RecordSource& source, const std::filesystem::path& path);

Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

/// Grayscale PGM (P5 8/16-bit, or P2) mapped onto [0, 1].
ObjectScene import_scene(std::istream& in);
ObjectScene import_scene(const std::filesystem::path& path);

/// 16-bit P5 of normalize_minmax(image); deterministic bytes.
void export_image(const ReconImage& image, std::ostream& out);
void export_image(const ReconImage& image, const std::filesystem::path& path);

/// Binary 16-bit P5 of a scene (T scaled to 0..65535).
void export_scene(const ObjectScene& scene, const std::filesystem::path& path);

/// Little-endian float64 dump of the raw (unnormalized) pixels.
void export_raw(const ReconImage& image, const std::filesystem::path& path);

struct ManifestRow {
    std::string method;
    std::size_t n = 0;
    std::size_t shift = 1;
    std::string drift_kind;
    std::optional<double> noise_mean;
    std::optional<double> cnr;
    std::size_t pair_count = 0;
    std::optional<double> wall_time_ms;
};

/// Column order of every manifest CSV.
const std::vector<std::string>& manifest_columns();

std::string manifest_csv(const std::vector<ManifestRow>& rows);

/// Writes `csv_path` and a JSON sidecar (same stem, .json) holding `settings`.
void write_manifest(const std::vector<ManifestRow>& rows, const nlohmann::json& settings,
                    const std::filesystem::path& csv_path);

/// Appends one row, writing the header first if the file is new or empty.
void append_manifest_row(const ManifestRow& row, const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Shortest decimal form that round-trips.
std::string format_number(double v);

/// Columns i, s_r, deviation; the deviation cell is empty for the last k rows.
std::string diagnostics_csv(const SrDiagnostics& diag);

void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace gisim::io
