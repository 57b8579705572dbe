#pragma once

#include <cstddef>

#include "gisim/types.hpp"

namespace gisim {

/// Sequential, rewindable stream of measurement records.
class RecordSource {
public:
    virtual ~RecordSource() = default;

    virtual const DatasetHeader& header() const = 0;

    /// Next record, or nullptr once exhausted. The pointee stays valid until
    /// the following call to next() or rewind().
    virtual const MeasurementRecord* next() = 0;

    virtual void rewind() = 0;
};

class DatasetSource final : public RecordSource {
public:
    explicit DatasetSource(const Dataset& dataset) : dataset_(dataset) {}

    const DatasetHeader& header() const override { return dataset_.header; }

    const MeasurementRecord* next() override {
        if (pos_ >= dataset_.records.size()) return nullptr;
        return &dataset_.records[pos_++];
    }

    void rewind() override { pos_ = 0; }

private:
    const Dataset& dataset_;
    std::size_t pos_ = 0;
};

/// Exposes only the first `limit` records of another source.
class PrefixSource final : public RecordSource {
public:
    PrefixSource(RecordSource& inner, std::size_t limit);

    const DatasetHeader& header() const override { return header_; }
    const MeasurementRecord* next() override;
    void rewind() override;

private:
    RecordSource& inner_;
    DatasetHeader header_;
    std::size_t served_ = 0;
};

/// Drains a source into an in-memory dataset.
Dataset collect(RecordSource& source);

}  // namespace gisim
