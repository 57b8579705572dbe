#include "gisim/source.hpp"

#include <algorithm>

namespace gisim {

PrefixSource::PrefixSource(RecordSource& inner, std::size_t limit)
    : inner_(inner), header_(inner.header()) {
    header_.n = std::min(limit, header_.n);
}

const MeasurementRecord* PrefixSource::next() {
    if (served_ >= header_.n) return nullptr;
    const auto* rec = inner_.next();
    if (rec) ++served_;
    return rec;
}

void PrefixSource::rewind() {
    inner_.rewind();
    served_ = 0;
}

Dataset collect(RecordSource& source) {
    Dataset out;
    out.header = source.header();
    out.records.reserve(out.header.n);
    while (const auto* rec = source.next()) out.records.push_back(*rec);
    out.header.n = out.records.size();
    return out;
}

}  // namespace gisim
