#pragma once

#include <stdexcept>
#include <string>

namespace gisim {

enum class Errc {
    invalid_argument,   // bad parameters or violated type invariant
    shape_mismatch,     // frame/scene/mask dimensions disagree
    insufficient_data,  // too few records for the requested estimator
    degenerate,         // a division or partition has no defined value
    format,             // malformed container or image file
    io,                 // filesystem failure
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace gisim
