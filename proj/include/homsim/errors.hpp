#pragma once

#include <stdexcept>
#include <string>

namespace homsim {

// Two wavepackets/densities were combined while living on different grids.
class GridMismatchError : public std::invalid_argument {
public:
    explicit GridMismatchError(const std::string& what)
        : std::invalid_argument(what) {}
};

// A pulse was requested whose support is clipped by the grid boundaries.
class SupportExceedsGridError : public std::invalid_argument {
public:
    explicit SupportExceedsGridError(const std::string& what)
        : std::invalid_argument(what) {}
};

// Raised by tag-stream ingestion; carries the byte offset (binary) or line
// number (CSV) of the offending record so callers can point at the input.
class TagParseError : public std::runtime_error {
public:
    TagParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at input position " +
                             std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

} // namespace homsim
