#pragma once

#include <stdexcept>
#include <string>

namespace rca {

// Raised when external input (files, records, configuration text) is
// malformed or inconsistent. Programming-contract violations use
// std::invalid_argument instead.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an iterative procedure produces non-finite values.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

} // namespace rca
