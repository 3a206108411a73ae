#pragma once

#include <stdexcept>
#include <string>

namespace regkit {

// Raised when conditioning on a subset that carries zero probability mass.
struct empty_conditioning_error : std::runtime_error {
    explicit empty_conditioning_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an operation needs both classes of a boolean target to be
// populated (conditional mean strictly between 0 and 1) and one is empty.
struct degenerate_class_error : std::runtime_error {
    explicit degenerate_class_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a glue step finds no piece surviving the size/balance filter.
struct no_good_pieces_error : std::runtime_error {
    explicit no_good_pieces_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised for malformed configs and instance requests outside the size guards.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an internal invariant that the builders are supposed to
// maintain (potential decrease, normalization) fails. Indicates a bug,
// not bad input.
struct internal_invariant_error : std::logic_error {
    explicit internal_invariant_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace regkit
