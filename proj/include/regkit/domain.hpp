#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "regkit/errors.hpp"

namespace regkit {

// Everything in this project runs on explicit finite domains: elements are
// indices 0..n-1, distributions are mass vectors, functions are value
// tables. All expectations are exact sums, never sampled estimates.

// Tolerance for checks that involve accumulated sums (normalization,
// recomputed statistics).
inline constexpr double kSumTol = 1e-9;
// Tolerance for algebraic identities that should agree to rounding error.
inline constexpr double kIdTol = 1e-12;

// A finite domain. When the elements are bit strings, `bits` records the
// width and size == 2^bits; bit i of element x is (x >> i) & 1, so "the
// first bit" of x means bit 0.
struct Domain {
    std::size_t size = 0;
    int bits = -1;  // -1 when the domain has no bit structure

    static Domain indexed(std::size_t n) { return Domain{n, -1}; }
    static Domain bitstrings(int bits_) {
        return Domain{std::size_t{1} << bits_, bits_};
    }
};

// A probability distribution as an explicit mass vector: every entry is
// >= 0 and the entries sum to 1 within kSumTol. Construct through
// make_dist, which validates and normalizes.
struct Dist {
    std::vector<double> mass;

    std::size_t size() const { return mass.size(); }
    double operator[](std::size_t i) const { return mass[i]; }
};

// A function from the domain into [0, 1]. `boolean` records whether every
// value is exactly 0 or 1. Fractional tables are read as per-element
// Bernoulli parameters whenever a boolean sample is needed, so a table g
// and "the randomized function with Pr[1] = g(x)" are the same object here.
struct BoundedFn {
    std::vector<double> values;
    bool boolean = false;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

// Validates range and derives the boolean tag.
BoundedFn make_fn(std::vector<double> values);

// Normalizes a non-negative weight vector into a Dist. Throws
// std::invalid_argument on negative, non-finite, or all-zero input.
Dist make_dist(std::vector<double> weights);

Dist uniform_dist(std::size_t n);

// d conditioned on {x : keep[x] != 0}. The result keeps full length with
// zeros outside the kept set. Throws empty_conditioning_error if the kept
// set has zero mass.
Dist conditional(const Dist& d, const std::vector<std::uint8_t>& keep);

// d conditioned on piece `piece` of the assignment vector.
Dist conditional(const Dist& d, const std::vector<int>& assign, int piece);

// Exact expectation of a value table under d.
double expect(const Dist& d, const std::vector<double>& values);
double expect(const Dist& d, const BoundedFn& f);

double total_mass(const std::vector<double>& weights);

}  // namespace regkit
