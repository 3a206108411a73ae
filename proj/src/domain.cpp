#include "regkit/domain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace regkit {

BoundedFn make_fn(std::vector<double> values) {
    bool boolean = true;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw std::invalid_argument("function value outside [0,1]: " + std::to_string(v));
        }
        if (v != 0.0 && v != 1.0) boolean = false;
    }
    return BoundedFn{std::move(values), boolean};
}

double total_mass(const std::vector<double>& weights) {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

Dist make_dist(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("empty weight vector");
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("weights must be finite and non-negative");
        }
    }
    double s = total_mass(weights);
    if (s <= 0.0) throw std::invalid_argument("weights sum to zero");
    if (std::abs(s - 1.0) > kSumTol) {
        for (double& w : weights) w /= s;
    }
    return Dist{std::move(weights)};
}

Dist uniform_dist(std::size_t n) {
    if (n == 0) throw std::invalid_argument("empty domain");
    return Dist{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

Dist conditional(const Dist& d, const std::vector<std::uint8_t>& keep) {
    if (keep.size() != d.size()) throw std::invalid_argument("mask length mismatch");
    std::vector<double> out(d.size(), 0.0);
    double s = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) {
        if (keep[x]) {
            out[x] = d[x];
            s += d[x];
        }
    }
    if (s <= 0.0) throw empty_conditioning_error("conditioning set has zero mass");
    for (double& w : out) w /= s;
    return Dist{std::move(out)};
}

Dist conditional(const Dist& d, const std::vector<int>& assign, int piece) {
    if (assign.size() != d.size()) throw std::invalid_argument("assignment length mismatch");
    std::vector<std::uint8_t> keep(d.size(), 0);
    for (std::size_t x = 0; x < d.size(); ++x) keep[x] = (assign[x] == piece) ? 1 : 0;
    return conditional(d, keep);
}

double expect(const Dist& d, const std::vector<double>& values) {
    if (values.size() != d.size()) throw std::invalid_argument("table length mismatch");
    double s = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) s += d[x] * values[x];
    return s;
}

double expect(const Dist& d, const BoundedFn& f) { return expect(d, f.values); }

}  // namespace regkit
