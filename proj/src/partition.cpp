#include "regkit/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace regkit {

Partition make_partition(std::vector<int> assign, int k) {
    if (k <= 0) throw std::invalid_argument("piece count must be positive");
    for (int a : assign) {
        if (a < 0 || a >= k) throw std::invalid_argument("assignment outside [0,k)");
    }
    Partition p;
    p.assign = std::move(assign);
    p.k = k;
    p.ledger.pieces = static_cast<std::uint64_t>(k);
    return p;
}

std::vector<PieceStats> piece_stats(const Partition& p, const BoundedFn& g, const Dist& d) {
    if (g.size() != p.domain_size() || d.size() != p.domain_size()) {
        throw std::invalid_argument("domain size mismatch");
    }
    std::vector<double> mass(p.k, 0.0);
    std::vector<double> gmass(p.k, 0.0);
    for (std::size_t x = 0; x < d.size(); ++x) {
        mass[p.assign[x]] += d[x];
        gmass[p.assign[x]] += d[x] * g[x];
    }
    std::vector<PieceStats> stats(p.k);
    for (int i = 0; i < p.k; ++i) {
        PieceStats& s = stats[i];
        s.eta = mass[i];
        if (mass[i] <= 0.0) {
            s.degenerate = true;
            continue;
        }
        s.v = gmass[i] / mass[i];
        // Guard against rounding pushing v a hair outside [0,1].
        s.v = std::min(1.0, std::max(0.0, s.v));
        s.b = std::min(s.v, 1.0 - s.v);
        s.m = 1.0 - s.b;
    }
    return stats;
}

void fill_stats(Partition& p, const BoundedFn& g, const Dist& d) {
    p.stats = piece_stats(p, g, d);
}

int piece_sampler(const Partition& p, Rng& rng) {
    if (p.stats.empty()) throw std::invalid_argument("stats not filled");
    double u = rng.next_double();
    double acc = 0.0;
    for (int i = 0; i < p.k; ++i) {
        acc += p.stats[i].eta;
        if (u < acc) return i;
    }
    // Rounding left a sliver at the top; return the last non-degenerate piece.
    for (int i = p.k - 1; i >= 0; --i) {
        if (!p.stats[i].degenerate) return i;
    }
    throw std::invalid_argument("all pieces degenerate");
}

double piece_mass(const Partition& p, const Dist& d, int piece) {
    double s = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) {
        if (p.assign[x] == piece) s += d[x];
    }
    return s;
}

}  // namespace regkit
