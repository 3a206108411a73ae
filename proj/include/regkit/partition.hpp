#pragma once

#include <vector>

#include "regkit/domain.hpp"
#include "regkit/family.hpp"
#include "regkit/ledger.hpp"
#include "regkit/rng.hpp"

namespace regkit {

// Per piece summary against a target g and distribution d:
//   v    conditional mean of g on the piece
//   b    min(v, 1 - v), how balanced the piece is, always <= 1/2
//   eta  probability mass of the piece under d
//   m    most likely outcome mass of the piece Bernoulli, max(v, 1 - v)
// Zero-mass pieces are flagged degenerate and their v, b, m are set to 0;
// nothing downstream may divide by a degenerate piece's statistics.
struct PieceStats {
    double v = 0.0;
    double b = 0.0;
    double eta = 0.0;
    double m = 0.0;
    bool degenerate = false;
};

struct Partition {
    std::vector<int> assign;  // assign[x] in [0, k)
    int k = 0;
    std::vector<PieceStats> stats;
    Ledger ledger;

    std::size_t domain_size() const { return assign.size(); }
};

Partition make_partition(std::vector<int> assign, int k);

// Computes all piece statistics exactly. For every non-degenerate piece
// the identities b = min(v, 1-v), m = 1 - b, and b/2 <= v(1-v) <= b hold.
std::vector<PieceStats> piece_stats(const Partition& p, const BoundedFn& g, const Dist& d);

void fill_stats(Partition& p, const BoundedFn& g, const Dist& d);

// Draws a piece index with probability eta_P (the piece distribution
// induced by d). Requires stats to be filled.
int piece_sampler(const Partition& p, Rng& rng);

// Mass of piece `piece` under d.
double piece_mass(const Partition& p, const Dist& d, int piece);

}  // namespace regkit
