#pragma once

#include <cstdint>

namespace regkit {

// Descriptive cost counters carried by families, predictors, and
// partitions, standing in for the circuit-size bookkeeping of the
// theory being reproduced. Nothing is enforced between the fields.
//   oracle_calls  passes that read every member table of a family once
//   post_ops      elementwise arithmetic steps spent in updates and scans
//   pieces        partition pieces (or members added, for families)
struct Ledger {
    std::uint64_t oracle_calls = 0;
    std::uint64_t post_ops = 0;
    std::uint64_t pieces = 0;

    void absorb(const Ledger& other) {
        oracle_calls += other.oracle_calls;
        post_ops += other.post_ops;
        pieces += other.pieces;
    }
};

}  // namespace regkit
