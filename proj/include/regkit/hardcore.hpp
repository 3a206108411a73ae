#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regkit/bernoulli.hpp"
#include "regkit/mc.hpp"

namespace regkit {

// One piece of a calibrated partition together with its local hardcore
// distribution: the minority-boosting reweight of d restricted to the
// piece. density_claim says how much of the conditional distribution the
// hardcore ally occupies (2 b_P); eps_claim is the agreement slack above
// 1/2 implied by the piece's certified calibration error.
struct HardcorePiece {
    int piece = -1;
    bool degenerate = false;   // b_P = 0 or no mass: no minority to boost
    bool qualifying = false;   // eta_P >= gamma, so the certificate covers it
    Dist H;                    // full-length table, zero off the piece
    double density_claim = 0.0;      // 2 b_P
    double eps_claim = 0.0;          // eps / (2 b_P (1 - b_P))
    double agreement_measured = 0.0; // best agreement over F under H
    PieceStats stats;
};

struct IhclResult {
    McBuildResult mc;
    std::vector<HardcorePiece> pieces;  // one entry per partition piece
    double eps = 0.0, gamma = 0.0;
};

// Builds the calibrated partition and, on every piece with mass and a
// non-empty minority class, the boosted distribution on which the target
// looks like a fair coin to the family.
IhclResult ihcl_pp(const Family& F, const BoundedFn& g, const Dist& d,
                   double eps, double gamma);

// Residual-weighted distribution on a piece: mass proportional to
// |g(x) - v_P| over the piece's elements (no d weighting). Coincides
// with the minority boost when g is boolean and d is uniform on the
// piece. Throws degenerate_class_error when g is constant on the piece.
Dist ttv_residual_distribution(const BoundedFn& g, const Dist& d,
                               const Partition& p, int piece);

// Pieces kept by the glue steps: mass at least gamma and balance at
// least tau.
struct GoodPieceFilter {
    double gamma = 0.0;
    double tau = 0.0;
};

// The piecewise majority vote and the exact bookkeeping around it. The
// vote agrees with g with probability exactly 1 - E[b_P] (identity_gap
// records the measured difference, which should be rounding noise), so
// hardness of g forces pieces to stay balanced on average.
struct BalanceReport {
    double avg_b = 0.0;        // E over the piece distribution of b_P
    double avg_b_good = 0.0;   // same but only over pieces passing the filter
    double good_mass = 0.0;
    BoundedFn majority;
    double majority_agreement = 0.0;
    double identity_gap = 0.0;
    double measured_hardness = 0.0;  // hardness_of over F plus the vote
    bool bound_applies = false;      // measured_hardness >= delta
    double bound = 0.0;              // delta - gamma * k - tau
    bool bound_holds = false;
};

BalanceReport average_balance_check(const Partition& p, const BoundedFn& g,
                                    const Dist& d, const Family& F,
                                    const GoodPieceFilter& filter, double delta);

struct GluedHardcore {
    Dist H;
    std::vector<int> good_pieces;
    double good_mass = 0.0;
    double density_measured = 0.0;  // largest rho with rho * H <= d pointwise
    double agreement_measured = 0.0;
    bool rescaled = false;
    double rescale_tv = 0.0;  // total variation moved by the rescale
    double rescale_factor_lo = 1.0, rescale_factor_hi = 1.0;
};

// Mixes the per-piece hardcore distributions with weights proportional
// to piece mass over the filtered pieces. The optional target engages an
// iterative cap-and-renormalize that raises the measured density to the
// target, recording how much mass moved.
GluedHardcore glue_hardcore(const IhclResult& res, const Dist& d,
                            const GoodPieceFilter& filter,
                            std::optional<double> density_target = std::nullopt);

struct IhclRecovery {
    bool ok = false;
    std::string message;
    double eps = 0.0, delta = 0.0;
    double eps_prime = 0.0, gamma = 0.0, tau = 0.0;
    IhclResult inner;
    BalanceReport balance;
    GluedHardcore glued;
    double c_density = 0.0;   // measured constant in density >= 2 delta (1 - c eps)
    double c_hardness = 0.0;  // measured constant in agreement <= 1/2 + c eps
};

// Classical hardcore statement at chosen (eps, delta): derive the
// internal parameters eps' = eps^2 delta, gamma = eps * eps',
// tau = eps * delta, certify a partition at (eps', gamma), check that g
// really is delta-hard against F plus the majority vote (measured, not
// assumed), glue the per-piece distributions over the filtered pieces,
// and measure density and agreement of the result.
IhclRecovery recover_ihcl(const Family& F, const BoundedFn& g, const Dist& d,
                          double eps, double delta,
                          std::optional<double> density_target = std::nullopt);

struct SetSample {
    std::vector<int> members;
    double density = 0.0;        // |set| / |X|
    double density_claim = 0.0;  // expected density of the sampler
    double agreement = 0.0;      // best agreement over F on the uniform set
    double agreement_bound = 0.0;  // 1/2 + 4 * eps_claim
    bool size_condition_ok = false;  // log2|F| <= |X| * eps^2 * density^2
    int retries = 0;
};

// Rounds a hardcore distribution into a hardcore set under a uniform
// base distribution: include x independently with probability
// H(x)/max_y H(y), or with probability H(x) itself when raw_mass is set
// (the latter reads the masses as a measure and is only sensible when
// they are large). Resamples an empty set up to 16 times, then throws.
SetSample sample_hardcore_set(const Dist& H, const BoundedFn& g, const Dist& d,
                              const Family& F, double eps_claim,
                              std::uint64_t seed, bool raw_mass = false);

}  // namespace regkit
