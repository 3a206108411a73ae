#pragma once

#include <vector>

#include "regkit/domain.hpp"
#include "regkit/family.hpp"
#include "regkit/partition.hpp"

namespace regkit {

// A predictor is a [0,1]-valued table whose level sets (maximal sets of
// equal value) double as a partition of the domain.
struct Predictor {
    std::vector<double> table;
    std::vector<double> level_values;  // distinct values, ascending
    Ledger ledger;

    std::size_t size() const { return table.size(); }
};

Predictor make_predictor(std::vector<double> table);

// |E_d[f (g - h)]|, the multiaccuracy violation of h against one
// distinguisher.
double ma_violation(const BoundedFn& f, const BoundedFn& g,
                    const std::vector<double>& h, const Dist& d);

// Worst violation over a family; argmax index returned through `which`.
double ma_violation_max(const Family& F, const BoundedFn& g,
                        const std::vector<double>& h, const Dist& d,
                        std::size_t* which = nullptr);

struct MaResult {
    Predictor h;
    bool converged = false;
    int iterations = 0;          // corrections applied
    double residual = 0.0;       // worst violation at stop
    double min_step_decrease = 0.0;  // smallest potential drop per correction
};

// Multiaccuracy by iterated correction: start from the constant E_d[g],
// and while some member has violation above eps, add +-eps times that
// member and clip to [0,1]. Every correction lowers the squared-error
// potential sum_x d(x) (g-h)^2 by at least eps^2 (asserted), which gives
// the iteration bound; the cap of 4*ceil(1/eps^2) corrections is pure
// safety margin and hitting it returns converged = false with the
// residual violation, never a silent pass.
MaResult build_multiaccurate(const Family& F, const BoundedFn& g, const Dist& d,
                             double eps);

// Multicalibration-on-average error of h: for each distinguisher, sum
// over level sets of (level mass) * |conditional violation|, then max
// over the family.
double mcoa_error(const Family& F, const BoundedFn& g,
                  const Predictor& h, const Dist& d);

// Same correction scheme as build_multiaccurate but localized to level
// sets. A pair (level set, f) triggers when its mass-weighted conditional
// violation exceeds eps / k, k being the current number of level sets;
// stopping therefore bounds every per-distinguisher aggregate by eps.
// The correction magnitude is the measured conditional violation and the
// corrected level's value is re-centered on its conditional mean, both of
// which can only lower the potential further.
MaResult build_mcoa(const Family& F, const BoundedFn& g, const Dist& d, double eps);

// Value grid {0, lam/2, 3*lam/2, 5*lam/2, ..., n*lam/2, 1} with n the
// largest odd integer below 2/lam. Consecutive points are at most lam
// apart, so rounding moves a value by at most lam/2.
std::vector<double> lambda_grid(double lam);

// Nearest grid point; exact midpoints round up.
double round_to_grid(double x, const std::vector<double>& grid);

Predictor lambda_discretize(const Predictor& h, double lam);

// Exhaustive certificate for an approximately multicalibrated partition:
// the full (piece, f) violation matrix |E_{d|P}[f (g - v_P)]| with
// v_P = E_{d|P}[g], a pass verdict over the pieces of mass at least
// gamma, and the sub-gamma pieces that the definition exempts.
struct McReport {
    double epsilon = 0.0;
    double gamma = 0.0;
    int k = 0;
    std::vector<std::vector<double>> violations;  // k rows, |F| columns
    double max_violation = 0.0;                   // over checked pieces
    std::vector<int> checked;                     // pieces with eta >= gamma
    std::vector<int> skipped;                     // pieces below gamma
    int iterations = 0;                           // builder corrections
    bool passed = false;
};

// Recomputes everything from scratch with plain accumulation loops. This
// function is the acceptance gate for partitions and deliberately shares
// no expectation helper with the builders; a builder bug cannot hide here.
McReport verify_approx_mc(const Partition& p, const Family& F,
                          const BoundedFn& g, const Dist& d,
                          double eps, double gamma);

struct McBuildResult {
    Partition part;
    Predictor h;  // piecewise table, each piece at its conditional mean
    McReport report;
    bool converged = false;
    int corrections = 0;
    double min_step_decrease = 0.0;
    double threshold = 0.0;  // weighted violation trigger used internally
    double lambda = 0.0;
};

// Approximately multicalibrated partition with at most 4/eps + 2 pieces:
// run level-set corrections at fixed weighted trigger eps*gamma/2, round
// the quiet predictor onto the lambda grid with lam = eps/2, re-center
// merged pieces on their conditional means, and repeat until the rounded
// predictor itself is quiet. Quiet at trigger theta makes every piece of
// mass >= gamma violate by at most theta/gamma = eps/2, so certification
// at eps carries slack. The emitted report comes from verify_approx_mc.
McBuildResult build_approx_mc_partition(const Family& F, const BoundedFn& g,
                                        const Dist& d, double eps, double gamma);

double potential(const BoundedFn& g, const std::vector<double>& h, const Dist& d);

}  // namespace regkit
