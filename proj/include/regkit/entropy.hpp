#pragma once

#include <string>
#include <vector>

#include "regkit/bernoulli.hpp"
#include "regkit/hardcore.hpp"
#include "regkit/mc.hpp"

namespace regkit {

// A joint law of (X, B) with X over the domain and B over L labels:
// marg is the law of X, cond row x is the law of B given X = x
// (row-major, rows sum to 1 within kSumTol).
struct JointDist {
    int L = 2;
    Dist marg;
    std::vector<double> cond;

    std::size_t size() const { return marg.size(); }
    double cond_at(std::size_t x, int y) const {
        return cond[x * static_cast<std::size_t>(L) + static_cast<std::size_t>(y)];
    }
    double row_max(std::size_t x) const {
        double m = 0.0;
        for (int y = 0; y < L; ++y) m = std::max(m, cond_at(x, y));
        return m;
    }
};

JointDist make_joint(int L, Dist marg, std::vector<double> cond);

// -log2 of the largest point mass.
double min_entropy(const Dist& d);

// Average min-entropy of B given X: -log2 E_x[max_y Pr[B=y|X=x]].
double avg_min_entropy(const JointDist& j);

// Success probability of the best label predictor. Built by materializing
// the row-argmax predictor and scoring it, then checked against
// 2^(-avg_min_entropy), which it must equal within kIdTol.
double predictability(const JointDist& j);

// Exhaustive certificate for a multiclass calibrated partition: for every
// piece of mass at least gamma, every family member f and every label y,
// |E_{x ~ marg|P}[f(x) (1[B=y](x) - v_Py)]| <= eps, where 1[B=y](x) means
// the conditional probability cond(x,y) and v_Py its piece average.
struct MulticlassReport {
    double epsilon = 0.0;
    double gamma = 0.0;
    int k = 0;
    int L = 2;
    // violations[piece][member * L + label]
    std::vector<std::vector<double>> violations;
    double max_violation = 0.0;
    std::vector<int> checked;
    std::vector<int> skipped;
    int iterations = 0;
    bool passed = false;
};

MulticlassReport verify_multiclass_mc(const Partition& p, const Family& F,
                                      const JointDist& j, double eps, double gamma);

struct MulticlassResult {
    Partition part;
    // rows[piece] is the piece's average conditional row, length L.
    std::vector<std::vector<double>> rows;
    std::vector<double> etas;  // piece masses under marg
    MulticlassReport report;
    bool converged = false;
    int corrections = 0;
    double min_step_decrease = 0.0;
};

// For two labels this delegates to the binary partition builder on the
// label-1 conditional (the label-0 inequalities are the same numbers).
// For more labels it runs the same correction loop jointly over the L
// label indicator targets, fixing the worst (piece, member, label)
// violation each round; pieces are level sets of the whole predicted
// row. No piece-count bound is claimed beyond the binary case.
MulticlassResult multiclass_mc_partition(const Family& F, const JointDist& j,
                                         double eps, double gamma);

// Per-piece constant-row witness: B looks, to the family, like a label
// drawn from the piece's average row, and the average min-entropy of
// that witness is exactly log2(1/m_P).
struct PameWitness {
    int piece = -1;
    bool degenerate = false;   // piece without mass
    bool qualifying = false;   // eta >= gamma
    std::vector<double> row;   // length L
    double eta = 0.0;
    double m = 0.0;            // max entry of row
    double k_claim = 0.0;      // log2(1/m)
    double eps_claim = 0.0;
    double measured_ame = 0.0;
    double measured_advantage = 0.0;
};

struct PamePpResult {
    MulticlassResult mc;
    Family induced;  // label slices of the product family, closed
    std::vector<PameWitness> witnesses;
    double eps = 0.0, gamma = 0.0, eps_label = 0.0;  // eps_label = eps / L
};

// Splits the product family into its label slices f_y(x) = f(x, y),
// closes them, builds the multiclass partition at per-label budget
// eps / L, and extracts one witness per piece. The per-piece advantage
// of any product member is then at most the sum of its L per-label
// violations, hence at most eps on certified pieces.
PamePpResult pame_pp(const LabeledFamily& Fprod, const JointDist& j,
                     double eps, double gamma);

struct GluedPame {
    JointDist witness;  // marg restricted to the good region, constant rows per piece
    std::vector<int> good_pieces;
    double good_mass = 0.0;
    double skipped_mass = 0.0;
    double glued_m = 0.0;  // sum over good pieces of eta' * m_P
    double measured_ame = 0.0;
    double measured_advantage = 0.0;
};

// Global witness over the pieces passing the filter (mass >= gamma and
// 1 - m_P >= tau). Throws no_good_pieces_error when none survive.
GluedPame glue_pame(const PamePpResult& pp, const JointDist& j,
                    const LabeledFamily& Fprod, const GoodPieceFilter& filter);

struct PameRecovery {
    bool ok = false;
    std::string message;
    double eps = 0.0, delta = 0.0;
    double eps_prime = 0.0, gamma = 0.0, tau = 0.0;
    double predictability_measured = 0.0;
    PamePpResult pp;
    GluedPame glued;
    double ame_floor = 0.0;  // log2(1/(1-delta))
    double c_ame = 0.0;      // measured constant in ame >= floor - c eps
    double c_advantage = 0.0;  // measured constant in advantage <= c eps
};

// End-to-end entropy recovery: delta is read off the measured
// predictability (1 - delta), the partition parameters follow the same
// eps' = eps^2 delta, gamma = eps eps', tau = eps delta scheme as the
// hardcore recovery, and the glued witness's entropy floor log2(1/(1-delta))
// is compared against the measurement.
PameRecovery recover_pame(const LabeledFamily& Fprod, const JointDist& j, double eps);

struct HardcoreWitness {
    JointDist witness;  // binary labels; rows mix a fair coin with g's value
    double rho = 0.0;   // measured density of H inside d
    double measured_ame = 0.0;
    double measured_advantage = 0.0;
};

// Turns a hardcore distribution into an entropy witness: at each point,
// predict a fair coin with probability lambda_x = rho * H(x)/d(x) and
// the true g(x) otherwise. When H is the conditional of d on a set this
// is exactly "uniform bit on the set, g off the set". Throws
// invalid_argument when H puts mass where d has none.
HardcoreWitness hardcore_to_pame_witness(const Dist& H, const BoundedFn& g,
                                         const Dist& d, const LabeledFamily& Fprod);

}  // namespace regkit
