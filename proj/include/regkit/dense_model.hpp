#pragma once

#include <string>
#include <vector>

#include "regkit/mc.hpp"

namespace regkit {

// A sample distribution and a reference distribution placed on the two
// blocks of a disjoint union: indices [0, ns) carry s, [ns, ns+nv) carry
// v. All stored vectors have full union length; g marks the s-block.
struct DmtInstance {
    std::size_t ns = 0;
    std::size_t nv = 0;
    Dist s;
    Dist v;
    Dist mixture;  // half s, half v
    BoundedFn g;   // indicator of the s-block

    std::size_t size() const { return ns + nv; }
};

DmtInstance make_dmt_instance(Dist s_block, Dist v_block);

// Worst one-sided margin max_f (delta E_s[f] - E_v[f])^+ over the family.
// Zero means s is delta-pseudo-dense in v as far as F can tell.
double pseudodensity_margin(const Dist& s, const Dist& v, const Family& F,
                            double delta, std::size_t* which = nullptr);

// Per-piece view of a calibrated partition of the union: on a piece with
// conditional s-fraction v_p, the s- and v-conditionals are mutually
// indistinguishable up to eps / (v_p (1 - v_p)). The closed-form
// identities v_p = Pr_s[P] / (2 eta) and Pr_v[P] = 2 eta (1 - v_p) are
// re-derived and their gaps recorded.
struct DenseModelPiece {
    int piece = -1;
    bool degenerate = false;  // no mixture mass
    bool one_sided = false;   // one of the two blocks is empty on the piece
    bool qualifying = false;  // eta >= gamma and both blocks populated
    double eta = 0.0;
    double v_p = 0.0;
    double s_mass = 0.0;  // Pr_s[P]
    double v_mass = 0.0;  // Pr_v[P], also the piece's density weight delta_p
    double eps_claim = 0.0;
    double advantage_measured = 0.0;
    double v_p_closed_form_gap = 0.0;
    double delta_p_gap = 0.0;
    Dist s_cond;  // empty when the block is empty on the piece
    Dist v_cond;
};

struct DmtPpResult {
    DmtInstance inst;
    McBuildResult mc;
    std::vector<DenseModelPiece> pieces;
    double eps = 0.0, gamma = 0.0;
};

DmtPpResult dmt_pp(const Family& F_union, const DmtInstance& inst,
                   double eps, double gamma);

struct DmtRecovery {
    bool ok = false;
    std::string message;
    double eps = 0.0, delta = 0.0;
    double eps_prime = 0.0, gamma = 0.0, tau = 0.0;
    double margin_family = 0.0;  // pseudo-density margin over the lifted family
    double margin_pieces = 0.0;  // same margin for the built piece indicators
    DmtPpResult pp;
    std::vector<int> good_pieces;
    double good_s_mass = 0.0;  // Z, the s-weight the model is built from
    Dist model;                // on the base domain
    double mu_sum_gap = 0.0;
    double density_measured = 0.0;    // min over the model's support of v / model
    double advantage_measured = 0.0;  // max_f |E_s[f] - E_model[f]| over the closed family
    double c_density = 0.0;           // measured constant in density >= delta (1 - c eps)
    double c_advantage = 0.0;         // measured constant in advantage <= c eps / delta
};

// End-to-end dense-model recovery on a shared base domain: lift the
// closed family to the two-block union, check the pseudo-density margin
// at eps' = eps^2 delta, partition the union against the lift, check the
// margin again for the piece indicators, then glue the v-conditionals of
// the balanced pieces with s-weights into a model of s inside v.
DmtRecovery recover_dmt(const Family& F, const Dist& sdist, const Dist& vdist,
                        double eps, double delta);

}  // namespace regkit
