#include "regkit/dense_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "regkit/family.hpp"

namespace regkit {

DmtInstance make_dmt_instance(Dist s_block, Dist v_block) {
    DmtInstance inst;
    inst.ns = s_block.size();
    inst.nv = v_block.size();
    const std::size_t n = inst.ns + inst.nv;

    std::vector<double> s(n, 0.0), v(n, 0.0), mix(n, 0.0), ind(n, 0.0);
    for (std::size_t i = 0; i < inst.ns; ++i) {
        s[i] = s_block[i];
        mix[i] = s_block[i] / 2.0;
        ind[i] = 1.0;
    }
    for (std::size_t i = 0; i < inst.nv; ++i) {
        v[inst.ns + i] = v_block[i];
        mix[inst.ns + i] = v_block[i] / 2.0;
    }
    inst.s = Dist{std::move(s)};
    inst.v = Dist{std::move(v)};
    inst.mixture = Dist{std::move(mix)};
    inst.g = make_fn(std::move(ind));
    return inst;
}

double pseudodensity_margin(const Dist& s, const Dist& v, const Family& F,
                            double delta, std::size_t* which) {
    if (s.size() != v.size()) throw std::invalid_argument("size mismatch");
    double worst = 0.0;
    std::size_t arg = 0;
    for (std::size_t fi = 0; fi < F.size(); ++fi) {
        const double m = delta * expect(s, F.members[fi]) - expect(v, F.members[fi]);
        if (m > worst) {
            worst = m;
            arg = fi;
        }
    }
    if (which) *which = arg;
    return worst;
}

DmtPpResult dmt_pp(const Family& F_union, const DmtInstance& inst,
                   double eps, double gamma) {
    if (F_union.domain_size() != inst.size()) {
        throw std::invalid_argument("family is not on the union domain");
    }
    DmtPpResult res;
    res.inst = inst;
    res.eps = eps;
    res.gamma = gamma;
    res.mc = build_approx_mc_partition(F_union, inst.g, inst.mixture, eps, gamma);

    const Partition& part = res.mc.part;
    res.pieces.resize(static_cast<std::size_t>(part.k));
    for (int pi = 0; pi < part.k; ++pi) {
        DenseModelPiece& pc = res.pieces[static_cast<std::size_t>(pi)];
        pc.piece = pi;
        const PieceStats& st = part.stats[static_cast<std::size_t>(pi)];
        pc.eta = st.eta;
        pc.v_p = st.v;
        for (std::size_t x = 0; x < inst.size(); ++x) {
            if (part.assign[x] == pi) {
                pc.s_mass += inst.s[x];
                pc.v_mass += inst.v[x];
            }
        }
        if (st.degenerate || pc.eta <= 0.0) {
            pc.degenerate = true;
            continue;
        }
        // The mixture splits a piece exactly into half its s-mass and
        // half its v-mass; both closed forms below are consequences.
        pc.v_p_closed_form_gap = std::abs(pc.v_p - pc.s_mass / (2.0 * pc.eta));
        pc.delta_p_gap = std::abs(pc.v_mass - 2.0 * pc.eta * (1.0 - pc.v_p));
        if (pc.v_p_closed_form_gap > kSumTol || pc.delta_p_gap > kSumTol) {
            throw internal_invariant_error("piece mass identities drifted");
        }
        if (pc.s_mass <= 0.0 || pc.v_mass <= 0.0) {
            pc.one_sided = true;
            continue;
        }
        pc.s_cond = conditional(inst.s, part.assign, pi);
        pc.v_cond = conditional(inst.v, part.assign, pi);
        pc.qualifying = pc.eta >= gamma;
        pc.eps_claim = eps / (pc.v_p * (1.0 - pc.v_p));
        double adv = 0.0;
        for (const auto& f : F_union.members) {
            adv = std::max(adv, std::abs(expect(pc.s_cond, f) - expect(pc.v_cond, f)));
        }
        pc.advantage_measured = adv;
    }
    return res;
}

DmtRecovery recover_dmt(const Family& F, const Dist& sdist, const Dist& vdist,
                        double eps, double delta) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("eps must lie in (0,1)");
    if (delta <= 0.0 || delta > 1.0) throw std::invalid_argument("delta must lie in (0,1]");
    if (sdist.size() != vdist.size()) throw std::invalid_argument("size mismatch");
    if (F.domain_size() != sdist.size()) throw std::invalid_argument("family/domain size mismatch");

    DmtRecovery rec;
    rec.eps = eps;
    rec.delta = delta;
    rec.eps_prime = eps * eps * delta;
    rec.gamma = eps * rec.eps_prime;
    rec.tau = eps * delta;

    const std::size_t n = sdist.size();
    DmtInstance inst = make_dmt_instance(sdist, vdist);

    // Same test on both blocks: a lifted member reads the base point
    // behind either copy.
    Family Fc = close_family(F);
    Family lifted;
    for (std::size_t fi = 0; fi < Fc.size(); ++fi) {
        std::vector<double> tbl(inst.size());
        for (std::size_t i = 0; i < inst.size(); ++i) {
            tbl[i] = Fc.members[fi][i % n];
        }
        add_member(lifted, make_fn(std::move(tbl)), Fc.names[fi]);
    }

    rec.margin_family = pseudodensity_margin(inst.s, inst.v, lifted, delta);
    if (rec.margin_family > rec.eps_prime) {
        rec.message = "the family already refutes pseudo-density at this tolerance";
        rec.pp.inst = std::move(inst);
        return rec;
    }

    rec.pp = dmt_pp(lifted, inst, rec.eps_prime, rec.gamma);
    if (!rec.pp.mc.converged) {
        rec.message = "partition builder hit its correction cap before settling";
        return rec;
    }

    for (const DenseModelPiece& pc : rec.pp.pieces) {
        rec.margin_pieces = std::max(rec.margin_pieces, delta * pc.s_mass - pc.v_mass);
    }
    rec.margin_pieces = std::max(0.0, rec.margin_pieces);
    if (rec.margin_pieces > rec.eps_prime) {
        rec.message = "a piece indicator refutes pseudo-density at this tolerance";
        return rec;
    }

    for (const DenseModelPiece& pc : rec.pp.pieces) {
        if (pc.degenerate || pc.one_sided) continue;
        if (pc.eta < rec.gamma) continue;
        if (1.0 - pc.v_p < rec.tau) continue;
        rec.good_pieces.push_back(pc.piece);
        rec.good_s_mass += pc.s_mass;
    }
    if (rec.good_pieces.empty() || rec.good_s_mass <= 0.0) {
        rec.message = "every piece fell to the size/balance filter";
        return rec;
    }

    // Model: v-conditionals of the good pieces reweighted by the s-mass
    // they explain. Sums to one exactly because each conditional does.
    const Partition& part = rec.pp.mc.part;
    std::vector<double> mu(n, 0.0);
    for (int pi : rec.good_pieces) {
        const DenseModelPiece& pc = rec.pp.pieces[static_cast<std::size_t>(pi)];
        const double w = pc.s_mass / rec.good_s_mass;
        for (std::size_t i = 0; i < inst.nv; ++i) {
            mu[i] += w * pc.v_cond[inst.ns + i];
        }
    }
    rec.mu_sum_gap = std::abs(total_mass(mu) - 1.0);
    if (rec.mu_sum_gap > kSumTol) {
        throw internal_invariant_error("glued model mass drifted from one");
    }
    rec.model = Dist{std::move(mu)};

    double density = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) {
        if (rec.model[x] > 0.0) density = std::min(density, vdist[x] / rec.model[x]);
    }
    rec.density_measured = density;

    double adv = 0.0;
    for (const auto& f : Fc.members) {
        adv = std::max(adv, std::abs(expect(sdist, f) - expect(rec.model, f)));
    }
    rec.advantage_measured = adv;

    rec.c_density = std::max(0.0, (1.0 - rec.density_measured / delta) / eps);
    rec.c_advantage = std::max(0.0, rec.advantage_measured * delta / eps);
    rec.ok = true;
    rec.message = "ok";
    return rec;
}

}  // namespace regkit
