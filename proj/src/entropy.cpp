#include "regkit/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace regkit {

namespace {

// Row-tuple level sets of a piecewise-constant row table (lexicographic
// order, so scans are deterministic).
struct RowLevels {
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<int>> members;
};

RowLevels bucket_rows(const std::vector<double>& h, std::size_t n, int L) {
    std::map<std::vector<double>, std::vector<int>> by_row;
    std::vector<double> key(static_cast<std::size_t>(L));
    for (std::size_t x = 0; x < n; ++x) {
        for (int y = 0; y < L; ++y) key[static_cast<std::size_t>(y)] = h[x * L + y];
        by_row[key].push_back(static_cast<int>(x));
    }
    RowLevels lv;
    for (auto& [row, idx] : by_row) {
        lv.rows.push_back(row);
        lv.members.push_back(std::move(idx));
    }
    return lv;
}

double row_potential(const JointDist& j, const std::vector<double>& h) {
    double s = 0.0;
    for (std::size_t x = 0; x < j.size(); ++x) {
        for (int y = 0; y < j.L; ++y) {
            const double r = j.cond_at(x, y) - h[x * j.L + y];
            s += j.marg[x] * r * r;
        }
    }
    return s;
}

// Sets every coordinate of every populated piece to the piece's
// conditional mean of the true row. Means of stochastic rows are
// stochastic, so snapped tables always carry proper rows.
void snap_rows(std::vector<double>& h, const RowLevels& lv, const JointDist& j) {
    const int L = j.L;
    for (std::size_t li = 0; li < lv.members.size(); ++li) {
        double mass = 0.0;
        std::vector<double> sum(static_cast<std::size_t>(L), 0.0);
        for (int x : lv.members[li]) {
            mass += j.marg[x];
            for (int y = 0; y < L; ++y) {
                sum[static_cast<std::size_t>(y)] += j.marg[x] * j.cond_at(x, y);
            }
        }
        if (mass <= 0.0) continue;
        for (int y = 0; y < L; ++y) {
            const double mean = std::clamp(sum[static_cast<std::size_t>(y)] / mass, 0.0, 1.0);
            for (int x : lv.members[li]) h[x * L + y] = mean;
        }
    }
}

struct RowViolation {
    std::size_t level = 0;
    std::size_t member = 0;
    int label = 0;
    double sum = 0.0;
    double mass = 0.0;
};

// First (piece, member, label) triple whose mass-weighted conditional
// violation exceeds theta, scanning pieces in row order, members in
// family order, labels ascending.
bool find_row_violation(const std::vector<double>& h, const RowLevels& lv,
                        const Family& F, const JointDist& j, double theta,
                        RowViolation& out, Ledger& lg) {
    lg.oracle_calls += 1;
    const int L = j.L;
    for (std::size_t li = 0; li < lv.members.size(); ++li) {
        double mass = 0.0;
        for (int x : lv.members[li]) mass += j.marg[x];
        for (std::size_t fi = 0; fi < F.size(); ++fi) {
            const auto& f = F.members[fi].values;
            for (int y = 0; y < L; ++y) {
                double s = 0.0;
                for (int x : lv.members[li]) {
                    s += j.marg[x] * f[x] * (j.cond_at(x, y) - h[x * L + y]);
                }
                lg.post_ops += lv.members[li].size();
                if (std::abs(s) > theta) {
                    out = RowViolation{li, fi, y, s, mass};
                    return true;
                }
            }
        }
    }
    return false;
}

constexpr int kRowCorrectionCap = 500000;

std::vector<double> uniform_row(int L) {
    return std::vector<double>(static_cast<std::size_t>(L), 1.0 / static_cast<double>(L));
}

}  // namespace

JointDist make_joint(int L, Dist marg, std::vector<double> cond) {
    if (L < 2) throw std::invalid_argument("need at least two labels");
    if (cond.size() != marg.size() * static_cast<std::size_t>(L)) {
        throw std::invalid_argument("conditional table size does not match marg * L");
    }
    for (double c : cond) {
        if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
            throw std::invalid_argument("conditional entries must lie in [0,1]");
        }
    }
    for (std::size_t x = 0; x < marg.size(); ++x) {
        double s = 0.0;
        for (int y = 0; y < L; ++y) s += cond[x * static_cast<std::size_t>(L) + y];
        if (std::abs(s - 1.0) > kSumTol) {
            throw std::invalid_argument("conditional row does not sum to one");
        }
        for (int y = 0; y < L; ++y) cond[x * static_cast<std::size_t>(L) + y] /= s;
    }
    JointDist j;
    j.L = L;
    j.marg = std::move(marg);
    j.cond = std::move(cond);
    return j;
}

double min_entropy(const Dist& d) {
    double m = 0.0;
    for (double w : d.mass) m = std::max(m, w);
    if (m <= 0.0) throw std::invalid_argument("distribution without mass");
    return -std::log2(m);
}

double avg_min_entropy(const JointDist& j) {
    double s = 0.0;
    for (std::size_t x = 0; x < j.size(); ++x) s += j.marg[x] * j.row_max(x);
    if (s <= 0.0) throw std::invalid_argument("joint distribution without mass");
    return -std::log2(s);
}

double predictability(const JointDist& j) {
    // Materialize the row-argmax predictor and score it, then cross-check
    // against the entropy route.
    double p = 0.0;
    for (std::size_t x = 0; x < j.size(); ++x) {
        int best = 0;
        for (int y = 1; y < j.L; ++y) {
            if (j.cond_at(x, y) > j.cond_at(x, best)) best = y;
        }
        p += j.marg[x] * j.cond_at(x, best);
    }
    const double via_entropy = std::pow(2.0, -avg_min_entropy(j));
    if (std::abs(p - via_entropy) > kIdTol) {
        throw internal_invariant_error("predictor score and entropy route disagree");
    }
    return p;
}

MulticlassReport verify_multiclass_mc(const Partition& p, const Family& F,
                                      const JointDist& j, double eps, double gamma) {
    // Same stance as the binary certificate: recompute everything with
    // plain loops, no builder helpers.
    MulticlassReport rep;
    rep.epsilon = eps;
    rep.gamma = gamma;
    rep.k = p.k;
    rep.L = j.L;
    rep.violations.assign(p.k, std::vector<double>(F.size() * static_cast<std::size_t>(j.L), 0.0));
    rep.passed = true;
    for (int pi = 0; pi < p.k; ++pi) {
        double mass = 0.0;
        for (std::size_t x = 0; x < j.size(); ++x) {
            if (p.assign[x] == pi) mass += j.marg[x];
        }
        if (mass < gamma || mass <= 0.0) {
            rep.skipped.push_back(pi);
            if (mass <= 0.0) continue;
        } else {
            rep.checked.push_back(pi);
        }
        for (int y = 0; y < j.L; ++y) {
            double vsum = 0.0;
            for (std::size_t x = 0; x < j.size(); ++x) {
                if (p.assign[x] == pi) vsum += j.marg[x] * j.cond_at(x, y);
            }
            const double vPy = vsum / mass;
            for (std::size_t fi = 0; fi < F.size(); ++fi) {
                double s = 0.0;
                for (std::size_t x = 0; x < j.size(); ++x) {
                    if (p.assign[x] == pi) {
                        s += j.marg[x] * F.members[fi].values[x] * (j.cond_at(x, y) - vPy);
                    }
                }
                const double viol = std::abs(s) / mass;
                rep.violations[pi][fi * static_cast<std::size_t>(j.L) + y] = viol;
                if (mass >= gamma) {
                    rep.max_violation = std::max(rep.max_violation, viol);
                    if (viol > eps) rep.passed = false;
                }
            }
        }
    }
    return rep;
}

MulticlassResult multiclass_mc_partition(const Family& F, const JointDist& j,
                                         double eps, double gamma) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must lie in (0,1]");
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0,1]");
    if (F.domain_size() != j.size()) throw std::invalid_argument("family/domain size mismatch");
    MulticlassResult res;
    const int L = j.L;

    if (L == 2) {
        // The label-0 inequalities mirror the label-1 ones exactly, so the
        // binary builder on the label-1 conditional settles both.
        std::vector<double> g1(j.size());
        for (std::size_t x = 0; x < j.size(); ++x) g1[x] = j.cond_at(x, 1);
        McBuildResult inner = build_approx_mc_partition(F, make_fn(std::move(g1)), j.marg, eps, gamma);
        res.part = std::move(inner.part);
        res.converged = inner.converged;
        res.corrections = inner.corrections;
        res.min_step_decrease = inner.min_step_decrease;
        res.rows.resize(static_cast<std::size_t>(res.part.k));
        res.etas.resize(static_cast<std::size_t>(res.part.k), 0.0);
        for (int pi = 0; pi < res.part.k; ++pi) {
            const PieceStats& st = res.part.stats[static_cast<std::size_t>(pi)];
            res.etas[static_cast<std::size_t>(pi)] = st.eta;
            res.rows[static_cast<std::size_t>(pi)] =
                st.degenerate ? uniform_row(2) : std::vector<double>{1.0 - st.v, st.v};
        }
        res.report = verify_multiclass_mc(res.part, F, j, eps, gamma);
        res.report.iterations = res.corrections;
        if (!res.converged) res.report.passed = false;
        return res;
    }

    // Joint loop over all L label targets. No piece-count bound is
    // enforced here; pieces are whole-row level sets.
    const std::size_t n = j.size();
    std::vector<double> h(n * static_cast<std::size_t>(L));
    {
        std::vector<double> mean(static_cast<std::size_t>(L), 0.0);
        for (std::size_t x = 0; x < n; ++x) {
            for (int y = 0; y < L; ++y) mean[static_cast<std::size_t>(y)] += j.marg[x] * j.cond_at(x, y);
        }
        for (std::size_t x = 0; x < n; ++x) {
            for (int y = 0; y < L; ++y) h[x * L + y] = mean[static_cast<std::size_t>(y)];
        }
    }

    const double theta = eps * gamma / 2.0;
    Ledger lg;
    res.min_step_decrease = std::numeric_limits<double>::infinity();
    double min_dec = std::numeric_limits<double>::infinity();
    bool quiet = false;
    RowLevels lv;
    while (true) {
        lv = bucket_rows(h, n, L);
        const double before = row_potential(j, h);
        snap_rows(h, lv, j);
        const double after = row_potential(j, h);
        if (after > before + kIdTol) {
            throw internal_invariant_error("row re-centering raised the potential");
        }
        lv = bucket_rows(h, n, L);
        RowViolation viol;
        if (!find_row_violation(h, lv, F, j, theta, viol, lg)) {
            quiet = true;
            break;
        }
        if (res.corrections >= kRowCorrectionCap) break;
        const auto& f = F.members[viol.member].values;
        const double step = std::abs(viol.sum) / viol.mass;
        const double sgn = viol.sum > 0.0 ? 1.0 : -1.0;
        const double phi0 = row_potential(j, h);
        for (int x : lv.members[viol.level]) {
            double& cell = h[static_cast<std::size_t>(x) * L + viol.label];
            cell = std::clamp(cell + sgn * step * f[static_cast<std::size_t>(x)], 0.0, 1.0);
        }
        lg.post_ops += lv.members[viol.level].size();
        const double dec = phi0 - row_potential(j, h);
        if (dec < theta * theta * (1.0 - 1e-9) - 1e-15) {
            throw internal_invariant_error("row correction potential drop below trigger^2");
        }
        min_dec = std::min(min_dec, dec);
        res.corrections += 1;
    }

    res.converged = quiet;
    res.min_step_decrease = res.corrections > 0 ? min_dec : 0.0;
    std::vector<int> assign(n, 0);
    for (std::size_t li = 0; li < lv.members.size(); ++li) {
        for (int x : lv.members[li]) assign[static_cast<std::size_t>(x)] = static_cast<int>(li);
    }
    res.part = make_partition(std::move(assign), static_cast<int>(lv.members.size()));
    res.part.ledger.absorb(lg);
    res.rows.resize(lv.members.size());
    res.etas.resize(lv.members.size(), 0.0);
    for (std::size_t li = 0; li < lv.members.size(); ++li) {
        double mass = 0.0;
        std::vector<double> sum(static_cast<std::size_t>(L), 0.0);
        for (int x : lv.members[li]) {
            mass += j.marg[x];
            for (int y = 0; y < L; ++y) sum[static_cast<std::size_t>(y)] += j.marg[x] * j.cond_at(x, y);
        }
        res.etas[li] = mass;
        if (mass > 0.0) {
            for (double& c : sum) c = std::clamp(c / mass, 0.0, 1.0);
            res.rows[li] = std::move(sum);
        } else {
            res.rows[li] = uniform_row(L);
        }
    }
    res.report = verify_multiclass_mc(res.part, F, j, eps, gamma);
    res.report.iterations = res.corrections;
    if (!res.converged) res.report.passed = false;
    return res;
}

PamePpResult pame_pp(const LabeledFamily& Fprod, const JointDist& j,
                     double eps, double gamma) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must lie in (0,1]");
    if (Fprod.L != j.L) throw std::invalid_argument("label count mismatch");
    if (Fprod.base_size() != j.size() && Fprod.size() > 0) {
        throw std::invalid_argument("family/domain size mismatch");
    }
    const int L = j.L;
    const std::size_t n = j.size();

    PamePpResult res;
    res.eps = eps;
    res.gamma = gamma;
    res.eps_label = eps / static_cast<double>(L);

    // Label slices of the product members drive the partition: once each
    // slice is calibrated to eps/L per piece, any product member's
    // distinguishing advantage on a certified piece telescopes over the
    // labels and stays below eps.
    Family induced;
    for (std::size_t fi = 0; fi < Fprod.size(); ++fi) {
        for (int y = 0; y < L; ++y) {
            std::vector<double> slice(n);
            for (std::size_t x = 0; x < n; ++x) {
                slice[x] = Fprod.members[fi][x * static_cast<std::size_t>(L) + y];
            }
            add_member(induced, make_fn(std::move(slice)),
                       Fprod.names[fi] + "[y=" + std::to_string(y) + "]");
        }
    }
    res.induced = close_family(induced);
    res.mc = multiclass_mc_partition(res.induced, j, res.eps_label, gamma);

    const Partition& part = res.mc.part;
    res.witnesses.resize(static_cast<std::size_t>(part.k));
    for (int pi = 0; pi < part.k; ++pi) {
        PameWitness& w = res.witnesses[static_cast<std::size_t>(pi)];
        w.piece = pi;
        w.eta = res.mc.etas[static_cast<std::size_t>(pi)];
        w.eps_claim = eps;
        if (w.eta <= 0.0) {
            w.degenerate = true;
            w.row = uniform_row(L);
            w.m = 1.0 / static_cast<double>(L);
            w.k_claim = std::log2(static_cast<double>(L));
            continue;
        }
        w.row = res.mc.rows[static_cast<std::size_t>(pi)];
        w.m = *std::max_element(w.row.begin(), w.row.end());
        w.k_claim = std::log2(1.0 / w.m);
        w.qualifying = w.eta >= gamma;

        // Entropy of the constant-row witness on the piece, measured the
        // long way round and required to equal log2(1/m).
        Dist cm = conditional(j.marg, part.assign, pi);
        std::vector<double> wcond(n * static_cast<std::size_t>(L));
        for (std::size_t x = 0; x < n; ++x) {
            for (int y = 0; y < L; ++y) wcond[x * L + y] = w.row[static_cast<std::size_t>(y)];
        }
        JointDist wit = make_joint(L, cm, std::move(wcond));
        w.measured_ame = avg_min_entropy(wit);
        if (std::abs(w.measured_ame - w.k_claim) > kIdTol) {
            throw internal_invariant_error("piece witness entropy differs from log2(1/m)");
        }

        double adv = 0.0;
        for (std::size_t fi = 0; fi < Fprod.size(); ++fi) {
            double s = 0.0;
            for (std::size_t x = 0; x < n; ++x) {
                if (wit.marg[x] <= 0.0) continue;
                for (int y = 0; y < L; ++y) {
                    s += wit.marg[x] * Fprod.members[fi][x * static_cast<std::size_t>(L) + y] *
                         (j.cond_at(x, y) - w.row[static_cast<std::size_t>(y)]);
                }
            }
            adv = std::max(adv, std::abs(s));
        }
        w.measured_advantage = adv;
    }
    return res;
}

GluedPame glue_pame(const PamePpResult& pp, const JointDist& j,
                    const LabeledFamily& Fprod, const GoodPieceFilter& filter) {
    const Partition& part = pp.mc.part;
    const int L = j.L;
    GluedPame out;
    std::vector<std::uint8_t> good(static_cast<std::size_t>(part.k), 0);
    for (const PameWitness& w : pp.witnesses) {
        const bool keep = !w.degenerate && w.eta >= filter.gamma && (1.0 - w.m) >= filter.tau;
        if (keep) {
            good[static_cast<std::size_t>(w.piece)] = 1;
            out.good_pieces.push_back(w.piece);
            out.good_mass += w.eta;
        } else {
            out.skipped_mass += w.eta;
        }
    }
    if (out.good_pieces.empty()) {
        throw no_good_pieces_error("no piece passes the size/entropy filter");
    }

    std::vector<double> marg(j.size(), 0.0);
    std::vector<double> cond(j.size() * static_cast<std::size_t>(L));
    for (std::size_t x = 0; x < j.size(); ++x) {
        const int pi = part.assign[x];
        if (good[static_cast<std::size_t>(pi)]) marg[x] = j.marg[x] / out.good_mass;
        const PameWitness& w = pp.witnesses[static_cast<std::size_t>(pi)];
        for (int y = 0; y < L; ++y) cond[x * L + y] = w.row[static_cast<std::size_t>(y)];
    }
    out.witness = make_joint(L, Dist{std::move(marg)}, std::move(cond));

    for (int pi : out.good_pieces) {
        const PameWitness& w = pp.witnesses[static_cast<std::size_t>(pi)];
        out.glued_m += (w.eta / out.good_mass) * w.m;
    }
    out.measured_ame = avg_min_entropy(out.witness);
    if (std::abs(out.measured_ame + std::log2(out.glued_m)) > kSumTol) {
        throw internal_invariant_error("glued witness entropy differs from piece aggregate");
    }

    double adv = 0.0;
    for (std::size_t fi = 0; fi < Fprod.size(); ++fi) {
        double s = 0.0;
        for (std::size_t x = 0; x < j.size(); ++x) {
            if (out.witness.marg[x] <= 0.0) continue;
            for (int y = 0; y < L; ++y) {
                s += out.witness.marg[x] * Fprod.members[fi][x * static_cast<std::size_t>(L) + y] *
                     (j.cond_at(x, y) - out.witness.cond_at(x, y));
            }
        }
        adv = std::max(adv, std::abs(s));
    }
    out.measured_advantage = adv;
    return out;
}

PameRecovery recover_pame(const LabeledFamily& Fprod, const JointDist& j, double eps) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("eps must lie in (0,1)");
    PameRecovery rec;
    rec.eps = eps;
    rec.predictability_measured = predictability(j);
    rec.delta = 1.0 - rec.predictability_measured;
    if (rec.delta <= kIdTol) {
        rec.message = "labels are perfectly predictable from the point alone";
        return rec;
    }
    rec.eps_prime = eps * eps * rec.delta;
    rec.gamma = eps * rec.eps_prime;
    rec.tau = eps * rec.delta;
    rec.ame_floor = std::log2(1.0 / (1.0 - rec.delta));

    rec.pp = pame_pp(Fprod, j, eps, rec.gamma);
    if (!rec.pp.mc.converged) {
        rec.message = "partition builder hit its correction cap before settling";
        return rec;
    }
    try {
        rec.glued = glue_pame(rec.pp, j, Fprod, GoodPieceFilter{rec.gamma, rec.tau});
    } catch (const no_good_pieces_error&) {
        rec.message = "every piece fell to the size/entropy filter";
        return rec;
    }
    rec.c_ame = std::max(0.0, (rec.ame_floor - rec.glued.measured_ame) / eps);
    rec.c_advantage = std::max(0.0, rec.glued.measured_advantage / eps);
    rec.ok = true;
    rec.message = "ok";
    return rec;
}

HardcoreWitness hardcore_to_pame_witness(const Dist& H, const BoundedFn& g,
                                         const Dist& d, const LabeledFamily& Fprod) {
    if (H.size() != d.size() || g.size() != d.size()) {
        throw std::invalid_argument("size mismatch");
    }
    if (!g.boolean) throw std::invalid_argument("witness conversion needs a boolean target");
    if (Fprod.L != 2 && Fprod.size() > 0) {
        throw std::invalid_argument("witness conversion is binary");
    }
    for (std::size_t x = 0; x < d.size(); ++x) {
        if (H[x] > 0.0 && d[x] <= 0.0) {
            throw std::invalid_argument("hardcore mass outside the base support");
        }
    }
    HardcoreWitness out;
    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < d.size(); ++x) {
        if (H[x] > 0.0) rho = std::min(rho, d[x] / H[x]);
    }
    if (!std::isfinite(rho)) throw std::invalid_argument("hardcore distribution without mass");
    out.rho = std::min(1.0, rho);

    // Each point mixes a fair coin (weight lambda, the share of the point
    // that the hardcore measure occupies) with the true label.
    std::vector<double> cond(d.size() * 2);
    for (std::size_t x = 0; x < d.size(); ++x) {
        const double lam = d[x] > 0.0 ? std::min(1.0, out.rho * H[x] / d[x]) : 0.0;
        const double p1 = lam / 2.0 + (1.0 - lam) * g[x];
        cond[x * 2 + 1] = p1;
        cond[x * 2 + 0] = 1.0 - p1;
    }
    out.witness = make_joint(2, d, std::move(cond));
    out.measured_ame = avg_min_entropy(out.witness);

    double adv = 0.0;
    for (std::size_t fi = 0; fi < Fprod.size(); ++fi) {
        double s = 0.0;
        for (std::size_t x = 0; x < d.size(); ++x) {
            for (int y = 0; y < 2; ++y) {
                const double truth = (g[x] == static_cast<double>(y)) ? 1.0 : 0.0;
                s += d[x] * Fprod.members[fi][x * 2 + y] *
                     (truth - out.witness.cond_at(x, y));
            }
        }
        adv = std::max(adv, std::abs(s));
    }
    out.measured_advantage = adv;
    return out;
}

}  // namespace regkit
