#include "regkit/hardcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "regkit/errors.hpp"

namespace regkit {

IhclResult ihcl_pp(const Family& F, const BoundedFn& g, const Dist& d,
                   double eps, double gamma) {
    if (!g.boolean) {
        throw std::invalid_argument("hardcore construction needs a boolean target");
    }
    IhclResult res;
    res.eps = eps;
    res.gamma = gamma;
    res.mc = build_approx_mc_partition(F, g, d, eps, gamma);
    const Partition& part = res.mc.part;
    res.pieces.reserve(part.k);
    for (int pi = 0; pi < part.k; ++pi) {
        HardcorePiece hp;
        hp.piece = pi;
        hp.stats = part.stats[pi];
        hp.qualifying = !hp.stats.degenerate && hp.stats.eta >= gamma;
        if (hp.stats.degenerate || hp.stats.b <= 0.0) {
            hp.degenerate = true;
            res.pieces.push_back(std::move(hp));
            continue;
        }
        Dist cond = conditional(d, part.assign, pi);
        // Restricting g to the piece support: the boost only reads g where
        // cond has mass, so the full-length tables are fine as they are.
        MinorityBoostDist boost = boosted_minority_distribution(g, cond, eps);
        hp.H = std::move(boost.mu);
        hp.density_claim = boost.density;
        hp.eps_claim = eps / (2.0 * hp.stats.b * (1.0 - hp.stats.b));
        hp.agreement_measured = best_agreement(F, g, hp.H);
        res.pieces.push_back(std::move(hp));
    }
    return res;
}

Dist ttv_residual_distribution(const BoundedFn& g, const Dist& d,
                               const Partition& p, int piece) {
    if (piece < 0 || piece >= p.k) throw std::invalid_argument("piece index out of range");
    Dist cond = conditional(d, p.assign, piece);
    const double vP = expect(cond, g);
    std::vector<double> w(d.size(), 0.0);
    double total = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) {
        if (p.assign[x] == piece) {
            w[x] = std::abs(g[x] - vP);
            total += w[x];
        }
    }
    if (total <= 0.0) {
        throw degenerate_class_error("target constant on the piece, residual is zero");
    }
    return make_dist(std::move(w));
}

BalanceReport average_balance_check(const Partition& p, const BoundedFn& g,
                                    const Dist& d, const Family& F,
                                    const GoodPieceFilter& filter, double delta) {
    if (p.stats.empty()) throw std::invalid_argument("partition stats not filled");
    BalanceReport rep;
    std::vector<double> vote(d.size(), 0.0);
    for (std::size_t x = 0; x < d.size(); ++x) {
        const PieceStats& s = p.stats[p.assign[x]];
        vote[x] = s.v >= 0.5 ? 1.0 : 0.0;
    }
    rep.majority = make_fn(std::move(vote));
    for (int pi = 0; pi < p.k; ++pi) {
        const PieceStats& s = p.stats[pi];
        if (s.degenerate) continue;
        rep.avg_b += s.eta * s.b;
        if (s.eta >= filter.gamma && s.b >= filter.tau) {
            rep.avg_b_good += s.eta * s.b;
            rep.good_mass += s.eta;
        }
    }
    rep.majority_agreement = yao_agreement(rep.majority, g, d);
    rep.identity_gap = std::abs(rep.majority_agreement - (1.0 - rep.avg_b));

    Family with_vote = F;
    add_member(with_vote, rep.majority, "piecewise_majority");
    rep.measured_hardness = hardness_of(with_vote, g, d);

    rep.bound = delta - filter.gamma * static_cast<double>(p.k) - filter.tau;
    rep.bound_applies = rep.measured_hardness >= delta;
    rep.bound_holds = !rep.bound_applies || rep.avg_b_good >= rep.bound - kIdTol;
    return rep;
}

namespace {

double min_density_ratio(const Dist& inner, const Dist& outer) {
    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < inner.size(); ++x) {
        if (inner[x] > 0.0) {
            rho = std::min(rho, outer[x] / inner[x]);
        }
    }
    return rho;
}

}  // namespace

GluedHardcore glue_hardcore(const IhclResult& res, const Dist& d,
                            const GoodPieceFilter& filter,
                            std::optional<double> density_target) {
    GluedHardcore out;
    for (const auto& hp : res.pieces) {
        if (hp.degenerate) continue;
        if (hp.stats.eta >= filter.gamma && hp.stats.b >= filter.tau) {
            out.good_pieces.push_back(hp.piece);
            out.good_mass += hp.stats.eta;
        }
    }
    if (out.good_pieces.empty()) {
        throw no_good_pieces_error("no piece passes the size/balance filter");
    }
    std::vector<double> w(d.size(), 0.0);
    for (int pi : out.good_pieces) {
        const HardcorePiece& hp = res.pieces[pi];
        const double weight = hp.stats.eta / out.good_mass;
        for (std::size_t x = 0; x < d.size(); ++x) {
            w[x] += weight * hp.H[x];
        }
    }
    out.H = make_dist(std::move(w));
    out.density_measured = min_density_ratio(out.H, d);

    if (density_target) {
        const double target = *density_target;
        if (target <= 0.0 || target > 1.0) {
            throw std::invalid_argument("density target must lie in (0,1]");
        }
        const Dist original = out.H;
        std::vector<double> masses = out.H.mass;
        for (int round = 0; round < 64; ++round) {
            double rho = min_density_ratio(Dist{masses}, d);
            if (rho >= target * (1.0 - 1e-12)) break;
            for (std::size_t x = 0; x < masses.size(); ++x) {
                masses[x] = std::min(masses[x], d[x] / target);
            }
            const double s = total_mass(masses);
            for (double& m : masses) m /= s;
        }
        out.H = make_dist(std::move(masses));
        out.density_measured = min_density_ratio(out.H, d);
        out.rescaled = true;
        double tv = 0.0;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t x = 0; x < d.size(); ++x) {
            tv += std::abs(out.H[x] - original[x]);
            if (original[x] > 0.0) {
                const double r = out.H[x] / original[x];
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
        out.rescale_tv = tv / 2.0;
        out.rescale_factor_lo = lo;
        out.rescale_factor_hi = hi;
    }
    return out;
}

IhclRecovery recover_ihcl(const Family& F, const BoundedFn& g, const Dist& d,
                          double eps, double delta,
                          std::optional<double> density_target) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("eps must lie in (0,1)");
    if (delta <= 0.0 || delta > 0.5) throw std::invalid_argument("delta must lie in (0,1/2]");
    IhclRecovery rec;
    rec.eps = eps;
    rec.delta = delta;
    rec.eps_prime = eps * eps * delta;
    rec.gamma = eps * rec.eps_prime;
    rec.tau = eps * delta;

    rec.inner = ihcl_pp(F, g, d, rec.eps_prime, rec.gamma);
    const Partition& part = rec.inner.mc.part;
    GoodPieceFilter filter{rec.gamma, rec.tau};
    rec.balance = average_balance_check(part, g, d, F, filter, delta);

    if (!rec.inner.mc.report.passed) {
        rec.message = "partition failed certification at the derived parameters";
        return rec;
    }
    if (rec.balance.measured_hardness < delta) {
        rec.message = "target is too easy: measured hardness " +
                      std::to_string(rec.balance.measured_hardness) +
                      " is below the requested delta " + std::to_string(delta);
        return rec;
    }
    try {
        rec.glued = glue_hardcore(rec.inner, d, filter, density_target);
    } catch (const no_good_pieces_error& e) {
        rec.message = e.what();
        return rec;
    }

    Family with_vote = F;
    add_member(with_vote, rec.balance.majority, "piecewise_majority");
    rec.glued.agreement_measured = best_agreement(with_vote, g, rec.glued.H);

    const double rho = rec.glued.density_measured;
    rec.c_density = std::max(0.0, (1.0 - rho / (2.0 * delta)) / eps);
    rec.c_hardness = std::max(0.0, (rec.glued.agreement_measured - 0.5) / eps);
    rec.ok = true;
    return rec;
}

SetSample sample_hardcore_set(const Dist& H, const BoundedFn& g, const Dist& d,
                              const Family& F, double eps_claim,
                              std::uint64_t seed, bool raw_mass) {
    const std::size_t n = d.size();
    const double u = 1.0 / static_cast<double>(n);
    for (std::size_t x = 0; x < n; ++x) {
        if (std::abs(d[x] - u) > kIdTol) {
            throw std::invalid_argument("set rounding requires a uniform base distribution");
        }
    }
    double max_mass = 0.0;
    for (std::size_t x = 0; x < n; ++x) max_mass = std::max(max_mass, H[x]);
    if (max_mass <= 0.0) throw std::invalid_argument("empty hardcore distribution");

    std::vector<double> include(n);
    double expected = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        include[x] = raw_mass ? std::min(1.0, H[x]) : H[x] / max_mass;
        expected += include[x];
    }
    SetSample out;
    out.density_claim = expected / static_cast<double>(n);
    out.agreement_bound = 0.5 + 4.0 * eps_claim;
    out.size_condition_ok =
        std::log2(static_cast<double>(F.size())) <=
        static_cast<double>(n) * eps_claim * eps_claim * out.density_claim * out.density_claim;

    Rng rng = substream(seed, "hardcore.set");
    for (out.retries = 0; out.retries < 16; ++out.retries) {
        out.members.clear();
        for (std::size_t x = 0; x < n; ++x) {
            if (rng.next_bernoulli(include[x])) out.members.push_back(static_cast<int>(x));
        }
        if (!out.members.empty()) break;
    }
    if (out.members.empty()) {
        throw std::runtime_error("sampled an empty set 16 times in a row");
    }
    out.density = static_cast<double>(out.members.size()) / static_cast<double>(n);

    std::vector<double> setw(n, 0.0);
    for (int x : out.members) setw[x] = 1.0;
    Dist uniform_on_set = make_dist(std::move(setw));
    out.agreement = best_agreement(F, g, uniform_on_set);
    return out;
}

}  // namespace regkit
