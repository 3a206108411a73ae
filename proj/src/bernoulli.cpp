#include "regkit/bernoulli.hpp"

#include <cmath>
#include <stdexcept>

#include "regkit/errors.hpp"

namespace regkit {

LabeledFamily make_labeled_family(int L, std::vector<std::vector<double>> members,
                                  std::vector<std::string> names) {
    if (L < 2) throw std::invalid_argument("label count must be at least 2");
    if (members.empty()) throw std::invalid_argument("labeled family needs members");
    if (names.size() != members.size()) throw std::invalid_argument("names/members mismatch");
    const std::size_t len = members[0].size();
    if (len == 0 || len % static_cast<std::size_t>(L) != 0) {
        throw std::invalid_argument("member length not a multiple of L");
    }
    for (const auto& m : members) {
        if (m.size() != len) throw std::invalid_argument("labeled members differ in length");
        for (double v : m) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw std::invalid_argument("labeled member value outside [0,1]");
            }
        }
    }
    LabeledFamily f;
    f.L = L;
    f.members = std::move(members);
    f.names = std::move(names);
    f.ledger.pieces = f.members.size();
    return f;
}

double yao_agreement(const BoundedFn& f, const BoundedFn& g, const Dist& d) {
    if (f.size() != d.size() || g.size() != d.size()) {
        throw std::invalid_argument("domain size mismatch");
    }
    double direct = 0.0;
    double corr = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) {
        direct += d[x] * (f[x] * g[x] + (1.0 - f[x]) * (1.0 - g[x]));
        corr += d[x] * (f[x] - 0.5) * (g[x] - 0.5);
    }
    const double via_corr = 2.0 * corr + 0.5;
    if (std::abs(direct - via_corr) > kIdTol) {
        throw internal_invariant_error("agreement identity routes disagree");
    }
    return direct;
}

double best_agreement(const Family& F, const BoundedFn& g, const Dist& d,
                      std::size_t* which) {
    if (F.size() == 0) throw std::invalid_argument("empty family");
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t fi = 0; fi < F.size(); ++fi) {
        const double a = yao_agreement(F.members[fi], g, d);
        if (a > best) {
            best = a;
            arg = fi;
        }
    }
    if (which) *which = arg;
    return best;
}

double hardness_of(const Family& F, const BoundedFn& g, const Dist& d) {
    return 1.0 - best_agreement(F, g, d);
}

double joint_indist_advantage(const LabeledFamily& Fp, const BoundedFn& g, const Dist& d) {
    if (Fp.L != 2) throw std::invalid_argument("joint advantage needs a binary label");
    if (Fp.base_size() != d.size() || g.size() != d.size()) {
        throw std::invalid_argument("domain size mismatch");
    }
    const double v = expect(d, g);
    double best = 0.0;
    for (const auto& m : Fp.members) {
        double s = 0.0;
        for (std::size_t x = 0; x < d.size(); ++x) {
            s += d[x] * (m[2 * x + 1] - m[2 * x + 0]) * (g[x] - v);
        }
        best = std::max(best, std::abs(s));
    }
    return best;
}

std::pair<Dist, Dist> class_conditionals(const BoundedFn& g, const Dist& d) {
    if (g.size() != d.size()) throw std::invalid_argument("domain size mismatch");
    std::vector<double> w1(d.size()), w0(d.size());
    double s1 = 0.0, s0 = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) {
        w1[x] = d[x] * g[x];
        w0[x] = d[x] * (1.0 - g[x]);
        s1 += w1[x];
        s0 += w0[x];
    }
    if (s1 <= 0.0 || s0 <= 0.0) {
        throw degenerate_class_error("one label class carries no mass");
    }
    return {make_dist(std::move(w1)), make_dist(std::move(w0))};
}

double class_conditional_advantage(const Family& F, const BoundedFn& g, const Dist& d) {
    auto [d1, d0] = class_conditionals(g, d);
    double best = 0.0;
    for (const auto& f : F.members) {
        best = std::max(best, std::abs(expect(d1, f) - expect(d0, f)));
    }
    return best;
}

MinorityBoostDist boosted_minority_distribution(const BoundedFn& g, const Dist& d, double eps) {
    if (!g.boolean) throw std::invalid_argument("minority boost needs a boolean target");
    if (g.size() != d.size()) throw std::invalid_argument("domain size mismatch");
    const double v = expect(d, g);
    if (v <= 0.0 || v >= 1.0) {
        throw degenerate_class_error("target is constant under d, no minority to boost");
    }
    std::vector<double> w(d.size());
    for (std::size_t x = 0; x < d.size(); ++x) {
        w[x] = g[x] == 1.0 ? d[x] / (2.0 * v) : d[x] / (2.0 * (1.0 - v));
    }
    MinorityBoostDist out;
    out.mu = make_dist(std::move(w));
    out.v = v;
    out.b = std::min(v, 1.0 - v);
    out.density = 2.0 * out.b;
    out.agreement_bound = 0.5 + eps / (2.0 * v * (1.0 - v));
    return out;
}

BernoulliCharInput make_bernoulli_input(BoundedFn g, Dist d, Family F, double eps) {
    BernoulliCharInput in;
    in.v = expect(d, g);
    in.b = std::min(in.v, 1.0 - in.v);
    in.g = std::move(g);
    in.d = std::move(d);
    in.F = std::move(F);
    in.eps = eps;
    return in;
}

BernoulliStatementReport bernoulli_statement_checks(const BernoulliCharInput& in) {
    BernoulliStatementReport rep;
    rep.v = in.v;
    rep.b = in.b;
    rep.eps = in.eps;

    rep.agreement = best_agreement(in.F, in.g, in.d);
    rep.agreement_bound = 1.0 - in.b + 2.0 * in.eps;
    bool pass = rep.agreement <= rep.agreement_bound + kIdTol;

    if (in.v > 0.0 && in.v < 1.0) {
        rep.conditional_skipped = false;
        rep.conditional_advantage = class_conditional_advantage(in.F, in.g, in.d);
        rep.conditional_bound = in.eps / (in.v * (1.0 - in.v));
        pass = pass && rep.conditional_advantage <= rep.conditional_bound + kIdTol;

        if (in.g.boolean) {
            MinorityBoostDist boost = boosted_minority_distribution(in.g, in.d, in.eps);
            rep.mu_mean = expect(boost.mu, in.g);
            double slack = std::numeric_limits<double>::infinity();
            for (std::size_t x = 0; x < in.d.size(); ++x) {
                slack = std::min(slack, in.d[x] - boost.density * boost.mu[x]);
            }
            rep.density_slack = slack;
            rep.boosted_agreement = best_agreement(in.F, in.g, boost.mu);
            rep.boosted_bound = boost.agreement_bound;
            pass = pass && std::abs(rep.mu_mean - 0.5) <= kSumTol &&
                   slack >= -kIdTol &&
                   rep.boosted_agreement <= rep.boosted_bound + kIdTol;
        }
    }
    rep.all_pass = pass;
    return rep;
}

}  // namespace regkit
