#pragma once

#include <string>
#include <utility>
#include <vector>

#include "regkit/domain.hpp"
#include "regkit/family.hpp"

namespace regkit {

// Functions on a product domain X x {0..L-1}, stored row-major:
// members[m][x*L + y] = f(x, y). Used wherever a distinguisher may look
// at a label as well as a point.
struct LabeledFamily {
    int L = 2;
    std::vector<std::vector<double>> members;
    std::vector<std::string> names;
    Ledger ledger;

    std::size_t size() const { return members.size(); }
    std::size_t base_size() const {
        return members.empty() ? 0 : members[0].size() / static_cast<std::size_t>(L);
    }
};

LabeledFamily make_labeled_family(int L, std::vector<std::vector<double>> members,
                                  std::vector<std::string> names);

// Probability that f and g agree when both tables are read as
// per-element coin biases:  E_d[f g + (1-f)(1-g)].  Computed a second
// time through the correlation form 2 E_d[(f-1/2)(g-1/2)] + 1/2 and the
// two routes are required to match within kIdTol.
double yao_agreement(const BoundedFn& f, const BoundedFn& g, const Dist& d);

// Largest delta such that every member agrees with g with probability at
// most 1 - delta, i.e. 1 minus the best agreement over the family.
double hardness_of(const Family& F, const BoundedFn& g, const Dist& d);
double best_agreement(const Family& F, const BoundedFn& g, const Dist& d,
                      std::size_t* which = nullptr);

// Advantage of the best labeled distinguisher at telling (X, g(X)) from
// (X, Bernoulli(E_d[g])), via the closed form
// |E_d[(f(.,1) - f(.,0)) (g - v)]|.  Requires L = 2.
double joint_indist_advantage(const LabeledFamily& Fp, const BoundedFn& g, const Dist& d);

// The two class conditionals of d under the randomized label g: mass
// proportional to d*g on label 1 and d*(1-g) on label 0. Throws
// degenerate_class_error if either class has zero mass.
std::pair<Dist, Dist> class_conditionals(const BoundedFn& g, const Dist& d);

// max_f |E[f | label 1] - E[f | label 0]|.
double class_conditional_advantage(const Family& F, const BoundedFn& g, const Dist& d);

// Reweighting of d that balances a boolean g: mass d/(2v) on the points
// with g = 1 and d/(2(1-v)) on the rest, where v = E_d[g]. Satisfies
// E_mu[g] = 1/2 and 2b * mu <= d pointwise with b = min(v, 1-v),
// so mu sits inside d with density 2b.
struct MinorityBoostDist {
    Dist mu;
    double v = 0.0;
    double b = 0.0;
    double density = 0.0;          // 2b
    double agreement_bound = 0.0;  // 1/2 + eps / (2 v (1-v)) for the caller's eps
};

MinorityBoostDist boosted_minority_distribution(const BoundedFn& g, const Dist& d, double eps);

// Bundle used by every consumer of the characterization: the inputs plus
// the recomputed constant v (never trusted from a caller) and b.
struct BernoulliCharInput {
    BoundedFn g;
    Dist d;
    Family F;
    double eps = 0.0;
    double v = 0.0;
    double b = 0.0;
};

BernoulliCharInput make_bernoulli_input(BoundedFn g, Dist d, Family F, double eps);

// Measured left sides and claimed right sides for the consequences of a
// target being eps-indistinguishable from its mean:
//   agreement    best agreement over F           <= 1 - b + 2 eps
//   conditional  class-conditional advantage     <= eps / (v(1-v))
//   balanced     E_mu[g] under the boost         =  1/2 (tolerance kSumTol)
//   density      2b * mu <= d pointwise slack    >= -kIdTol
//   boosted      best agreement over F under mu  <= 1/2 + eps / (2v(1-v))
// The conditional and boosted rows are skipped when v is 0 or 1.
struct BernoulliStatementReport {
    double v = 0.0, b = 0.0, eps = 0.0;
    double agreement = 0.0, agreement_bound = 0.0;
    bool conditional_skipped = true;
    double conditional_advantage = 0.0, conditional_bound = 0.0;
    double mu_mean = 0.0;
    double density_slack = 0.0;  // min over x of d - 2b*mu
    double boosted_agreement = 0.0, boosted_bound = 0.0;
    bool all_pass = false;
};

BernoulliStatementReport bernoulli_statement_checks(const BernoulliCharInput& in);

}  // namespace regkit
