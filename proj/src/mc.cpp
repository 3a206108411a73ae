#include "regkit/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

namespace regkit {

namespace {

struct Levels {
    std::vector<double> values;              // ascending, distinct
    std::vector<std::vector<int>> members;   // parallel to values
};

Levels bucket(const std::vector<double>& h) {
    std::map<double, std::vector<int>> by_value;
    for (std::size_t x = 0; x < h.size(); ++x) {
        by_value[h[x]].push_back(static_cast<int>(x));
    }
    Levels lv;
    lv.values.reserve(by_value.size());
    lv.members.reserve(by_value.size());
    for (auto& [v, idx] : by_value) {
        lv.values.push_back(v);
        lv.members.push_back(std::move(idx));
    }
    return lv;
}

// Re-centers every level on its conditional mean of g. Levels that carry
// no mass keep their value. Never raises the potential (asserted by the
// callers around it).
void snap_to_means(std::vector<double>& h, const Levels& lv, const BoundedFn& g,
                   const Dist& d, Ledger& lg) {
    for (std::size_t i = 0; i < lv.values.size(); ++i) {
        double mass = 0.0, gsum = 0.0;
        for (int x : lv.members[i]) {
            mass += d[x];
            gsum += d[x] * g[x];
        }
        lg.post_ops += lv.members[i].size();
        if (mass <= 0.0) continue;
        double mean = std::clamp(gsum / mass, 0.0, 1.0);
        for (int x : lv.members[i]) h[x] = mean;
    }
}

struct Violation {
    std::size_t level = 0;
    std::size_t member = 0;
    double sum = 0.0;    // signed, mass weighted: sum_x d f (g - h) over the level
    double mass = 0.0;   // level mass
    double theta = 0.0;  // trigger in force when found
};

// First (level, member) pair, scanning levels in ascending value order and
// members in family order, whose mass-weighted conditional violation
// exceeds theta. theta_dynamic divides eps by the current level count.
std::optional<Violation> find_violation(const std::vector<double>& h, const Levels& lv,
                                        const Family& F, const BoundedFn& g, const Dist& d,
                                        double eps, bool theta_dynamic, Ledger& lg) {
    const double theta = theta_dynamic ? eps / static_cast<double>(lv.values.size()) : eps;
    lg.oracle_calls += 1;
    for (std::size_t li = 0; li < lv.values.size(); ++li) {
        for (std::size_t fi = 0; fi < F.size(); ++fi) {
            const auto& f = F.members[fi].values;
            double s = 0.0, mass = 0.0;
            for (int x : lv.members[li]) {
                s += d[x] * f[x] * (g[x] - h[x]);
                mass += d[x];
            }
            lg.post_ops += lv.members[li].size();
            if (std::abs(s) > theta) {
                return Violation{li, fi, s, mass, theta};
            }
        }
    }
    return std::nullopt;
}

struct EngineOutcome {
    int corrections = 0;
    double min_decrease = std::numeric_limits<double>::infinity();
    bool quiet = false;
};

// Level-local correction loop shared by build_mcoa and the partition
// builder. Each iteration re-buckets, re-centers levels on conditional
// means, then fixes the first violating pair with an additive step whose
// magnitude equals the measured conditional violation. Quiet at trigger
// theta means every pair satisfies  mass * |cond violation| <= theta.
EngineOutcome level_correction_loop(std::vector<double>& h, const Family& F,
                                    const BoundedFn& g, const Dist& d,
                                    double eps, bool theta_dynamic,
                                    int max_corrections, Ledger& lg) {
    EngineOutcome out;
    for (;;) {
        Levels lv = bucket(h);
        double before = potential(g, h, d);
        snap_to_means(h, lv, g, d, lg);
        double after = potential(g, h, d);
        if (after > before + kIdTol) {
            throw internal_invariant_error("mean re-centering raised the potential");
        }
        lv = bucket(h);
        auto viol = find_violation(h, lv, F, g, d, eps, theta_dynamic, lg);
        if (!viol) {
            out.quiet = true;
            return out;
        }
        if (out.corrections >= max_corrections) {
            return out;
        }
        const auto& f = F.members[viol->member].values;
        const double step = std::abs(viol->sum) / viol->mass;  // mass > theta/1 > 0
        const double sgn = viol->sum > 0.0 ? 1.0 : -1.0;
        const double phi0 = potential(g, h, d);
        for (int x : lv.members[viol->level]) {
            h[x] = std::clamp(h[x] + sgn * step * f[x], 0.0, 1.0);
        }
        lg.post_ops += lv.members[viol->level].size();
        const double phi1 = potential(g, h, d);
        const double dec = phi0 - phi1;
        const double floor_dec = viol->theta * viol->theta;
        if (dec < floor_dec * (1.0 - 1e-9) - 1e-15) {
            throw internal_invariant_error("correction potential drop below trigger^2");
        }
        out.min_decrease = std::min(out.min_decrease, dec);
        out.corrections += 1;
    }
}

constexpr int kLevelCorrectionCap = 500000;
constexpr int kDiscretizeCycleCap = 64;

}  // namespace

Predictor make_predictor(std::vector<double> table) {
    BoundedFn checked = make_fn(std::move(table));  // reuse range validation
    Predictor p;
    p.table = std::move(checked.values);
    Levels lv = bucket(p.table);
    p.level_values = lv.values;
    return p;
}

double potential(const BoundedFn& g, const std::vector<double>& h, const Dist& d) {
    double s = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) {
        const double r = g[x] - h[x];
        s += d[x] * r * r;
    }
    return s;
}

double ma_violation(const BoundedFn& f, const BoundedFn& g,
                    const std::vector<double>& h, const Dist& d) {
    double s = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) s += d[x] * f[x] * (g[x] - h[x]);
    return std::abs(s);
}

double ma_violation_max(const Family& F, const BoundedFn& g,
                        const std::vector<double>& h, const Dist& d,
                        std::size_t* which) {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t fi = 0; fi < F.size(); ++fi) {
        double v = ma_violation(F.members[fi], g, h, d);
        if (v > best) {
            best = v;
            arg = fi;
        }
    }
    if (which) *which = arg;
    return best;
}

MaResult build_multiaccurate(const Family& F, const BoundedFn& g, const Dist& d,
                             double eps) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must lie in (0,1]");
    MaResult res;
    res.min_step_decrease = std::numeric_limits<double>::infinity();
    std::vector<double> h(d.size(), expect(d, g));
    Ledger lg;
    const int cap = 4 * static_cast<int>(std::ceil(1.0 / (eps * eps)));
    for (;;) {
        lg.oracle_calls += 1;
        double worst = 0.0;
        std::size_t worst_f = 0;
        double first_signed = 0.0;
        bool found = false;
        std::size_t found_f = 0;
        for (std::size_t fi = 0; fi < F.size(); ++fi) {
            double s = 0.0;
            const auto& f = F.members[fi].values;
            for (std::size_t x = 0; x < d.size(); ++x) s += d[x] * f[x] * (g[x] - h[x]);
            lg.post_ops += d.size();
            if (std::abs(s) > worst) {
                worst = std::abs(s);
                worst_f = fi;
            }
            if (!found && std::abs(s) > eps) {
                found = true;
                found_f = fi;
                first_signed = s;
            }
        }
        (void)worst_f;
        if (!found) {
            res.converged = true;
            res.residual = worst;
            break;
        }
        if (res.iterations >= cap) {
            res.converged = false;
            res.residual = worst;
            break;
        }
        const double sgn = first_signed > 0.0 ? 1.0 : -1.0;
        const auto& f = F.members[found_f].values;
        const double phi0 = potential(g, h, d);
        for (std::size_t x = 0; x < d.size(); ++x) {
            h[x] = std::clamp(h[x] + sgn * eps * f[x], 0.0, 1.0);
        }
        lg.post_ops += d.size();
        const double dec = phi0 - potential(g, h, d);
        if (dec < eps * eps * (1.0 - 1e-9) - 1e-15) {
            throw internal_invariant_error("multiaccuracy step potential drop below eps^2");
        }
        res.min_step_decrease = std::min(res.min_step_decrease, dec);
        res.iterations += 1;
    }
    res.h = make_predictor(std::move(h));
    res.h.ledger = lg;
    if (res.iterations == 0) res.min_step_decrease = 0.0;
    return res;
}

double mcoa_error(const Family& F, const BoundedFn& g,
                  const Predictor& h, const Dist& d) {
    Levels lv = bucket(h.table);
    double worst = 0.0;
    for (const auto& fn : F.members) {
        const auto& f = fn.values;
        double agg = 0.0;
        for (std::size_t li = 0; li < lv.values.size(); ++li) {
            double s = 0.0;
            for (int x : lv.members[li]) s += d[x] * f[x] * (g[x] - h.table[x]);
            agg += std::abs(s);
        }
        worst = std::max(worst, agg);
    }
    return worst;
}

MaResult build_mcoa(const Family& F, const BoundedFn& g, const Dist& d, double eps) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must lie in (0,1]");
    MaResult res;
    std::vector<double> h(d.size(), expect(d, g));
    Ledger lg;
    EngineOutcome out =
        level_correction_loop(h, F, g, d, eps, /*theta_dynamic=*/true, kLevelCorrectionCap, lg);
    res.converged = out.quiet;
    res.iterations = out.corrections;
    res.min_step_decrease = out.corrections > 0 ? out.min_decrease : 0.0;
    res.h = make_predictor(std::move(h));
    res.h.ledger = lg;
    res.residual = mcoa_error(F, g, res.h, d);
    return res;
}

std::vector<double> lambda_grid(double lam) {
    if (lam <= 0.0 || lam >= 2.0) throw std::invalid_argument("lambda must lie in (0,2)");
    const double bound = 2.0 / lam;
    int c = static_cast<int>(std::floor(bound));
    if (static_cast<double>(c) == bound) c -= 1;  // strict inequality
    const int n = (c % 2 == 1) ? c : c - 1;       // largest odd below 2/lam
    std::vector<double> grid;
    grid.push_back(0.0);
    for (int j = 1; j <= n; j += 2) {
        grid.push_back(static_cast<double>(j) * lam / 2.0);
    }
    if (grid.back() < 1.0) grid.push_back(1.0);
    return grid;
}

double round_to_grid(double x, const std::vector<double>& grid) {
    auto it = std::lower_bound(grid.begin(), grid.end(), x);
    if (it == grid.begin()) return grid.front();
    if (it == grid.end()) return grid.back();
    const double hi = *it;
    const double lo = *(it - 1);
    // Ties round to the larger value.
    return (x - lo < hi - x) ? lo : hi;
}

Predictor lambda_discretize(const Predictor& h, double lam) {
    const std::vector<double> grid = lambda_grid(lam);
    std::vector<double> table(h.table.size());
    for (std::size_t x = 0; x < table.size(); ++x) {
        table[x] = round_to_grid(h.table[x], grid);
    }
    Predictor out = make_predictor(std::move(table));
    out.ledger = h.ledger;
    out.ledger.post_ops += h.table.size();
    return out;
}

McReport verify_approx_mc(const Partition& p, const Family& F,
                          const BoundedFn& g, const Dist& d,
                          double eps, double gamma) {
    // Independent of every builder helper on purpose: plain loops only.
    McReport rep;
    rep.epsilon = eps;
    rep.gamma = gamma;
    rep.k = p.k;
    rep.violations.assign(p.k, std::vector<double>(F.size(), 0.0));
    rep.passed = true;
    for (int pi = 0; pi < p.k; ++pi) {
        double mass = 0.0;
        double gsum = 0.0;
        for (std::size_t x = 0; x < d.size(); ++x) {
            if (p.assign[x] == pi) {
                mass += d.mass[x];
                gsum += d.mass[x] * g.values[x];
            }
        }
        if (mass < gamma || mass <= 0.0) {
            rep.skipped.push_back(pi);
            if (mass <= 0.0) continue;  // leave violation row at zero
        } else {
            rep.checked.push_back(pi);
        }
        const double vP = gsum / mass;
        for (std::size_t fi = 0; fi < F.size(); ++fi) {
            double s = 0.0;
            for (std::size_t x = 0; x < d.size(); ++x) {
                if (p.assign[x] == pi) {
                    s += d.mass[x] * F.members[fi].values[x] * (g.values[x] - vP);
                }
            }
            const double viol = std::abs(s) / mass;
            rep.violations[pi][fi] = viol;
            if (mass >= gamma) {
                rep.max_violation = std::max(rep.max_violation, viol);
                if (viol > eps) rep.passed = false;
            }
        }
    }
    return rep;
}

McBuildResult build_approx_mc_partition(const Family& F, const BoundedFn& g,
                                        const Dist& d, double eps, double gamma) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must lie in (0,1]");
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0,1]");
    McBuildResult res;
    res.threshold = eps * gamma / 2.0;
    res.lambda = eps / 2.0;
    res.min_step_decrease = std::numeric_limits<double>::infinity();
    res.converged = true;

    std::vector<double> h(d.size(), expect(d, g));
    Ledger lg;
    const std::vector<double> grid = lambda_grid(res.lambda);

    auto run_engine = [&](std::vector<double>& table) {
        EngineOutcome out = level_correction_loop(
            table, F, g, d, res.threshold, /*theta_dynamic=*/false,
            kLevelCorrectionCap - res.corrections, lg);
        res.corrections += out.corrections;
        if (out.corrections > 0) {
            res.min_step_decrease = std::min(res.min_step_decrease, out.min_decrease);
        }
        return out.quiet;
    };

    auto round_and_center = [&](std::vector<double>& table) {
        for (double& v : table) v = round_to_grid(v, grid);
        Levels lv = bucket(table);
        snap_to_means(table, lv, g, d, lg);
    };

    bool settled = false;
    if (run_engine(h)) {
        for (int cycle = 0; cycle < kDiscretizeCycleCap; ++cycle) {
            std::vector<double> rounded = h;
            round_and_center(rounded);
            Levels lv = bucket(rounded);
            Ledger scan_lg;
            if (!find_violation(rounded, lv, F, g, d, res.threshold,
                                /*theta_dynamic=*/false, scan_lg)) {
                lg.absorb(scan_lg);
                h = std::move(rounded);
                settled = true;
                break;
            }
            lg.absorb(scan_lg);
            h = std::move(rounded);
            if (!run_engine(h)) break;
        }
    }
    if (!settled) {
        res.converged = false;
        round_and_center(h);  // emit a partition of bounded size regardless
    }

    Levels lv = bucket(h);
    std::vector<int> assign(d.size(), 0);
    for (std::size_t li = 0; li < lv.values.size(); ++li) {
        for (int x : lv.members[li]) assign[x] = static_cast<int>(li);
    }
    res.part = make_partition(std::move(assign), static_cast<int>(lv.values.size()));
    fill_stats(res.part, g, d);
    res.part.ledger.absorb(lg);
    res.h = make_predictor(std::move(h));
    res.h.ledger = lg;
    res.report = verify_approx_mc(res.part, F, g, d, eps, gamma);
    res.report.iterations = res.corrections;
    if (!res.converged) res.report.passed = false;
    if (res.corrections == 0) res.min_step_decrease = 0.0;
    return res;
}

}  // namespace regkit
