#include "regkit/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace regkit {

namespace {

void need_bits(const Domain& dom, const char* who) {
    if (dom.bits < 0) {
        throw std::invalid_argument(std::string(who) + " needs a bit-structured domain");
    }
}

std::string bits_label(const std::vector<int>& bits) {
    std::string s;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i) s += ",";
        s += "b" + std::to_string(bits[i]);
    }
    return s;
}

// All subsets of {0..bits-1} of size exactly `take`, lexicographic.
void for_each_subset(int bits, int take, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> pick(static_cast<std::size_t>(take));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == take) {
            fn(pick);
            return;
        }
        for (int b = start; b < bits; ++b) {
            pick[static_cast<std::size_t>(depth)] = b;
            rec(b + 1, depth + 1);
        }
    };
    rec(0, 0);
}

}  // namespace

BoundedFn gen_parity(const Domain& dom, const std::vector<int>& bits) {
    need_bits(dom, "parity");
    std::vector<int> use = bits;
    if (use.empty()) {
        for (int b = 0; b < dom.bits; ++b) use.push_back(b);
    }
    std::vector<double> tbl(dom.size);
    for (std::size_t x = 0; x < dom.size; ++x) {
        unsigned p = 0;
        for (int b : use) p ^= (x >> b) & 1u;
        tbl[x] = static_cast<double>(p);
    }
    return make_fn(std::move(tbl));
}

BoundedFn gen_majority(const Domain& dom) {
    need_bits(dom, "majority");
    std::vector<double> tbl(dom.size);
    for (std::size_t x = 0; x < dom.size; ++x) {
        const int pc = __builtin_popcountll(static_cast<unsigned long long>(x));
        tbl[x] = (2 * pc > dom.bits) ? 1.0 : 0.0;
    }
    return make_fn(std::move(tbl));
}

BoundedFn gen_address(const Domain& dom) {
    need_bits(dom, "address");
    int a = 0;
    while (a + 1 + (1 << (a + 1)) <= dom.bits) ++a;
    if (a + (1 << a) > dom.bits) {
        throw std::invalid_argument("domain too narrow for an address function");
    }
    std::vector<double> tbl(dom.size);
    for (std::size_t x = 0; x < dom.size; ++x) {
        const std::size_t idx = x & ((std::size_t{1} << a) - 1);
        tbl[x] = static_cast<double>((x >> (a + idx)) & 1u);
    }
    return make_fn(std::move(tbl));
}

BoundedFn gen_random_boolean(std::size_t n, double bias, Rng& rng) {
    if (bias < 0.0 || bias > 1.0) throw std::invalid_argument("bias outside [0,1]");
    std::vector<double> tbl(n);
    for (double& v : tbl) v = rng.next_bernoulli(bias) ? 1.0 : 0.0;
    return make_fn(std::move(tbl));
}

BoundedFn gen_first_bit_biased(const Domain& dom, double lo, double hi) {
    need_bits(dom, "first-bit bias");
    std::vector<double> tbl(dom.size);
    for (std::size_t x = 0; x < dom.size; ++x) tbl[x] = (x & 1u) ? hi : lo;
    return make_fn(std::move(tbl));
}

Family gen_juntas(const Domain& dom, int arity) {
    need_bits(dom, "junta family");
    if (arity < 0 || arity > dom.bits) throw std::invalid_argument("junta arity out of range");
    if (arity > 4) throw std::invalid_argument("junta arity capped at 4 (2^2^a tables)");
    Family fam;
    add_member(fam, make_fn(std::vector<double>(dom.size, 0.0)), "const0");
    add_member(fam, make_fn(std::vector<double>(dom.size, 1.0)), "const1");
    for (int take = 1; take <= arity; ++take) {
        for_each_subset(dom.bits, take, [&](const std::vector<int>& pick) {
            const std::size_t tables = std::size_t{1} << (std::size_t{1} << take);
            for (std::size_t t = 0; t < tables; ++t) {
                std::vector<double> tbl(dom.size);
                for (std::size_t x = 0; x < dom.size; ++x) {
                    std::size_t idx = 0;
                    for (std::size_t bi = 0; bi < pick.size(); ++bi) {
                        idx |= ((x >> pick[bi]) & 1u) << bi;
                    }
                    tbl[x] = static_cast<double>((t >> idx) & 1u);
                }
                add_member(fam, make_fn(std::move(tbl)),
                           "junta(" + bits_label(pick) + ";t=" + std::to_string(t) + ")");
            }
        });
    }
    return close_family(fam);  // no-op on members, sets the closure flags
}

Family gen_conjunctions(const Domain& dom, int width) {
    need_bits(dom, "conjunction family");
    if (width < 0 || width > dom.bits) throw std::invalid_argument("conjunction width out of range");
    Family fam;
    add_member(fam, make_fn(std::vector<double>(dom.size, 1.0)), "conj()");
    for (int take = 1; take <= width; ++take) {
        for_each_subset(dom.bits, take, [&](const std::vector<int>& pick) {
            const std::size_t signs = std::size_t{1} << take;
            for (std::size_t sg = 0; sg < signs; ++sg) {
                std::vector<double> tbl(dom.size);
                std::string name = "conj(";
                for (std::size_t bi = 0; bi < pick.size(); ++bi) {
                    if (bi) name += ",";
                    if (!((sg >> bi) & 1u)) name += "!";
                    name += "b" + std::to_string(pick[bi]);
                }
                name += ")";
                for (std::size_t x = 0; x < dom.size; ++x) {
                    bool all = true;
                    for (std::size_t bi = 0; bi < pick.size(); ++bi) {
                        const unsigned want = (sg >> bi) & 1u;
                        if (((x >> pick[bi]) & 1u) != want) {
                            all = false;
                            break;
                        }
                    }
                    tbl[x] = all ? 1.0 : 0.0;
                }
                add_member(fam, make_fn(std::move(tbl)), name);
            }
        });
    }
    return close_family(fam);
}

Family gen_parity_family(const Domain& dom, int width) {
    need_bits(dom, "parity family");
    if (width < 0 || width > dom.bits) throw std::invalid_argument("parity width out of range");
    Family fam;
    for (int take = 1; take <= width; ++take) {
        for_each_subset(dom.bits, take, [&](const std::vector<int>& pick) {
            add_member(fam, gen_parity(dom, pick), "parity(" + bits_label(pick) + ")");
        });
    }
    return close_family(fam);
}

Dist gen_product_biased(const Domain& dom, const std::vector<double>& bias) {
    need_bits(dom, "product distribution");
    std::vector<double> per(static_cast<std::size_t>(dom.bits));
    if (bias.size() == 1) {
        std::fill(per.begin(), per.end(), bias[0]);
    } else if (bias.size() == per.size()) {
        per = bias;
    } else {
        throw std::invalid_argument("need one bias or one per bit");
    }
    for (double b : per) {
        if (b < 0.0 || b > 1.0) throw std::invalid_argument("bias outside [0,1]");
    }
    std::vector<double> mass(dom.size);
    for (std::size_t x = 0; x < dom.size; ++x) {
        double m = 1.0;
        for (int b = 0; b < dom.bits; ++b) {
            m *= ((x >> b) & 1u) ? per[static_cast<std::size_t>(b)]
                                 : 1.0 - per[static_cast<std::size_t>(b)];
        }
        mass[x] = m;
    }
    return make_dist(std::move(mass));
}

JointDist gen_random_joint(std::size_t n, int L, Rng& rng) {
    // Exponential weights normalized per row put the rows flat on the
    // simplex.
    auto simplex = [&](std::size_t len) {
        std::vector<double> w(len);
        double s = 0.0;
        for (double& v : w) {
            v = -std::log(1.0 - rng.next_double());
            s += v;
        }
        for (double& v : w) v /= s;
        return w;
    };
    Dist marg = make_dist(simplex(n));
    std::vector<double> cond(n * static_cast<std::size_t>(L));
    for (std::size_t x = 0; x < n; ++x) {
        std::vector<double> row = simplex(static_cast<std::size_t>(L));
        for (int y = 0; y < L; ++y) cond[x * L + y] = row[static_cast<std::size_t>(y)];
    }
    return make_joint(L, std::move(marg), std::move(cond));
}

JointDist gen_bit_biased_joint(const Domain& dom, Dist marg, double lo, double hi) {
    need_bits(dom, "bit-biased joint");
    if (marg.size() != dom.size) throw std::invalid_argument("marginal size mismatch");
    std::vector<double> cond(dom.size * 2);
    for (std::size_t x = 0; x < dom.size; ++x) {
        const double p1 = (x & 1u) ? hi : lo;
        cond[x * 2 + 1] = p1;
        cond[x * 2 + 0] = 1.0 - p1;
    }
    return make_joint(2, std::move(marg), std::move(cond));
}

Family lift_to_union(const Family& base, std::size_t copies) {
    if (copies == 0) throw std::invalid_argument("need at least one copy");
    const std::size_t n = base.domain_size();
    Family out;
    for (std::size_t fi = 0; fi < base.size(); ++fi) {
        std::vector<double> tbl(n * copies);
        for (std::size_t i = 0; i < tbl.size(); ++i) tbl[i] = base.members[fi][i % n];
        add_member(out, make_fn(std::move(tbl)), base.names[fi]);
    }
    out.closed_under_negation = base.closed_under_negation;
    out.contains_constants = base.contains_constants;
    return out;
}

LabeledFamily product_family_from(const Family& base, int L) {
    if (L < 2) throw std::invalid_argument("need at least two labels");
    const std::size_t n = base.domain_size();
    std::vector<std::vector<double>> members;
    std::vector<std::string> names;
    auto push = [&](std::vector<double> tbl, std::string name) {
        for (const auto& m : members) {
            if (m == tbl) return;
        }
        members.push_back(std::move(tbl));
        names.push_back(std::move(name));
    };
    for (int y = 0; y < L; ++y) {
        std::vector<double> tbl(n * static_cast<std::size_t>(L), 0.0);
        for (std::size_t x = 0; x < n; ++x) tbl[x * L + y] = 1.0;
        push(std::move(tbl), "label=" + std::to_string(y));
    }
    for (std::size_t fi = 0; fi < base.size(); ++fi) {
        std::vector<double> blind(n * static_cast<std::size_t>(L));
        for (std::size_t x = 0; x < n; ++x) {
            for (int y = 0; y < L; ++y) blind[x * L + y] = base.members[fi][x];
        }
        push(std::move(blind), base.names[fi]);
        for (int y = 0; y < L; ++y) {
            std::vector<double> prod(n * static_cast<std::size_t>(L), 0.0);
            for (std::size_t x = 0; x < n; ++x) prod[x * L + y] = base.members[fi][x];
            push(std::move(prod), base.names[fi] + "*label=" + std::to_string(y));
        }
    }
    return make_labeled_family(L, std::move(members), std::move(names));
}

}  // namespace regkit
