#include "regkit/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace regkit {

namespace {

constexpr std::size_t kMaxEvalProducts = std::size_t{1} << 26;

// ---------------------------------------------------------------- json access

const Json& at(const Json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw config_error(std::string("missing artifact field '") + key + "'");
    }
    return obj.at(key);
}

double jnum(const Json& obj, const char* key) {
    const Json& v = at(obj, key);
    if (!v.is_number()) throw config_error(std::string("field '") + key + "' is not numeric");
    return v.get<double>();
}

bool jbool(const Json& obj, const char* key) {
    const Json& v = at(obj, key);
    if (!v.is_boolean()) throw config_error(std::string("field '") + key + "' is not boolean");
    return v.get<bool>();
}

std::vector<double> jvec(const Json& obj, const char* key) {
    const Json& v = at(obj, key);
    if (!v.is_array()) throw config_error(std::string("field '") + key + "' is not an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) throw config_error(std::string("non-numeric entry in '") + key + "'");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<int> jivec(const Json& obj, const char* key) {
    std::vector<int> out;
    for (double v : jvec(obj, key)) out.push_back(static_cast<int>(v));
    return out;
}

Json arr(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

Json iarr(const std::vector<int>& v) {
    Json a = Json::array();
    for (int x : v) a.push_back(x);
    return a;
}

// ----------------------------------------------------------- artifact writers

Json mc_artifacts(const McBuildResult& r) {
    Json m;
    m["assign"] = iarr(r.part.assign);
    m["k"] = r.part.k;
    Json stats = Json::array();
    for (int pi = 0; pi < r.part.k; ++pi) {
        const PieceStats& s = r.part.stats[static_cast<std::size_t>(pi)];
        Json row;
        row["piece"] = pi;
        row["v"] = s.v;
        row["b"] = s.b;
        row["eta"] = s.eta;
        row["m"] = s.m;
        row["degenerate"] = s.degenerate;
        stats.push_back(row);
    }
    m["stats"] = stats;
    m["predictor"] = arr(r.h.table);
    m["threshold"] = r.threshold;
    m["lambda"] = r.lambda;
    m["corrections"] = r.corrections;
    m["min_step_decrease"] = r.min_step_decrease;
    m["converged"] = r.converged;
    m["max_violation"] = r.report.max_violation;
    return m;
}

Json hardcore_pieces_artifacts(const std::vector<HardcorePiece>& pieces) {
    Json out = Json::array();
    for (const auto& hp : pieces) {
        Json row;
        row["piece"] = hp.piece;
        row["degenerate"] = hp.degenerate;
        row["qualifying"] = hp.qualifying;
        row["density_claim"] = hp.density_claim;
        row["eps_claim"] = hp.eps_claim;
        row["agreement_measured"] = hp.agreement_measured;
        row["H"] = hp.degenerate ? Json::array() : arr(hp.H.mass);
        out.push_back(row);
    }
    return out;
}

Json balance_artifacts(const BalanceReport& b) {
    Json out;
    out["avg_b"] = b.avg_b;
    out["avg_b_good"] = b.avg_b_good;
    out["good_mass"] = b.good_mass;
    out["majority_agreement"] = b.majority_agreement;
    out["identity_gap"] = b.identity_gap;
    out["measured_hardness"] = b.measured_hardness;
    out["bound"] = b.bound;
    out["bound_applies"] = b.bound_applies;
    out["bound_holds"] = b.bound_holds;
    return out;
}

Json glued_artifacts(const GluedHardcore& gl) {
    Json out;
    out["H"] = arr(gl.H.mass);
    out["good_pieces"] = iarr(gl.good_pieces);
    out["good_mass"] = gl.good_mass;
    out["density_measured"] = gl.density_measured;
    out["agreement_measured"] = gl.agreement_measured;
    out["rescaled"] = gl.rescaled;
    out["rescale_tv"] = gl.rescale_tv;
    return out;
}

Json set_artifacts(const SetSample& s) {
    Json out;
    out["members"] = iarr(s.members);
    out["density"] = s.density;
    out["density_claim"] = s.density_claim;
    out["agreement"] = s.agreement;
    out["agreement_bound"] = s.agreement_bound;
    out["size_condition_ok"] = s.size_condition_ok;
    out["retries"] = s.retries;
    return out;
}

Json pame_pp_artifacts(const PamePpResult& pp) {
    Json out;
    out["assign"] = iarr(pp.mc.part.assign);
    out["k"] = pp.mc.part.k;
    out["etas"] = arr(pp.mc.etas);
    Json rows = Json::array();
    for (const auto& r : pp.mc.rows) rows.push_back(arr(r));
    out["rows"] = rows;
    out["eps_label"] = pp.eps_label;
    out["induced_size"] = pp.induced.size();
    out["converged"] = pp.mc.converged;
    out["corrections"] = pp.mc.corrections;
    out["min_step_decrease"] = pp.mc.min_step_decrease;
    out["max_violation"] = pp.mc.report.max_violation;
    Json wits = Json::array();
    for (const auto& w : pp.witnesses) {
        Json row;
        row["piece"] = w.piece;
        row["degenerate"] = w.degenerate;
        row["qualifying"] = w.qualifying;
        row["eta"] = w.eta;
        row["row"] = arr(w.row);
        row["m"] = w.m;
        row["k_claim"] = w.k_claim;
        row["eps_claim"] = w.eps_claim;
        row["measured_ame"] = w.measured_ame;
        row["measured_advantage"] = w.measured_advantage;
        wits.push_back(row);
    }
    out["witnesses"] = wits;
    return out;
}

Json dmt_pp_artifacts(const DmtPpResult& pp) {
    Json out;
    out["ns"] = pp.inst.ns;
    out["nv"] = pp.inst.nv;
    out["mc"] = mc_artifacts(pp.mc);
    Json pieces = Json::array();
    for (const auto& pc : pp.pieces) {
        Json row;
        row["piece"] = pc.piece;
        row["degenerate"] = pc.degenerate;
        row["one_sided"] = pc.one_sided;
        row["qualifying"] = pc.qualifying;
        row["eta"] = pc.eta;
        row["v_p"] = pc.v_p;
        row["s_mass"] = pc.s_mass;
        row["v_mass"] = pc.v_mass;
        row["eps_claim"] = pc.eps_claim;
        row["advantage_measured"] = pc.advantage_measured;
        row["v_p_gap"] = pc.v_p_closed_form_gap;
        row["delta_p_gap"] = pc.delta_p_gap;
        pieces.push_back(row);
    }
    out["pieces"] = pieces;
    return out;
}

// ------------------------------------------------------------- recomputations

struct PieceAgg {
    double mass = 0.0;
    double gsum = 0.0;
};

std::vector<PieceAgg> piece_aggregates(const std::vector<int>& assign, int k,
                                       const std::vector<double>& g,
                                       const std::vector<double>& d) {
    std::vector<PieceAgg> agg(static_cast<std::size_t>(k));
    for (std::size_t x = 0; x < assign.size(); ++x) {
        PieceAgg& a = agg[static_cast<std::size_t>(assign[x])];
        a.mass += d[x];
        a.gsum += d[x] * g[x];
    }
    return agg;
}

double recompute_mc_violation(const std::vector<int>& assign, int k, const Family& F,
                              const std::vector<double>& g, const std::vector<double>& d,
                              double gamma) {
    const std::vector<PieceAgg> agg = piece_aggregates(assign, k, g, d);
    double worst = 0.0;
    for (int pi = 0; pi < k; ++pi) {
        const PieceAgg& a = agg[static_cast<std::size_t>(pi)];
        if (a.mass < gamma || a.mass <= 0.0) continue;
        const double vP = a.gsum / a.mass;
        for (const auto& fn : F.members) {
            double s = 0.0;
            for (std::size_t x = 0; x < assign.size(); ++x) {
                if (assign[x] == pi) s += d[x] * fn[x] * (g[x] - vP);
            }
            worst = std::max(worst, std::abs(s) / a.mass);
        }
    }
    return worst;
}

// --------------------------------------------------------------- check blocks

// Partition-level checks shared by every pipeline that embeds an "mc"
// block. Returns false when the assignment itself is unusable.
bool verify_mc_block(const std::string& px, const Json& m, const Family& F,
                     const std::vector<double>& g, const std::vector<double>& d,
                     double eps, double gamma, bool bounded_k,
                     Json& checks, bool& overall) {
    const std::vector<int> assign = jivec(m, "assign");
    const int k = static_cast<int>(jnum(m, "k"));
    bool in_range = assign.size() == d.size() && k > 0;
    for (int a : assign) {
        if (a < 0 || a >= k) in_range = false;
    }
    check_true(checks, overall, px + ".assign_in_range", in_range);
    if (!in_range) return false;

    const Json& stats = at(m, "stats");
    check_true(checks, overall, px + ".stats_rows", static_cast<int>(stats.size()) == k);
    if (static_cast<int>(stats.size()) != k) return false;

    const std::vector<PieceAgg> agg = piece_aggregates(assign, k, g, d);
    double v_diff = 0.0, eta_diff = 0.0, b_gap = 0.0, m_gap = 0.0;
    bool flags_ok = true;
    for (int pi = 0; pi < k; ++pi) {
        const Json& row = stats.at(static_cast<std::size_t>(pi));
        const double sv = jnum(row, "v");
        const double sb = jnum(row, "b");
        const double seta = jnum(row, "eta");
        const double sm = jnum(row, "m");
        const bool sdeg = jbool(row, "degenerate");
        const PieceAgg& a = agg[static_cast<std::size_t>(pi)];
        if (sdeg != (a.mass <= 0.0)) flags_ok = false;
        eta_diff = std::max(eta_diff, std::abs(seta - a.mass));
        if (a.mass > 0.0) v_diff = std::max(v_diff, std::abs(sv - a.gsum / a.mass));
        b_gap = std::max(b_gap, std::abs(sb - std::min(sv, 1.0 - sv)));
        m_gap = std::max(m_gap, std::abs(sm - (1.0 - sb)));
    }
    check_true(checks, overall, px + ".degenerate_flags", flags_ok);
    check_le(checks, overall, px + ".stats_eta_match", eta_diff, 0.0, kSumTol);
    check_le(checks, overall, px + ".stats_v_match", v_diff, 0.0, kSumTol);
    check_le(checks, overall, px + ".b_identity", b_gap, 0.0, kIdTol);
    check_le(checks, overall, px + ".m_identity", m_gap, 0.0, kIdTol);

    const double viol = recompute_mc_violation(assign, k, F, g, d, gamma);
    check_le(checks, overall, px + ".max_violation_le_eps", viol, eps, kSumTol);
    check_eq(checks, overall, px + ".max_violation_matches", jnum(m, "max_violation"), viol,
             kSumTol);

    if (bounded_k) {
        check_le(checks, overall, px + ".k_le_bound", static_cast<double>(k),
                 4.0 / eps + 2.0);
    }
    const double threshold = jnum(m, "threshold");
    check_eq(checks, overall, px + ".threshold_identity", threshold, eps * gamma / 2.0, kIdTol);
    const int corrections = static_cast<int>(jnum(m, "corrections"));
    const double min_dec = jnum(m, "min_step_decrease");
    const bool floor_ok =
        corrections == 0 || min_dec >= threshold * threshold * (1.0 - 1e-9) - 1e-15;
    push_check(checks, overall, px + ".step_decrease_floor", min_dec, ">=",
               threshold * threshold, floor_ok);
    check_true(checks, overall, px + ".converged", jbool(m, "converged"));

    const std::vector<double> pred = jvec(m, "predictor");
    double pred_gap = 0.0;
    if (pred.size() == d.size()) {
        for (std::size_t x = 0; x < pred.size(); ++x) {
            const Json& row = stats.at(static_cast<std::size_t>(assign[x]));
            if (!jbool(row, "degenerate")) {
                pred_gap = std::max(pred_gap, std::abs(pred[x] - jnum(row, "v")));
            }
        }
    } else {
        pred_gap = 1.0;
    }
    check_le(checks, overall, px + ".predictor_matches_stats", pred_gap, 0.0, kSumTol);
    return true;
}

void verify_hardcore_pieces(const std::string& px, const Json& pieces,
                            const std::vector<int>& assign, const Family& F,
                            const BoundedFn& g, const Dist& d, double eps,
                            Json& checks, bool& overall) {
    for (const auto& row : pieces) {
        const int pi = static_cast<int>(jnum(row, "piece"));
        const std::string tag = px + ".piece" + std::to_string(pi);
        if (jbool(row, "degenerate")) continue;
        const std::vector<double> H = jvec(row, "H");
        if (H.size() != d.size()) {
            check_true(checks, overall, tag + ".H_length", false);
            continue;
        }
        double off = 0.0, total = 0.0, balance = 0.0, mass = 0.0;
        for (std::size_t x = 0; x < H.size(); ++x) {
            total += H[x];
            balance += H[x] * g[x];
            if (assign[x] != pi) off += std::abs(H[x]);
            if (assign[x] == pi) mass += d[x];
        }
        check_le(checks, overall, tag + ".support", off, 0.0, kIdTol);
        check_eq(checks, overall, tag + ".normalized", total, 1.0, kSumTol);
        check_eq(checks, overall, tag + ".balanced", balance, 0.5, kSumTol);

        const double claim = jnum(row, "density_claim");
        double excess = -std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < H.size(); ++x) {
            if (assign[x] == pi && mass > 0.0) {
                excess = std::max(excess, claim * H[x] - d[x] / mass);
            }
        }
        check_le(checks, overall, tag + ".density_claim", excess, 0.0, kSumTol);

        const double agreement = best_agreement(F, g, Dist{H});
        check_eq(checks, overall, tag + ".agreement_matches", jnum(row, "agreement_measured"),
                 agreement, kSumTol);
        if (jbool(row, "qualifying")) {
            check_le(checks, overall, tag + ".agreement_le_bound", agreement,
                     0.5 + jnum(row, "eps_claim"), kSumTol);
        }
        (void)eps;
    }
}

// Rebuilds the piecewise majority vote from stored stats.
BoundedFn vote_from_stats(const Json& m, const std::vector<int>& assign) {
    const Json& stats = at(m, "stats");
    std::vector<double> vote(assign.size(), 0.0);
    for (std::size_t x = 0; x < assign.size(); ++x) {
        const Json& row = stats.at(static_cast<std::size_t>(assign[x]));
        vote[x] = jnum(row, "v") >= 0.5 ? 1.0 : 0.0;
    }
    return make_fn(std::move(vote));
}

void verify_balance_block(const std::string& px, const Json& bal, const Json& m,
                          const std::vector<int>& assign, const Family& F,
                          const BoundedFn& g, const Dist& d, double delta,
                          double gamma, double tau, Json& checks, bool& overall) {
    const Json& stats = at(m, "stats");
    const int k = static_cast<int>(jnum(m, "k"));
    double avg_b = 0.0, avg_b_good = 0.0, good_mass = 0.0;
    for (const auto& row : stats) {
        if (jbool(row, "degenerate")) continue;
        const double b = jnum(row, "b");
        const double eta = jnum(row, "eta");
        avg_b += eta * b;
        if (eta >= gamma && b >= tau) {
            avg_b_good += eta * b;
            good_mass += eta;
        }
    }
    check_eq(checks, overall, px + ".avg_b_match", jnum(bal, "avg_b"), avg_b, kSumTol);
    check_eq(checks, overall, px + ".good_mass_match", jnum(bal, "good_mass"), good_mass,
             kSumTol);

    BoundedFn vote = vote_from_stats(m, assign);
    const double agree = yao_agreement(vote, g, d);
    check_eq(checks, overall, px + ".majority_agreement_match",
             jnum(bal, "majority_agreement"), agree, kSumTol);
    check_le(checks, overall, px + ".vote_identity", std::abs(agree - (1.0 - avg_b)), 0.0,
             kSumTol);

    Family with_vote = F;
    add_member(with_vote, vote, "piecewise_majority");
    const double hardness = hardness_of(with_vote, g, d);
    check_eq(checks, overall, px + ".hardness_match", jnum(bal, "measured_hardness"),
             hardness, kSumTol);
    if (hardness >= delta) {
        const double bound = delta - gamma * static_cast<double>(k) - tau;
        check_ge(checks, overall, px + ".avg_balance_bound", avg_b_good, bound, kIdTol);
    }
}

void verify_glued_block(const std::string& px, const Json& gl, const Json& m,
                        const std::vector<int>& assign, const Family& F,
                        const BoundedFn& g, const Dist& d, double eps, double delta,
                        double c_density, double c_hardness, bool rescaled_allowed,
                        Json& checks, bool& overall) {
    const std::vector<double> H = jvec(gl, "H");
    if (H.size() != d.size()) {
        check_true(checks, overall, px + ".H_length", false);
        return;
    }
    check_eq(checks, overall, px + ".normalized", total_mass(H), 1.0, kSumTol);

    const std::vector<int> good = jivec(gl, "good_pieces");
    std::set<int> good_set(good.begin(), good.end());
    double off = 0.0;
    for (std::size_t x = 0; x < H.size(); ++x) {
        if (!good_set.count(assign[x])) off += std::abs(H[x]);
    }
    check_le(checks, overall, px + ".support_good", off, 0.0, kIdTol);

    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < H.size(); ++x) {
        if (H[x] > 0.0) rho = std::min(rho, d[x] / H[x]);
    }
    check_eq(checks, overall, px + ".density_matches", jnum(gl, "density_measured"), rho,
             kSumTol);

    Family with_vote = F;
    add_member(with_vote, vote_from_stats(m, assign), "piecewise_majority");
    const double agreement = best_agreement(with_vote, g, Dist{H});
    check_eq(checks, overall, px + ".agreement_matches", jnum(gl, "agreement_measured"),
             agreement, kSumTol);

    check_ge(checks, overall, px + ".density_claim", rho,
             2.0 * delta * (1.0 - c_density * eps), kSumTol);
    check_le(checks, overall, px + ".agreement_claim", agreement, 0.5 + c_hardness * eps,
             kSumTol);
    if (!rescaled_allowed) {
        check_true(checks, overall, px + ".not_rescaled", !jbool(gl, "rescaled"));
    }
}

void verify_set_block(const std::string& px, const Json& s, const Family& F,
                      const BoundedFn& g, const Dist& d, Json& checks, bool& overall) {
    const std::vector<int> members = jivec(s, "members");
    bool in_range = !members.empty();
    for (int x : members) {
        if (x < 0 || static_cast<std::size_t>(x) >= d.size()) in_range = false;
    }
    check_true(checks, overall, px + ".members_in_range", in_range);
    if (!in_range) return;
    check_eq(checks, overall, px + ".density_matches", jnum(s, "density"),
             static_cast<double>(members.size()) / static_cast<double>(d.size()), kIdTol);
    std::vector<double> w(d.size(), 0.0);
    for (int x : members) w[static_cast<std::size_t>(x)] = 1.0;
    const double agreement = best_agreement(F, g, make_dist(std::move(w)));
    check_eq(checks, overall, px + ".agreement_matches", jnum(s, "agreement"), agreement,
             kSumTol);
    check_le(checks, overall, px + ".agreement_le_bound", agreement,
             jnum(s, "agreement_bound"), kSumTol);
    check_true(checks, overall, px + ".size_condition", jbool(s, "size_condition_ok"));
}

// Rebuilds the label-slice family that pame_pp partitions against.
Family induced_from_product(const LabeledFamily& Fprod, std::size_t n) {
    Family induced;
    for (std::size_t fi = 0; fi < Fprod.size(); ++fi) {
        for (int y = 0; y < Fprod.L; ++y) {
            std::vector<double> slice(n);
            for (std::size_t x = 0; x < n; ++x) {
                slice[x] = Fprod.members[fi][x * static_cast<std::size_t>(Fprod.L) + y];
            }
            add_member(induced, make_fn(std::move(slice)),
                       Fprod.names[fi] + "[y=" + std::to_string(y) + "]");
        }
    }
    return close_family(induced);
}

bool verify_pame_pp_block(const std::string& px, const Json& pp, const LabeledFamily& Fprod,
                          const JointDist& j, double eps, double gamma,
                          Json& checks, bool& overall) {
    const std::vector<int> assign = jivec(pp, "assign");
    const int k = static_cast<int>(jnum(pp, "k"));
    const int L = j.L;
    bool in_range = assign.size() == j.size() && k > 0;
    for (int a : assign) {
        if (a < 0 || a >= k) in_range = false;
    }
    check_true(checks, overall, px + ".assign_in_range", in_range);
    if (!in_range) return false;

    check_eq(checks, overall, px + ".eps_label_identity", jnum(pp, "eps_label"),
             eps / static_cast<double>(L), kIdTol);

    // Piece masses and conditional mean rows from scratch.
    std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(L), 0.0));
    for (std::size_t x = 0; x < j.size(); ++x) {
        const auto pi = static_cast<std::size_t>(assign[x]);
        mass[pi] += j.marg[x];
        for (int y = 0; y < L; ++y) rows[pi][static_cast<std::size_t>(y)] += j.marg[x] * j.cond_at(x, y);
    }
    for (std::size_t pi = 0; pi < rows.size(); ++pi) {
        if (mass[pi] > 0.0) {
            for (double& c : rows[pi]) c /= mass[pi];
        }
    }
    const std::vector<double> etas = jvec(pp, "etas");
    double eta_diff = etas.size() == mass.size() ? 0.0 : 1.0;
    if (etas.size() == mass.size()) {
        for (std::size_t pi = 0; pi < mass.size(); ++pi) {
            eta_diff = std::max(eta_diff, std::abs(etas[pi] - mass[pi]));
        }
    }
    check_le(checks, overall, px + ".etas_match", eta_diff, 0.0, kSumTol);

    // Calibration certificate per label slice.
    const Family induced = induced_from_product(Fprod, j.size());
    const double eps_label = eps / static_cast<double>(L);
    double worst = 0.0;
    for (int pi = 0; pi < k; ++pi) {
        if (mass[static_cast<std::size_t>(pi)] < gamma ||
            mass[static_cast<std::size_t>(pi)] <= 0.0) {
            continue;
        }
        for (const auto& fn : induced.members) {
            for (int y = 0; y < L; ++y) {
                double s = 0.0;
                for (std::size_t x = 0; x < j.size(); ++x) {
                    if (assign[x] == pi) {
                        s += j.marg[x] * fn[x] *
                             (j.cond_at(x, y) - rows[static_cast<std::size_t>(pi)][static_cast<std::size_t>(y)]);
                    }
                }
                worst = std::max(worst, std::abs(s) / mass[static_cast<std::size_t>(pi)]);
            }
        }
    }
    check_le(checks, overall, px + ".max_violation_le_eps_label", worst, eps_label, kSumTol);
    const bool converged = jbool(pp, "converged");
    check_true(checks, overall, px + ".converged", converged);

    const Json& wits = at(pp, "witnesses");
    for (const auto& row : wits) {
        const int pi = static_cast<int>(jnum(row, "piece"));
        const std::string tag = px + ".piece" + std::to_string(pi);
        if (jbool(row, "degenerate")) continue;
        const std::vector<double> wrow = jvec(row, "row");
        if (wrow.size() != static_cast<std::size_t>(L) || pi < 0 || pi >= k) {
            check_true(checks, overall, tag + ".row_shape", false);
            continue;
        }
        double total = 0.0, wmax = 0.0, diff = 0.0;
        for (int y = 0; y < L; ++y) {
            total += wrow[static_cast<std::size_t>(y)];
            wmax = std::max(wmax, wrow[static_cast<std::size_t>(y)]);
            diff = std::max(diff, std::abs(wrow[static_cast<std::size_t>(y)] -
                                           rows[static_cast<std::size_t>(pi)][static_cast<std::size_t>(y)]));
        }
        check_eq(checks, overall, tag + ".row_stochastic", total, 1.0, kSumTol);
        check_le(checks, overall, tag + ".row_matches", diff, 0.0, kSumTol);
        check_eq(checks, overall, tag + ".m_identity", jnum(row, "m"), wmax, kIdTol);
        check_eq(checks, overall, tag + ".k_claim_identity", jnum(row, "k_claim"),
                 std::log2(1.0 / wmax), kSumTol);
        check_eq(checks, overall, tag + ".ame_identity", jnum(row, "measured_ame"),
                 jnum(row, "k_claim"), kSumTol);

        double adv = 0.0;
        const double pmass = mass[static_cast<std::size_t>(pi)];
        if (pmass > 0.0) {
            for (std::size_t fi = 0; fi < Fprod.size(); ++fi) {
                double s = 0.0;
                for (std::size_t x = 0; x < j.size(); ++x) {
                    if (assign[x] != pi) continue;
                    for (int y = 0; y < L; ++y) {
                        s += (j.marg[x] / pmass) *
                             Fprod.members[fi][x * static_cast<std::size_t>(L) + y] *
                             (j.cond_at(x, y) - wrow[static_cast<std::size_t>(y)]);
                    }
                }
                adv = std::max(adv, std::abs(s));
            }
        }
        check_eq(checks, overall, tag + ".advantage_matches", jnum(row, "measured_advantage"),
                 adv, kSumTol);
        if (jbool(row, "qualifying") && converged) {
            check_le(checks, overall, tag + ".advantage_le_eps", adv, jnum(row, "eps_claim"),
                     kSumTol);
        }
    }
    return true;
}

// ------------------------------------------------------------ instance assembly

Dist dist_from_spec(const DistSpec& spec, const Domain& dom, const char* where) {
    if (spec.kind == "uniform" || spec.kind.empty()) return uniform_dist(dom.size);
    if (spec.kind == "explicit") {
        if (spec.mass.size() != dom.size) {
            throw config_error(std::string(where) + ": mass length does not match the domain");
        }
        return make_dist(spec.mass);
    }
    if (spec.kind == "product_biased") return gen_product_biased(dom, spec.bias);
    throw config_error(std::string(where) + ": unknown kind");
}

bool joint_target(const std::string& kind) {
    return kind == "joint_explicit" || kind == "joint_random" || kind == "joint_bit_biased";
}

}  // namespace

Instance gen_instance(const ExperimentConfig& cfg) {
    Instance inst;
    inst.dom = cfg.domain.bits >= 0 ? Domain::bitstrings(cfg.domain.bits)
                                    : Domain::indexed(cfg.domain.size);
    if (inst.dom.size > (std::size_t{1} << 20)) {
        throw config_error("domain too large for exhaustive checking; stay at or below 2^20 points");
    }

    const FamilySpec& fs = cfg.family;
    if (fs.kind == "juntas") {
        inst.F = gen_juntas(inst.dom, fs.arity);
    } else if (fs.kind == "conjunctions") {
        inst.F = gen_conjunctions(inst.dom, fs.arity);
    } else if (fs.kind == "parity_family") {
        inst.F = gen_parity_family(inst.dom, fs.arity);
    } else {
        Family f;
        for (std::size_t i = 0; i < fs.tables.size(); ++i) {
            std::string name = i < fs.names.size() ? fs.names[i] : "f" + std::to_string(i);
            add_member(f, make_fn(fs.tables[i]), std::move(name));
        }
        if (f.members.empty()) throw config_error("explicit family needs at least one table");
        inst.F = close_family(f);
    }
    if (inst.dom.size * inst.F.size() > kMaxEvalProducts) {
        throw config_error(
            "instance too large: |domain| * |family| exceeds 2^26 evaluation products; "
            "shrink the domain, lower the family arity, or trim explicit tables");
    }

    const bool dmt = cfg.pipeline == "dmt_pp" || cfg.pipeline == "dmt_recover";
    if (dmt) {
        inst.sdist = dist_from_spec(cfg.sdist, inst.dom, "sdist");
        inst.vdist = dist_from_spec(cfg.vdist, inst.dom, "vdist");
        inst.d = uniform_dist(inst.dom.size);
        return inst;
    }

    inst.d = dist_from_spec(cfg.distribution, inst.dom, "distribution");

    const std::string& kind = cfg.target.kind;
    const bool pame = cfg.pipeline == "pame_pp" || cfg.pipeline == "pame_recover";
    if (pame != joint_target(kind)) {
        throw config_error(pame ? "this pipeline needs a joint_* target"
                                : "joint targets only fit the pame pipelines");
    }
    Rng rng = substream(cfg.seed, "target");
    if (kind == "parity") {
        inst.g = gen_parity(inst.dom, cfg.target.bits_used);
    } else if (kind == "majority") {
        inst.g = gen_majority(inst.dom);
    } else if (kind == "address") {
        inst.g = gen_address(inst.dom);
    } else if (kind == "random_boolean") {
        inst.g = gen_random_boolean(inst.dom.size, cfg.target.bias, rng);
    } else if (kind == "explicit") {
        if (cfg.target.table.size() != inst.dom.size) {
            throw config_error("target table length does not match the domain");
        }
        inst.g = make_fn(cfg.target.table);
    } else if (kind == "first_bit_biased") {
        inst.g = gen_first_bit_biased(inst.dom, cfg.target.lo, cfg.target.hi);
    } else if (kind == "joint_explicit") {
        inst.joint = make_joint(cfg.labels, inst.d, cfg.target.cond);
        inst.has_joint = true;
    } else if (kind == "joint_bit_biased") {
        if (cfg.labels != 2) throw config_error("joint_bit_biased needs labels = 2");
        inst.joint = gen_bit_biased_joint(inst.dom, inst.d, cfg.target.lo, cfg.target.hi);
        inst.has_joint = true;
    } else if (kind == "joint_random") {
        inst.joint = gen_random_joint(inst.dom.size, cfg.labels, rng);
        inst.d = inst.joint.marg;  // the joint carries its own marginal
        inst.has_joint = true;
    }
    if (inst.has_joint) inst.Fprod = product_family_from(inst.F, cfg.labels);
    return inst;
}

namespace {

Json instance_summary(const ExperimentConfig& cfg, const Instance& inst) {
    Json s;
    s["domain_size"] = inst.dom.size;
    s["domain_bits"] = inst.dom.bits;
    s["family_kind"] = cfg.family.kind;
    s["family_size"] = inst.F.size();
    s["target_kind"] = cfg.target.kind;
    if (inst.has_joint) {
        s["labels"] = inst.joint.L;
        s["product_family_size"] = inst.Fprod.size();
    }
    if (cfg.pipeline == "dmt_pp" || cfg.pipeline == "dmt_recover") {
        s["union_size"] = 2 * inst.dom.size;
    }
    return s;
}

Json ledger_json(const Ledger& lg) {
    Json out;
    out["oracle_calls"] = lg.oracle_calls;
    out["post_ops"] = lg.post_ops;
    out["pieces"] = lg.pieces;
    return out;
}

// -------------------------------------------------------------- build dispatch

Json build_artifacts(const ExperimentConfig& cfg, const Instance& inst, Ledger& led) {
    Json art;
    if (cfg.pipeline == "ma") {
        MaResult r = build_multiaccurate(inst.F, inst.g, inst.d, cfg.epsilon);
        art["predictor"] = arr(r.h.table);
        art["converged"] = r.converged;
        art["iterations"] = r.iterations;
        art["residual"] = r.residual;
        art["min_step_decrease"] = r.min_step_decrease;
        led.absorb(r.h.ledger);
    } else if (cfg.pipeline == "mc") {
        McBuildResult r = build_approx_mc_partition(inst.F, inst.g, inst.d, cfg.epsilon,
                                                    cfg.gamma);
        art["mc"] = mc_artifacts(r);
        led.absorb(r.part.ledger);
    } else if (cfg.pipeline == "ihcl_pp") {
        IhclResult r = ihcl_pp(inst.F, inst.g, inst.d, cfg.epsilon, cfg.gamma);
        art["mc"] = mc_artifacts(r.mc);
        art["pieces"] = hardcore_pieces_artifacts(r.pieces);
        led.absorb(r.mc.part.ledger);
        led.pieces += static_cast<std::uint64_t>(r.mc.part.k);
    } else if (cfg.pipeline == "ihcl_recover") {
        std::optional<double> target;
        if (cfg.rescale.requested) target = cfg.rescale.target;
        IhclRecovery r = recover_ihcl(inst.F, inst.g, inst.d, cfg.epsilon, cfg.delta, target);
        art["ok"] = r.ok;
        art["message"] = r.message;
        art["eps_prime"] = r.eps_prime;
        art["gamma"] = r.gamma;
        art["tau"] = r.tau;
        art["mc"] = mc_artifacts(r.inner.mc);
        art["pieces"] = hardcore_pieces_artifacts(r.inner.pieces);
        art["balance"] = balance_artifacts(r.balance);
        if (r.ok) {
            art["glued"] = glued_artifacts(r.glued);
            art["c_density"] = r.c_density;
            art["c_hardness"] = r.c_hardness;
            if (cfg.sample_set.requested) {
                SetSample s = sample_hardcore_set(r.glued.H, inst.g, inst.d, inst.F,
                                                  cfg.epsilon, cfg.seed,
                                                  cfg.sample_set.raw_mass);
                art["set"] = set_artifacts(s);
            }
        }
        led.absorb(r.inner.mc.part.ledger);
        led.pieces += static_cast<std::uint64_t>(r.inner.mc.part.k);
    } else if (cfg.pipeline == "pame_pp") {
        PamePpResult r = pame_pp(inst.Fprod, inst.joint, cfg.epsilon, cfg.gamma);
        art["pp"] = pame_pp_artifacts(r);
        led.absorb(r.mc.part.ledger);
        led.pieces += static_cast<std::uint64_t>(r.mc.part.k);
    } else if (cfg.pipeline == "pame_recover") {
        PameRecovery r = recover_pame(inst.Fprod, inst.joint, cfg.epsilon);
        art["ok"] = r.ok;
        art["message"] = r.message;
        art["predictability"] = r.predictability_measured;
        art["delta"] = r.delta;
        art["eps_prime"] = r.eps_prime;
        art["gamma"] = r.gamma;
        art["tau"] = r.tau;
        art["ame_floor"] = r.ame_floor;
        if (!r.pp.witnesses.empty() || r.pp.mc.part.k > 0) art["pp"] = pame_pp_artifacts(r.pp);
        if (r.ok) {
            Json gl;
            gl["good_pieces"] = iarr(r.glued.good_pieces);
            gl["good_mass"] = r.glued.good_mass;
            gl["skipped_mass"] = r.glued.skipped_mass;
            gl["glued_m"] = r.glued.glued_m;
            gl["measured_ame"] = r.glued.measured_ame;
            gl["measured_advantage"] = r.glued.measured_advantage;
            gl["witness_marg"] = arr(r.glued.witness.marg.mass);
            gl["witness_cond"] = arr(r.glued.witness.cond);
            art["glued"] = gl;
            art["c_ame"] = r.c_ame;
            art["c_advantage"] = r.c_advantage;
        }
        if (r.pp.mc.part.k > 0) led.absorb(r.pp.mc.part.ledger);
    } else if (cfg.pipeline == "dmt_pp") {
        DmtInstance di = make_dmt_instance(inst.sdist, inst.vdist);
        Family lifted = lift_to_union(inst.F);
        DmtPpResult r = dmt_pp(lifted, di, cfg.epsilon, cfg.gamma);
        art["pp"] = dmt_pp_artifacts(r);
        led.absorb(r.mc.part.ledger);
        led.pieces += static_cast<std::uint64_t>(r.mc.part.k);
    } else if (cfg.pipeline == "dmt_recover") {
        DmtRecovery r = recover_dmt(inst.F, inst.sdist, inst.vdist, cfg.epsilon, cfg.delta);
        art["ok"] = r.ok;
        art["message"] = r.message;
        art["eps_prime"] = r.eps_prime;
        art["gamma"] = r.gamma;
        art["tau"] = r.tau;
        art["margin_family"] = r.margin_family;
        if (r.pp.mc.part.k > 0) {
            art["pp"] = dmt_pp_artifacts(r.pp);
            art["margin_pieces"] = r.margin_pieces;
            led.absorb(r.pp.mc.part.ledger);
            led.pieces += static_cast<std::uint64_t>(r.pp.mc.part.k);
        }
        if (r.ok) {
            art["good_pieces"] = iarr(r.good_pieces);
            art["good_s_mass"] = r.good_s_mass;
            art["model"] = arr(r.model.mass);
            art["mu_sum_gap"] = r.mu_sum_gap;
            art["density_measured"] = r.density_measured;
            art["advantage_measured"] = r.advantage_measured;
            art["c_density"] = r.c_density;
            art["c_advantage"] = r.c_advantage;
        }
    } else {
        throw config_error("unknown pipeline '" + cfg.pipeline + "'");
    }
    return art;
}

// -------------------------------------------------------------- verify dispatch

void verify_artifacts(const ExperimentConfig& cfg, const Instance& inst, const Json& art,
                      Json& checks, bool& overall) {
    const double eps = cfg.epsilon;
    if (cfg.pipeline == "ma") {
        const std::vector<double> h = jvec(art, "predictor");
        bool shape = h.size() == inst.d.size();
        check_true(checks, overall, "ma.predictor_length", shape);
        if (!shape) return;
        double out_of_range = 0.0;
        for (double v : h) out_of_range = std::max({out_of_range, -v, v - 1.0});
        check_le(checks, overall, "ma.table_in_range", out_of_range, 0.0, kIdTol);
        double worst = 0.0;
        for (const auto& fn : inst.F.members) {
            double s = 0.0;
            for (std::size_t x = 0; x < h.size(); ++x) {
                s += inst.d[x] * fn[x] * (inst.g[x] - h[x]);
            }
            worst = std::max(worst, std::abs(s));
        }
        check_le(checks, overall, "ma.residual_le_eps", worst, eps, kSumTol);
        check_eq(checks, overall, "ma.residual_matches", jnum(art, "residual"), worst, kSumTol);
        check_true(checks, overall, "ma.converged", jbool(art, "converged"));
        const int iters = static_cast<int>(jnum(art, "iterations"));
        const int cap = 4 * static_cast<int>(std::ceil(1.0 / (eps * eps)));
        check_le(checks, overall, "ma.iterations_le_cap", iters, cap);
        const double min_dec = jnum(art, "min_step_decrease");
        const bool floor_ok = iters == 0 || min_dec >= eps * eps * (1.0 - 1e-9) - 1e-15;
        push_check(checks, overall, "ma.step_decrease_floor", min_dec, ">=", eps * eps,
                   floor_ok);
        return;
    }
    if (cfg.pipeline == "mc") {
        verify_mc_block("mc", at(art, "mc"), inst.F, inst.g.values, inst.d.mass, eps,
                        cfg.gamma, /*bounded_k=*/true, checks, overall);
        return;
    }
    if (cfg.pipeline == "ihcl_pp") {
        const Json& m = at(art, "mc");
        if (verify_mc_block("mc", m, inst.F, inst.g.values, inst.d.mass, eps, cfg.gamma,
                            true, checks, overall)) {
            verify_hardcore_pieces("ihcl", at(art, "pieces"), jivec(m, "assign"), inst.F,
                                   inst.g, inst.d, eps, checks, overall);
        }
        return;
    }
    if (cfg.pipeline == "ihcl_recover") {
        check_true(checks, overall, "recover.ok", jbool(art, "ok"));
        const double eps_prime = jnum(art, "eps_prime");
        const double gamma = jnum(art, "gamma");
        const double tau = jnum(art, "tau");
        check_eq(checks, overall, "recover.eps_prime_identity", eps_prime,
                 eps * eps * cfg.delta, kIdTol);
        check_eq(checks, overall, "recover.gamma_identity", gamma, eps * eps_prime, kIdTol);
        check_eq(checks, overall, "recover.tau_identity", tau, eps * cfg.delta, kIdTol);
        const Json& m = at(art, "mc");
        if (!verify_mc_block("recover.mc", m, inst.F, inst.g.values, inst.d.mass, eps_prime,
                             gamma, true, checks, overall)) {
            return;
        }
        const std::vector<int> assign = jivec(m, "assign");
        verify_hardcore_pieces("recover", at(art, "pieces"), assign, inst.F, inst.g, inst.d,
                               eps_prime, checks, overall);
        verify_balance_block("recover.balance", at(art, "balance"), m, assign, inst.F,
                             inst.g, inst.d, cfg.delta, gamma, tau, checks, overall);
        if (jbool(art, "ok")) {
            check_ge(checks, overall, "recover.hardness_ge_delta",
                     jnum(at(art, "balance"), "measured_hardness"), cfg.delta, kIdTol);
            verify_glued_block("recover.glued", at(art, "glued"), m, assign, inst.F, inst.g,
                               inst.d, eps, cfg.delta, jnum(art, "c_density"),
                               jnum(art, "c_hardness"), cfg.rescale.requested, checks,
                               overall);
            if (art.contains("set")) {
                verify_set_block("set", at(art, "set"), inst.F, inst.g, inst.d, checks,
                                 overall);
            }
        }
        return;
    }
    if (cfg.pipeline == "pame_pp") {
        verify_pame_pp_block("pame", at(art, "pp"), inst.Fprod, inst.joint, eps, cfg.gamma,
                             checks, overall);
        return;
    }
    if (cfg.pipeline == "pame_recover") {
        check_true(checks, overall, "precover.ok", jbool(art, "ok"));
        const double pred = predictability(inst.joint);
        check_eq(checks, overall, "precover.predictability_matches",
                 jnum(art, "predictability"), pred, kIdTol);
        const double delta = jnum(art, "delta");
        check_eq(checks, overall, "precover.delta_identity", delta, 1.0 - pred, kIdTol);
        if (!jbool(art, "ok")) return;
        const double gamma = jnum(art, "gamma");
        const double tau = jnum(art, "tau");
        check_eq(checks, overall, "precover.gamma_identity", gamma,
                 eps * eps * eps * delta, 1e-9 * gamma + kIdTol);
        check_eq(checks, overall, "precover.tau_identity", tau, eps * delta, kIdTol);
        verify_pame_pp_block("precover.pp", at(art, "pp"), inst.Fprod, inst.joint, eps,
                             gamma, checks, overall);

        const Json& gl = at(art, "glued");
        const std::vector<double> wmarg = jvec(gl, "witness_marg");
        const std::vector<double> wcond = jvec(gl, "witness_cond");
        const int L = inst.joint.L;
        const std::size_t n = inst.joint.size();
        bool shape = wmarg.size() == n && wcond.size() == n * static_cast<std::size_t>(L);
        check_true(checks, overall, "precover.witness_shape", shape);
        if (!shape) return;
        check_eq(checks, overall, "precover.witness_marg_normalized", total_mass(wmarg), 1.0,
                 kSumTol);
        const std::vector<int> assign = jivec(at(art, "pp"), "assign");
        const std::vector<int> good = jivec(gl, "good_pieces");
        std::set<int> good_set(good.begin(), good.end());
        double off = 0.0, row_gap = 0.0, ame_sum = 0.0, adv = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            if (assign.size() == n && !good_set.count(assign[x])) off += std::abs(wmarg[x]);
            double total = 0.0, rmax = 0.0;
            for (int y = 0; y < L; ++y) {
                total += wcond[x * L + y];
                rmax = std::max(rmax, wcond[x * L + y]);
            }
            row_gap = std::max(row_gap, std::abs(total - 1.0));
            ame_sum += wmarg[x] * rmax;
        }
        check_le(checks, overall, "precover.witness_support_good", off, 0.0, kIdTol);
        check_le(checks, overall, "precover.witness_rows_stochastic", row_gap, 0.0, kSumTol);
        const double ame = -std::log2(ame_sum);
        check_eq(checks, overall, "precover.ame_matches", jnum(gl, "measured_ame"), ame,
                 kSumTol);
        for (std::size_t fi = 0; fi < inst.Fprod.size(); ++fi) {
            double s = 0.0;
            for (std::size_t x = 0; x < n; ++x) {
                if (wmarg[x] <= 0.0) continue;
                for (int y = 0; y < L; ++y) {
                    s += wmarg[x] * inst.Fprod.members[fi][x * static_cast<std::size_t>(L) + y] *
                         (inst.joint.cond_at(x, y) - wcond[x * L + y]);
                }
            }
            adv = std::max(adv, std::abs(s));
        }
        check_eq(checks, overall, "precover.advantage_matches",
                 jnum(gl, "measured_advantage"), adv, kSumTol);
        const double floor = jnum(art, "ame_floor");
        check_eq(checks, overall, "precover.ame_floor_identity", floor,
                 std::log2(1.0 / (1.0 - delta)), kIdTol);
        check_ge(checks, overall, "precover.ame_claim", ame,
                 floor - jnum(art, "c_ame") * eps, kSumTol);
        check_le(checks, overall, "precover.advantage_claim", adv,
                 jnum(art, "c_advantage") * eps, kSumTol);
        return;
    }
    if (cfg.pipeline == "dmt_pp" || cfg.pipeline == "dmt_recover") {
        const bool recover = cfg.pipeline == "dmt_recover";
        const double part_eps = recover ? jnum(art, "eps_prime") : eps;
        const double part_gamma = recover ? jnum(art, "gamma") : cfg.gamma;
        const std::string px = recover ? "drecover" : "dmt";
        DmtInstance di = make_dmt_instance(inst.sdist, inst.vdist);
        const Family lifted = lift_to_union(inst.F);

        if (recover) {
            check_true(checks, overall, "drecover.ok", jbool(art, "ok"));
            check_eq(checks, overall, "drecover.eps_prime_identity", part_eps,
                     eps * eps * cfg.delta, kIdTol);
            const double margin = pseudodensity_margin(di.s, di.v, lifted, cfg.delta);
            check_eq(checks, overall, "drecover.margin_family_matches",
                     jnum(art, "margin_family"), margin, kSumTol);
            check_le(checks, overall, "drecover.margin_family_le", margin, part_eps, kIdTol);
            if (!jbool(art, "ok")) return;
        }
        const Json& pp = at(art, "pp");
        const Json& m = at(pp, "mc");
        if (!verify_mc_block(px + ".mc", m, lifted, di.g.values, di.mixture.mass, part_eps,
                             part_gamma, true, checks, overall)) {
            return;
        }
        const std::vector<int> assign = jivec(m, "assign");
        const int k = static_cast<int>(jnum(m, "k"));
        // Per-piece block masses from scratch.
        std::vector<double> smass(static_cast<std::size_t>(k), 0.0);
        std::vector<double> vmass(static_cast<std::size_t>(k), 0.0);
        for (std::size_t x = 0; x < assign.size(); ++x) {
            smass[static_cast<std::size_t>(assign[x])] += di.s[x];
            vmass[static_cast<std::size_t>(assign[x])] += di.v[x];
        }
        for (const auto& row : at(pp, "pieces")) {
            const int pi = static_cast<int>(jnum(row, "piece"));
            const std::string tag = px + ".piece" + std::to_string(pi);
            if (pi < 0 || pi >= k) {
                check_true(checks, overall, tag + ".index", false);
                continue;
            }
            if (jbool(row, "degenerate")) continue;
            const double sm = smass[static_cast<std::size_t>(pi)];
            const double vm = vmass[static_cast<std::size_t>(pi)];
            const double eta = jnum(row, "eta");
            const double vp = jnum(row, "v_p");
            check_eq(checks, overall, tag + ".s_mass_matches", jnum(row, "s_mass"), sm,
                     kSumTol);
            check_eq(checks, overall, tag + ".v_mass_matches", jnum(row, "v_mass"), vm,
                     kSumTol);
            check_le(checks, overall, tag + ".v_identity",
                     std::abs(vp - sm / (2.0 * eta)), 0.0, kSumTol);
            check_le(checks, overall, tag + ".delta_identity",
                     std::abs(vm - 2.0 * eta * (1.0 - vp)), 0.0, kSumTol);
            if (jbool(row, "one_sided")) continue;
            double adv = 0.0;
            if (sm > 0.0 && vm > 0.0) {
                for (const auto& fn : lifted.members) {
                    double es = 0.0, ev = 0.0;
                    for (std::size_t x = 0; x < assign.size(); ++x) {
                        if (assign[x] == pi) {
                            es += di.s[x] * fn[x] / sm;
                            ev += di.v[x] * fn[x] / vm;
                        }
                    }
                    adv = std::max(adv, std::abs(es - ev));
                }
            }
            check_eq(checks, overall, tag + ".advantage_matches",
                     jnum(row, "advantage_measured"), adv, kSumTol);
            if (jbool(row, "qualifying") && jbool(m, "converged")) {
                check_le(checks, overall, tag + ".advantage_le_claim", adv,
                         jnum(row, "eps_claim"), kSumTol);
            }
        }
        if (!recover) return;

        double margin_pieces = 0.0;
        for (int pi = 0; pi < k; ++pi) {
            margin_pieces = std::max(margin_pieces,
                                     cfg.delta * smass[static_cast<std::size_t>(pi)] -
                                         vmass[static_cast<std::size_t>(pi)]);
        }
        margin_pieces = std::max(0.0, margin_pieces);
        check_eq(checks, overall, "drecover.margin_pieces_matches",
                 jnum(art, "margin_pieces"), margin_pieces, kSumTol);
        check_le(checks, overall, "drecover.margin_pieces_le", margin_pieces, part_eps,
                 kIdTol);

        const std::vector<double> model = jvec(art, "model");
        const std::size_t n = inst.dom.size;
        bool shape = model.size() == n;
        check_true(checks, overall, "drecover.model_shape", shape);
        if (!shape) return;
        check_eq(checks, overall, "drecover.model_normalized", total_mass(model), 1.0,
                 kSumTol);

        const std::vector<int> good = jivec(art, "good_pieces");
        std::set<int> good_set(good.begin(), good.end());
        double gz = 0.0;
        for (int pi : good) {
            if (pi >= 0 && pi < k) gz += smass[static_cast<std::size_t>(pi)];
        }
        check_eq(checks, overall, "drecover.good_s_mass_matches", jnum(art, "good_s_mass"),
                 gz, kSumTol);
        double model_gap = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            const int pi = assign[di.ns + x];
            double mu = 0.0;
            if (good_set.count(pi) && gz > 0.0 && vmass[static_cast<std::size_t>(pi)] > 0.0) {
                mu = (smass[static_cast<std::size_t>(pi)] / gz) * inst.vdist[x] /
                     vmass[static_cast<std::size_t>(pi)];
            }
            model_gap = std::max(model_gap, std::abs(model[x] - mu));
        }
        check_le(checks, overall, "drecover.model_matches", model_gap, 0.0, kSumTol);

        double rho = std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < n; ++x) {
            if (model[x] > 0.0) rho = std::min(rho, inst.vdist[x] / model[x]);
        }
        check_eq(checks, overall, "drecover.density_matches", jnum(art, "density_measured"),
                 rho, kSumTol);
        double adv = 0.0;
        for (const auto& fn : inst.F.members) {
            double es = 0.0, em = 0.0;
            for (std::size_t x = 0; x < n; ++x) {
                es += inst.sdist[x] * fn[x];
                em += model[x] * fn[x];
            }
            adv = std::max(adv, std::abs(es - em));
        }
        check_eq(checks, overall, "drecover.advantage_matches",
                 jnum(art, "advantage_measured"), adv, kSumTol);
        check_ge(checks, overall, "drecover.density_claim", rho,
                 cfg.delta * (1.0 - jnum(art, "c_density") * eps), kSumTol);
        check_le(checks, overall, "drecover.advantage_claim", adv,
                 jnum(art, "c_advantage") * eps / cfg.delta, kSumTol);
        return;
    }
    throw config_error("unknown pipeline '" + cfg.pipeline + "'");
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Json rep;
    rep["schema_version"] = 1;
    rep["tool"] = "regkit";
    rep["pipeline"] = cfg.pipeline;
    rep["config"] = config_to_json(cfg);
    rep["seed"] = cfg.seed;
    Json checks = Json::array();
    bool overall = true;
    try {
        Instance inst = gen_instance(cfg);
        rep["instance"] = instance_summary(cfg, inst);
        Ledger led;
        rep["artifacts"] = build_artifacts(cfg, inst, led);
        rep["ledger"] = ledger_json(led);
        verify_artifacts(cfg, inst, rep.at("artifacts"), checks, overall);
    } catch (const std::exception& e) {
        rep["error"] = e.what();
        overall = false;
    }
    rep["checks"] = checks;
    rep["overall_pass"] = overall;
    const auto t1 = std::chrono::steady_clock::now();
    rep["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();
    return RunOutcome{std::move(rep), overall};
}

RunOutcome verify_report(const Json& report) {
    Json rep;
    rep["schema_version"] = 1;
    rep["tool"] = "regkit";
    rep["mode"] = "verify";
    Json checks = Json::array();
    bool overall = true;
    try {
        ExperimentConfig cfg = parse_config(at(report, "config"));
        rep["pipeline"] = cfg.pipeline;
        check_true(checks, overall, "verify.pipeline_matches",
                   report.contains("pipeline") && report.at("pipeline") == cfg.pipeline);
        Instance inst = gen_instance(cfg);
        verify_artifacts(cfg, inst, at(report, "artifacts"), checks, overall);
    } catch (const std::exception& e) {
        rep["error"] = e.what();
        push_check(checks, overall, "verify.exception", 0.0, "==", 1.0, false);
    }
    rep["checks"] = checks;
    rep["overall_pass"] = overall;
    return RunOutcome{std::move(rep), overall};
}

}  // namespace regkit
