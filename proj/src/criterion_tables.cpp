#include <algorithm>
#include <cmath>
#include <sstream>

#include "criterion_internal.hpp"

namespace hclab {

using detail::Chain;
using detail::Term;

namespace {

void finalize(ConditionTable& t, double tol) {
    t.below_tolerance = true;
    t.nonincreasing = true;
    for (std::size_t i = 0; i < t.index.size(); ++i) {
        if (t.index[i] >= t.verdict_from && !(t.value[i] < tol)) t.below_tolerance = false;
        if (i > 0 && t.value[i] > t.value[i - 1] * (1 + 1e-12) + 1e-300) t.nonincreasing = false;
    }
    if (t.index.empty()) t.below_tolerance = false;
}

ConditionTable make_table(std::string cond, int op, std::string comp, std::string branch, std::string index_name,
                          std::int64_t from) {
    ConditionTable t;
    t.condition = std::move(cond);
    t.op = op;
    t.component = std::move(comp);
    t.branch = std::move(branch);
    t.index_name = std::move(index_name);
    t.verdict_from = from;
    return t;
}

std::string at(std::int64_t k, std::int64_t l) {
    return "(k, l) = (" + std::to_string(k) + ", " + std::to_string(l) + ")";
}

std::vector<std::int64_t> window_starts(std::int64_t l_max) {
    std::vector<std::int64_t> g = detail::index_grid(l_max, true);
    g.push_back(l_max / 2);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

// ---------------------------------------------------------------------------
// Half-plane and composition pairs

TailReport function_conditions(const CriterionConfig& config, const DenseElement& y) {
    const Truncation& T = config.truncation;
    const double tol = config.tolerance;
    const std::int64_t W = T.window;
    TailReport rep;
    rep.family = family_kind(config.family);
    rep.target = y.target;
    rep.tolerance = tol;

    const ReturnSequence seq = make_return_sequence(config.sequence, family_ratio(config.family), config.horizon);
    const std::int64_t need = T.k_max + std::max<std::int64_t>(T.l_max, 0) + W + 1;
    if (static_cast<std::int64_t>(seq.size()) < need)
        throw TruncationError("sequence holds " + std::to_string(seq.size()) + " elements up to the horizon; " +
                              std::to_string(need) + " are needed");
    auto n = [&](std::int64_t k) { return seq.n[static_cast<std::size_t>(k)]; };

    detail::TermEngine eng(config);
    const int poly[2] = {eng.add(y, 0), eng.add(y, 1)};
    // H_c ∘ ψ_c^{−base} ∘ ψ_op^{m}
    auto term = [&](int c, std::int64_t base, int op, std::int64_t m, long double w = 1) {
        Chain ch;
        ch.then(c + 1, -base).then(op, m);
        return Term{poly[c], ch, w};
    };
    auto guarded = [&](auto&& f, const std::string& where) -> double {
        try {
            return f();
        } catch (const Error& e) {
            detail::rethrow_at(e, where);
        }
    };

    const auto kgrid = detail::index_grid(T.k_max, T.geometric);
    const auto starts = window_starts(T.l_max);

    // C1
    {
        const auto Kgrid = detail::index_grid(T.k_max, T.geometric);
        ConditionVerdict v{"C1", 0, false, ""};
        if (!T.geometric) {
            auto tt = make_table("C1", 0, "", "termwise_l1", "K", T.k_max / 2);
            std::vector<double> a(static_cast<std::size_t>(T.k_max + 1));
            for (std::int64_t k = 0; k <= T.k_max; ++k)
                a[k] = guarded(
                    [&] {
                        return eng.single_norm(poly[0], Chain{}.then(1, -n(k))) +
                               eng.single_norm(poly[1], Chain{}.then(2, -n(k)));
                    },
                    at(k, 0));
            double s = 0;
            std::vector<double> tail(a.size());
            for (std::size_t k = a.size(); k-- > 0;) tail[k] = s += a[k];
            for (std::int64_t K = 0; K <= T.k_max; ++K) {
                tt.index.push_back(K);
                tt.value.push_back(tail[K]);
            }
            finalize(tt, tol);
            if (tt.below_tolerance) v = {"C1", 0, true, "termwise_l1"};
            rep.tables.push_back(std::move(tt));
        }
        auto tw = make_table("C1", 0, "", "window", "K", T.k_max / 2);
        for (std::int64_t K : Kgrid) {
            std::vector<Term> ts;
            for (std::int64_t k = K; k < K + W; ++k) {
                ts.push_back(term(0, n(k), 1, 0));
                ts.push_back(term(1, n(k), 2, 0));
            }
            tw.index.push_back(K);
            tw.value.push_back(guarded([&] { return eng.norm(ts); }, at(K, 0)));
        }
        finalize(tw, tol);
        if (!v.passed && tw.below_tolerance) v = {"C1", 0, true, "window"};
        rep.tables.push_back(std::move(tw));
        rep.verdicts.push_back(v);
    }

    // C2 (forward, n_{k+l}) and C3 (backward, n_{k−l})
    for (const std::string cond : {"C2", "C3"}) {
        const bool forward = cond == "C2";
        for (int op = 1; op <= 2; ++op) {
            ConditionVerdict v{cond, op, false, ""};
            bool all_components = !T.geometric;
            std::string branches;
            if (!T.geometric) {
                for (int c = 0; c < 2; ++c) {
                    const char* cname = c == 0 ? "F" : "G";
                    std::vector<double> sup_l(static_cast<std::size_t>(T.l_max + 1), 0.0);
                    auto pk = make_table(cond, op, cname, "per_k_c0", "k", T.k_max / 2);
                    for (std::int64_t k : kgrid) {
                        double row = 0;
                        for (std::int64_t l = 0; l <= T.l_max; ++l) {
                            if (!forward && l > k) break;
                            const std::int64_t base = forward ? n(k + l) : n(k - l);
                            const double a = guarded(
                                [&] {
                                    const Term t = term(c, base, op, n(k));
                                    return eng.single_norm(t.poly, t.chain);
                                },
                                at(k, l));
                            sup_l[l] = std::max(sup_l[l], a);
                            if (l >= 1) row += a;
                        }
                        pk.index.push_back(k);
                        pk.value.push_back(row);
                    }
                    auto tt = make_table(cond, op, cname, "termwise_l1", "L", T.l_max / 2);
                    double s = 0;
                    std::vector<double> tail(sup_l.size());
                    for (std::size_t l = sup_l.size(); l-- > 0;) tail[l] = s += sup_l[l];
                    for (std::int64_t L = 0; L <= T.l_max; ++L) {
                        tt.index.push_back(L);
                        tt.value.push_back(tail[L]);
                    }
                    finalize(tt, tol);
                    finalize(pk, tol);
                    std::string b;
                    if (tt.below_tolerance) b = "termwise_l1";
                    else if (pk.below_tolerance) b = "per_k_c0";
                    if (b.empty()) all_components = false;
                    else branches += (branches.empty() ? "" : "+") + std::string(cname) + ":" + b;
                    rep.tables.push_back(std::move(tt));
                    rep.tables.push_back(std::move(pk));
                }
            }
            if (all_components) {
                v = {cond, op, true, branches};
            } else {
                auto tw = make_table(cond, op, "", "window", "L", T.l_max / 2);
                for (std::int64_t L : starts) {
                    double sup = 0;
                    for (std::int64_t k : kgrid) {
                        std::vector<Term> ts;
                        for (std::int64_t l = L; l < L + W; ++l) {
                            if (!forward && l > k) break;
                            const std::int64_t base = forward ? n(k + l) : n(k - l);
                            ts.push_back(term(0, base, op, n(k)));
                            ts.push_back(term(1, base, op, n(k)));
                        }
                        sup = std::max(sup, guarded([&] { return eng.norm(ts); }, at(k, L)));
                    }
                    tw.index.push_back(L);
                    tw.value.push_back(sup);
                }
                finalize(tw, tol);
                if (tw.below_tolerance) v = {cond, op, true, "window"};
                rep.tables.push_back(std::move(tw));
            }
            rep.verdicts.push_back(v);
        }
    }

    // C4
    for (int op = 1; op <= 2; ++op) {
        auto t4 = make_table("C4", op, "", "limit", "k", T.k_max / 2);
        for (std::int64_t k : kgrid) {
            std::vector<Term> ts{term(0, n(k), op, n(k)), term(1, n(k), op, n(k)), Term{poly[op - 1], Chain{}, -1}};
            t4.index.push_back(k);
            t4.value.push_back(guarded([&] { return eng.norm(ts); }, at(k, 0)));
        }
        finalize(t4, tol);
        rep.verdicts.push_back({"C4", op, t4.below_tolerance, "limit"});
        rep.tables.push_back(std::move(t4));
    }

    rep.notes.push_back("termwise values are ‖H∘ψ‖ per component; their sum bounds ‖y_l(k)‖");
    rep.notes.push_back("per_k_c0 sums start at l = 1; the l = 0 term is the bounded C4 term");
    if (T.geometric)
        rep.notes.push_back("geometric sampling: k, K and window starts range over {0, 1, 2, 4, …, max}; termwise branches skipped");
    else
        rep.notes.push_back("window tables are computed when a termwise branch does not fire; window starts are {0, 1, 2, 4, …} ∪ {l_max/2, l_max}");
    return rep;
}

// ---------------------------------------------------------------------------
// Shift pair

TailReport shift_conditions(const CriterionConfig& config, const DenseElement& y) {
    const auto& sp = std::get<ShiftPair>(config.family);
    const DfhcConstruction& c = *sp.construction;
    const Truncation& T = config.truncation;
    const double tol = config.tolerance;
    TailReport rep;
    rep.family = "shift_pair";
    rep.target = y.target;
    rep.tolerance = tol;
    const bool zero = y.target == 0;
    const int p = zero ? 1 : y.target;
    const std::vector<std::int64_t>& A = c.a_sets[p - 1].elements();
    if (A.empty()) throw TruncationError("A_p is empty up to the construction horizon");
    const std::int64_t kcount = static_cast<std::int64_t>(A.size());
    const std::int64_t kmax = std::min<std::int64_t>(T.k_max, kcount - 1);
    const std::int64_t W = T.window;
    if (kmax < T.k_max) rep.notes.push_back("k_max clipped to |A_p| − 1 = " + std::to_string(kmax));
    detail::ShiftOrbit d(c, c.z);
    const long double mult = zero ? 0 : 1;
    auto block_norm = [&](std::int64_t n) { return mult * d.shifted_norm(0, 0, n, n + p); };
    auto shifted = [&](int j, std::int64_t m, std::int64_t n) { return mult * d.shifted_norm(j, m, n, n + p); };

    // C1: blocks have disjoint supports, so window norms equal termwise sums.
    {
        auto tt = make_table("C1", 0, "", "termwise_l1", "K", kmax / 2);
        std::vector<long double> tail(static_cast<std::size_t>(kmax + 2), 0);
        for (std::int64_t k = kmax; k >= 0; --k) tail[k] = tail[k + 1] + block_norm(A[k]);
        for (std::int64_t K = 0; K <= kmax; ++K) {
            tt.index.push_back(K);
            tt.value.push_back(static_cast<double>(tail[K]));
        }
        auto tw = make_table("C1", 0, "", "window", "K", kmax / 2);
        for (std::int64_t K = 0; K <= kmax; ++K) {
            long double s = 0;
            for (std::int64_t k = K; k < std::min(K + W, kcount); ++k) s += block_norm(A[k]);
            tw.index.push_back(K);
            tw.value.push_back(static_cast<double>(s));
        }
        finalize(tt, tol);
        finalize(tw, tol);
        ConditionVerdict v{"C1", 0, tt.below_tolerance || tw.below_tolerance,
                           tt.below_tolerance ? "termwise_l1" : "window"};
        rep.tables.push_back(std::move(tt));
        rep.tables.push_back(std::move(tw));
        rep.verdicts.push_back(v);
    }

    // C2 / C3: ℓ¹ norms of shifted blocks.
    for (const std::string cond : {"C2", "C3"}) {
        const bool forward = cond == "C2";
        for (int op = 1; op <= 2; ++op) {
            const std::int64_t lmax = std::min<std::int64_t>(T.l_max, kcount - 1);
            std::vector<double> sup_l(static_cast<std::size_t>(lmax + 1), 0.0);
            auto pk = make_table(cond, op, "", "per_k_c0", "k", kmax / 2);
            for (std::int64_t k = 0; k <= kmax; ++k) {
                double row = 0;
                for (std::int64_t l = 0; l <= lmax; ++l) {
                    const std::int64_t idx = forward ? k + l : k - l;
                    if (idx < 0 || idx >= kcount) break;
                    const double a = static_cast<double>(shifted(op - 1, A[k], A[idx]));
                    sup_l[l] = std::max(sup_l[l], a);
                    if (l >= 1) row += a;
                }
                pk.index.push_back(k);
                pk.value.push_back(row);
            }
            auto tt = make_table(cond, op, "", "termwise_l1", "L", lmax / 2);
            double s = 0;
            std::vector<double> tail(sup_l.size());
            for (std::size_t l = sup_l.size(); l-- > 0;) tail[l] = s += sup_l[l];
            for (std::int64_t L = 0; L <= lmax; ++L) {
                tt.index.push_back(L);
                tt.value.push_back(tail[L]);
            }
            finalize(tt, tol);
            finalize(pk, tol);
            ConditionVerdict v{cond, op, tt.below_tolerance || pk.below_tolerance,
                               tt.below_tolerance ? "termwise_l1" : (pk.below_tolerance ? "per_k_c0" : "")};
            rep.tables.push_back(std::move(tt));
            rep.tables.push_back(std::move(pk));
            rep.verdicts.push_back(v);
        }
    }

    // C4: exact block term, and the full orbit distance including later blocks.
    const TargetPair& tp = c.targets[p - 1];
    for (int op = 1; op <= 2; ++op) {
        const std::vector<mpq_class> target = zero ? std::vector<mpq_class>{} : (op == 1 ? tp.a : tp.b);
        auto te = make_table("C4", op, "", "exact", "k", kmax / 2);
        auto tw = make_table("C4", op, "", "with_tail", "k", kmax / 2);
        for (std::int64_t k = 0; k <= kmax; ++k) {
            const std::int64_t nk = A[k];
            double head = 0, tail = 0;
            if (!zero) {
                head = d.exact_head(op - 1, nk, p, target).get_d();
                tail = static_cast<double>(d.shifted_norm(op - 1, nk, nk + p, c.horizon + 1));
            }
            te.index.push_back(k);
            te.value.push_back(head);
            tw.index.push_back(k);
            tw.value.push_back(head + tail);
        }
        finalize(te, tol);
        finalize(tw, tol);
        rep.verdicts.push_back({"C4", op, te.below_tolerance, "exact"});
        rep.tables.push_back(std::move(te));
        rep.tables.push_back(std::move(tw));
    }
    rep.notes.push_back("sequence n_k = elements of A_p; S_n y(p) is the block of z at n");
    return rep;
}

}  // namespace

TailReport check_conditions(const CriterionConfig& config, const DenseElement& y) {
    validate_config(config);
    validate_dense(config.family, y);
    TailReport r = std::holds_alternative<ShiftPair>(config.family) ? shift_conditions(config, y)
                                                                    : function_conditions(config, y);
    r.passed = !r.verdicts.empty() &&
               std::all_of(r.verdicts.begin(), r.verdicts.end(), [](const auto& v) { return v.passed; });
    return r;
}

const ConditionTable* TailReport::find(const std::string& condition, int op, const std::string& branch,
                                       const std::string& component) const {
    for (const auto& t : tables)
        if (t.condition == condition && t.op == op && t.branch == branch && t.component == component) return &t;
    return nullptr;
}

const ConditionVerdict* TailReport::verdict(const std::string& condition, int op) const {
    for (const auto& v : verdicts)
        if (v.condition == condition && v.op == op) return &v;
    return nullptr;
}

nlohmann::json tail_report_json(const TailReport& r) {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& t : r.tables)
        tables.push_back({{"condition", t.condition},
                          {"op", t.op},
                          {"component", t.component},
                          {"branch", t.branch},
                          {"index_name", t.index_name},
                          {"index", t.index},
                          {"value", t.value},
                          {"verdict_from", t.verdict_from},
                          {"below_tolerance", t.below_tolerance},
                          {"nonincreasing", t.nonincreasing}});
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : r.verdicts)
        verdicts.push_back({{"condition", v.condition}, {"op", v.op}, {"passed", v.passed}, {"branch", v.branch}});
    return {{"family", r.family}, {"target", r.target}, {"tolerance", r.tolerance}, {"passed", r.passed},
            {"verdicts", verdicts}, {"tables", tables}, {"notes", r.notes}};
}

std::string tail_report_csv(const TailReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "condition,op,component,branch,index_name,index,value\n";
    for (const auto& t : r.tables)
        for (std::size_t i = 0; i < t.index.size(); ++i)
            os << t.condition << ',' << t.op << ',' << t.component << ',' << t.branch << ',' << t.index_name << ','
               << t.index[i] << ',' << t.value[i] << '\n';
    return os.str();
}

}  // namespace hclab
