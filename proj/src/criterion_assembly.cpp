#include <algorithm>
#include <cmath>
#include <limits>

#include "criterion_internal.hpp"

namespace hclab {

using detail::Chain;
using detail::Term;

namespace {

double l1_norm(const std::vector<std::pair<std::int64_t, mpq_class>>& e) {
    double s = 0;
    for (const auto& [i, q] : e) s += std::fabs(q.get_d());
    return s;
}

struct FunctionCandidateTerms {
    detail::TermEngine eng;
    std::vector<std::array<int, 2>> poly;  // per p

    FunctionCandidateTerms(const CriterionConfig& config, const std::vector<DenseElement>& ys) : eng(config) {
        for (const auto& y : ys) poly.push_back({eng.add(y, 0), eng.add(y, 1)});
    }
    // S_n y(p) ∘ ψ_op^m
    void push(std::vector<Term>& ts, int p, std::int64_t n, int op, std::int64_t m) const {
        for (int c = 0; c < 2; ++c) {
            Chain ch;
            ch.then(c + 1, -n).then(op, m);
            ts.push_back({poly[p - 1][c], ch, 1});
        }
    }
};

}  // namespace

Candidate assemble_candidate(const CriterionConfig& config, const std::vector<DenseElement>& targets,
                             const std::optional<SeparatedFamily>& a_family) {
    validate_config(config);
    const int P = static_cast<int>(targets.size());
    if (P < 1 || P > 4) throw ArgumentError("assembly takes 1..4 targets");
    for (const auto& y : targets) validate_dense(config.family, y);
    Candidate x;
    x.family = family_kind(config.family);
    x.targets = targets;
    const std::int64_t W = config.truncation.window;

    if (auto sp = std::get_if<ShiftPair>(&config.family)) {
        const DfhcConstruction& c = *sp->construction;
        if (!c.set_certificate.passed) throw PreconditionError("the construction's A_p lack a passing setsep certificate");
        for (int p = 1; p <= P; ++p) {
            if (targets[p - 1].target != p)
                throw PreconditionError("shift assembly expects target " + std::to_string(p) + " in position " +
                                        std::to_string(p));
            const auto& A = c.a_sets[p - 1].elements();
            x.provenance.a_sets.push_back(A);
            x.provenance.epsilon.push_back(static_cast<double>(epsilon_bound(c.n_schedule, p)));
            x.provenance.thresholds.push_back(c.n_schedule[p - 1]);
            double last = 0;
            for (std::size_t i = 0; i < A.size(); ++i) {
                x.terms.push_back({p, A[i]});
                auto blk = shift_smap(*sp, p, A[i]);
                const double b = l1_norm(blk);
                x.norm_bound += b;
                if (i + static_cast<std::size_t>(W) >= A.size()) last += b;
                x.entries.insert(x.entries.end(), blk.begin(), blk.end());
            }
            x.provenance.tail_mass_estimate += last;
        }
        std::sort(x.entries.begin(), x.entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        x.norm = l1_norm(x.entries);
        x.provenance.certificate = c.set_certificate;
        x.provenance.notes.push_back("ε_p from the construction's error bound; N_p is its schedule");
        x.provenance.notes.push_back("tail mass estimate: ℓ¹ mass of the last window of blocks per target");
        return x;
    }

    if (!a_family) throw PreconditionError("assembly needs the families A_p with a setsep certificate");
    const SeparatedFamily& fam = *a_family;
    if (!fam.certificate.passed) throw PreconditionError("setsep certificate is missing or failed");
    if (fam.mode != SeparationMode::theorem) throw PreconditionError("assembly needs a theorem-mode gap certificate");
    if (static_cast<int>(fam.sets.size()) < P || static_cast<int>(fam.thresholds.size()) < P)
        throw PreconditionError("setsep family covers fewer sets than targets");

    const ReturnSequence seq = make_return_sequence(config.sequence, family_ratio(config.family), config.horizon);
    FunctionCandidateTerms ft(config, targets);
    auto term_norm = [&](int p, std::int64_t n) {
        std::vector<Term> ts;
        ft.push(ts, p, n, 1, 0);
        return ft.eng.norm(ts);
    };
    std::vector<Term> all;
    std::int64_t dropped = 0;
    for (int p = 1; p <= P; ++p) {
        std::vector<std::int64_t> A;
        for (std::int64_t k : fam.sets[p - 1].elements()) {
            if (k >= static_cast<std::int64_t>(seq.size())) {
                ++dropped;
                continue;
            }
            A.push_back(seq.n[static_cast<std::size_t>(k)]);
        }
        const double eps = std::ldexp(1.0, -p);
        x.provenance.epsilon.push_back(eps);
        x.provenance.thresholds.push_back(fam.thresholds[p - 1]);
        double last = 0;
        for (std::size_t i = 0; i < A.size(); ++i) {
            x.terms.push_back({p, A[i]});
            const double b = term_norm(p, A[i]);
            x.norm_bound += b;
            if (i + static_cast<std::size_t>(W) >= A.size()) last += b;
            ft.push(all, p, A[i], 1, 0);
        }
        x.provenance.tail_mass_estimate += last;
        // Smallest K whose C1 termwise tail up to k_max is below ε_p.
        const std::int64_t kmax = std::min<std::int64_t>(config.truncation.k_max, static_cast<std::int64_t>(seq.size()) - 1);
        std::vector<double> a(static_cast<std::size_t>(kmax + 1));
        for (std::int64_t k = 0; k <= kmax; ++k) a[k] = term_norm(p, seq.n[static_cast<std::size_t>(k)]);
        double tail = 0;
        std::int64_t K = kmax + 1;
        for (std::int64_t k = kmax; k >= 0; --k) {
            tail += a[k];
            if (tail < eps) K = k;
            else break;
        }
        x.provenance.notes.push_back("p = " + std::to_string(p) + ": C1 tail falls below ε_p from K = " +
                                     std::to_string(K) + "; N_p = " + std::to_string(fam.thresholds[p - 1]) +
                                     (fam.thresholds[p - 1] >= K ? " meets it" : " is below it"));
        x.provenance.a_sets.push_back(std::move(A));
    }
    if (dropped > 0)
        x.provenance.notes.push_back(std::to_string(dropped) + " indices of B_p exceed the materialized sequence and were dropped");
    if (all.size() <= 512) {
        x.norm = ft.eng.norm(all);
    } else {
        x.norm = std::numeric_limits<double>::quiet_NaN();
        x.provenance.notes.push_back("candidate norm not evaluated above 256 terms; norm_bound holds");
    }
    x.provenance.certificate = fam.certificate;
    x.provenance.notes.push_back("ε_p = 2^{−p}; A_p = {n_k : k ∈ B_p}");
    x.provenance.notes.push_back("tail mass estimate: Σ of ‖S_n y(p)‖ over the last window of terms per target");
    return x;
}

std::function<cplx(cplx)> candidate_function(const CriterionConfig& config, const Candidate& x) {
    if (std::holds_alternative<ShiftPair>(config.family)) throw ArgumentError("shift candidates are sequences");
    auto ft = std::make_shared<FunctionCandidateTerms>(config, x.targets);
    std::vector<Term> ts;
    for (const auto& t : x.terms) ft->push(ts, t.p, t.n, 1, 0);
    return [ft, ts](cplx point) { return ft->eng.value(ts, point); };
}

nlohmann::json candidate_json(const Candidate& x) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : x.terms) terms.push_back({t.p, t.n});
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [i, q] : x.entries) entries.push_back({i, q.get_str()});
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& y : x.targets) targets.push_back(y.to_json());
    const auto& pv = x.provenance;
    return {{"family", x.family},
            {"terms", terms},
            {"entries", entries},
            {"targets", targets},
            {"norm", std::isnan(x.norm) ? nlohmann::json(nullptr) : nlohmann::json(x.norm)},
            {"norm_bound", x.norm_bound},
            {"provenance",
             {{"epsilon", pv.epsilon},
              {"thresholds", pv.thresholds},
              {"a_sets", pv.a_sets},
              {"tail_mass_estimate", pv.tail_mass_estimate},
              {"certificate", certificate_to_json(pv.certificate)},
              {"notes", pv.notes}}}};
}

VisitReport visit_density_diagnostic(const CriterionConfig& config, const Candidate& x, const DenseElement& target,
                                     double epsilon, std::int64_t horizon) {
    if (!(epsilon > 0)) throw ArgumentError("ε must be positive");
    if (horizon < 1) throw ArgumentError("horizon must be positive");
    validate_dense(config.family, target);
    VisitReport rep;
    rep.target = target.target;
    rep.epsilon = epsilon;
    rep.horizon = horizon;
    std::vector<std::int64_t> visits;

    if (auto sp = std::get_if<ShiftPair>(&config.family)) {
        const DfhcConstruction& c = *sp->construction;
        const int p = target.target;
        std::vector<mpq_class> tgt[2];
        if (p > 0) {
            tgt[0] = c.targets[p - 1].a;
            tgt[1] = c.targets[p - 1].b;
        }
        std::int64_t H = horizon;
        if (H > c.horizon) {
            H = c.horizon;
            rep.notes.push_back("horizon clipped to the construction horizon " + std::to_string(H));
        }
        detail::ShiftOrbit orb(c, x.entries);
        double min_target = std::numeric_limits<double>::infinity();
        for (const auto& v : tgt)
            for (const auto& q : v) min_target = std::min(min_target, std::fabs(q.get_d()));
        // With ε ≤ min |target_t| a visit needs a nonzero head coordinate, so n ranges over the support.
        std::vector<std::int64_t> cand;
        if (p > 0 && epsilon <= min_target) {
            for (const auto& e : x.entries)
                if (e.first >= 1 && e.first <= H) cand.push_back(e.first);
            rep.notes.push_back("ε ≤ min |target|: candidates restricted to the support of x");
        } else {
            for (std::int64_t n = 1; n <= H; ++n) cand.push_back(n);
        }
        const int len = std::max(p, 0);
        for (std::int64_t n : cand) {
            bool ok = true;
            for (int j = 0; j < 2 && ok; ++j) {
                long double d = 0;
                const std::size_t e0 = orb.first_entry(n);
                if (e0 < x.entries.size() && x.entries[e0].first < n + len) {
                    d = orb.exact_head(j, n, len, tgt[j]).get_d();
                } else {
                    for (int t = 0; t < len; ++t) d += std::fabs(tgt[j][t].get_d());
                }
                for (std::size_t e = orb.first_entry(n + len); e < x.entries.size() && d < epsilon; ++e) {
                    const std::int64_t i = x.entries[e].first;
                    if (i > c.horizon) break;
                    d += std::exp(orb.S[j][i] - orb.S[j][i - n] + orb.logz[e]);
                }
                ok = d < epsilon;
            }
            if (ok) visits.push_back(n);
        }
    } else {
        FunctionCandidateTerms ft(config, x.targets);
        const int tp[2] = {ft.eng.add(target, 0), ft.eng.add(target, 1)};
        for (std::int64_t n = 1; n <= horizon; ++n) {
            bool ok = true;
            try {
                for (int j = 1; j <= 2 && ok; ++j) {
                    std::vector<Term> ts;
                    for (const auto& t : x.terms) ft.push(ts, t.p, t.n, j, n);
                    ts.push_back({tp[j - 1], Chain{}, -1});
                    ok = ft.eng.norm(ts) < epsilon;
                }
            } catch (const Error& e) {
                rep.failures.emplace_back(n, e.what());
                ok = false;
            }
            if (ok) visits.push_back(n);
        }
    }
    rep.visits = IntegerSet(std::move(visits), horizon);
    rep.density = density_report(rep.visits, default_checkpoints(horizon));
    return rep;
}

nlohmann::json visit_report_json(const VisitReport& r) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& [n, what] : r.failures) failures.push_back({{"n", n}, {"error", what}});
    return {{"target", r.target},
            {"epsilon", r.epsilon},
            {"horizon", r.horizon},
            {"visit_count", r.visits.size()},
            {"visits", r.visits.elements()},
            {"density", nlohmann::json::parse(density_report_json(r.density))},
            {"failures", failures},
            {"notes", r.notes}};
}

}  // namespace hclab
