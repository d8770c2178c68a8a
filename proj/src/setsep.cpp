#include "hclab/setsep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "hclab/errors.hpp"

namespace hclab {

namespace {

constexpr std::int64_t kHuge = std::numeric_limits<std::int64_t>::max() / 4;

std::int64_t ceil_ratio(double num, double den) {
    if (!(den > 0)) return kHuge;
    double q = std::ceil(num / den);
    if (!(q < static_cast<double>(kHuge))) return kHuge;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(q));
}

std::int64_t sat_mul(std::int64_t a, std::int64_t b) {
    if (a != 0 && b > kHuge / a) return kHuge;
    return a * b;
}

double density_at_horizon(const std::vector<std::int64_t>& v, std::int64_t horizon) {
    return static_cast<double>(v.size()) / static_cast<double>(horizon);
}

// Longest run of equal keys over [1, horizon]; 1 when keys are strictly increasing.
std::int64_t key_multiplicity(const FunctionSpec& f, std::int64_t horizon) {
    if (f.integer_valued()) return 1;
    std::int64_t best = 1, run = 1, prev = f.key(1);
    for (std::int64_t n = 2; n <= horizon; ++n) {
        std::int64_t k = f.key(n);
        run = (k == prev) ? run + 1 : 1;
        best = std::max(best, run);
        prev = k;
    }
    return best;
}

// Some m ≥ 1 with key_f(m) ∈ [lo, hi].
bool key_hits(const FunctionSpec& f, std::int64_t lo, std::int64_t hi) {
    auto m = f.key_lower_bound(lo);
    return m && f.key(*m) <= hi && f.key(*m) < FunctionSpec::kCap;
}

// Some value of the sorted vector lies in [lo, hi]. Saturated keys never collide.
bool sorted_hits(const std::vector<std::int64_t>& v, std::int64_t lo, std::int64_t hi) {
    if (hi >= FunctionSpec::kCap) hi = FunctionSpec::kCap - 1;
    if (lo > hi) return false;
    auto it = std::lower_bound(v.begin(), v.end(), lo);
    return it != v.end() && *it <= hi;
}

// Keep elements failing `in_b1`, plus the K-th, 2K-th, ... element satisfying it.
template <class Pred>
std::vector<std::int64_t> thin_every_kth(const std::vector<std::int64_t>& b, Pred in_b1,
                                         std::int64_t k) {
    std::vector<std::int64_t> out;
    std::int64_t seen = 0;
    for (auto x : b) {
        if (!in_b1(x)) {
            out.push_back(x);
        } else if (++seen % k == 0) {
            out.push_back(x);
        }
    }
    return out;
}

}  // namespace

std::string to_string(SeparationMode m) {
    switch (m) {
        case SeparationMode::theorem: return "theorem";
        case SeparationMode::corollary: return "corollary";
        case SeparationMode::wpr: return "wpr";
    }
    return "theorem";
}

SeparationMode separation_mode_from_string(const std::string& s) {
    if (s == "theorem") return SeparationMode::theorem;
    if (s == "corollary") return SeparationMode::corollary;
    if (s == "wpr") return SeparationMode::wpr;
    throw ArgumentError("unknown separation mode '" + s + "'");
}

PipelineOutput separation_pipeline(const std::vector<IndexFamily>& families,
                                   const std::vector<IntegerSet>& base_sets) {
    const std::size_t count = families.size();
    if (base_sets.size() != count) throw ArgumentError("one base set per index family required");
    if (count == 0) return {};
    const std::int64_t horizon = base_sets.front().horizon();

    std::vector<std::vector<std::int64_t>> work(count);
    std::vector<double> design(count);
    PipelineOutput out;
    out.thinning_factors.assign(count, 1);
    std::vector<double> removed_budget(count, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        work[k] = base_sets[k].elements();
        design[k] = density_at_horizon(work[k], horizon);
    }

    for (std::size_t j = 0; j < count; ++j) {
        const auto& ej = families[j];
        const double dj = density_at_horizon(work[j], horizon);

        // Thin every later index so that images F^{-1}∘G(B_l) meet ℕ sparsely.
        for (std::size_t l = j + 1; l < count; ++l) {
            const auto& el = families[l];
            const std::int64_t r = ej.radius + el.radius;
            const double delta = dj / std::pow(4.0, static_cast<double>(l + 1));
            const double hcount = static_cast<double>(ej.base.size() * el.base.size()) * (2.0 * r + 1.0);
            const std::int64_t k = ceil_ratio(2.0 * hcount, delta);
            auto in_b1 = [&](std::int64_t b) {
                for (const auto& g : el.base) {
                    std::int64_t t = g.key(b);
                    if (t >= FunctionSpec::kCap) continue;
                    for (const auto& f : ej.base)
                        if (key_hits(f, t - r, t + r)) return true;
                }
                return false;
            };
            work[l] = thin_every_kth(work[l], in_b1, k);
            out.thinning_factors[l] = sat_mul(out.thinning_factors[l], k);
            removed_budget[j] += delta;
        }

        // A_j: drop m with F(m) = G(n) for some n in a later (already thinned) set.
        std::vector<std::int64_t> aj;
        {
            std::vector<std::vector<std::vector<std::int64_t>>> later_keys;  // [l][g] sorted keys
            for (std::size_t l = j + 1; l < count; ++l) {
                std::vector<std::vector<std::int64_t>> per_g;
                for (const auto& g : families[l].base) {
                    std::vector<std::int64_t> keys;
                    keys.reserve(work[l].size());
                    for (auto n : work[l]) keys.push_back(g.key(n));
                    per_g.push_back(std::move(keys));
                }
                later_keys.push_back(std::move(per_g));
            }
            for (auto m : work[j]) {
                bool hit = false;
                for (std::size_t li = 0; li < later_keys.size() && !hit; ++li) {
                    const std::int64_t r = ej.radius + families[j + 1 + li].radius;
                    for (const auto& f : ej.base) {
                        std::int64_t km = f.key(m);
                        if (km >= FunctionSpec::kCap) continue;
                        for (const auto& keys : later_keys[li])
                            if (sorted_hits(keys, km - r, km + r)) { hit = true; break; }
                        if (hit) break;
                    }
                }
                if (!hit) aj.push_back(m);
            }
        }

        // Diagonal step: greedy smallest-first, F(a) ≠ G(c) for distinct chosen a, c.
        std::vector<std::int64_t> chosen;
        std::vector<std::vector<std::int64_t>> chosen_keys(ej.base.size());
        const std::int64_t r2 = 2 * ej.radius;
        for (auto a : aj) {
            bool conflict = false;
            for (const auto& f : ej.base) {
                std::int64_t ka = f.key(a);
                if (ka >= FunctionSpec::kCap) continue;
                for (const auto& keys : chosen_keys)
                    if (sorted_hits(keys, ka - r2, ka + r2)) { conflict = true; break; }
                if (conflict) break;
            }
            if (conflict) continue;
            chosen.push_back(a);
            for (std::size_t g = 0; g < ej.base.size(); ++g) chosen_keys[g].push_back(ej.base[g].key(a));
        }
        work[j] = std::move(chosen);
    }

    for (std::size_t k = 0; k < count; ++k) {
        double t = 0.0;
        for (const auto& f : families[k].base)
            t += static_cast<double>(key_multiplicity(f, horizon)) *
                 static_cast<double>(families[k].base.size()) * (4.0 * families[k].radius + 1.0);
        double thinned = design[k] / static_cast<double>(out.thinning_factors[k]);
        double asym = std::max(0.0, thinned - removed_budget[k]) / (2.0 * t + 1.0);
        double passes = static_cast<double>(k) + 1.0;
        out.asymptotic_floors.push_back(asym);
        out.floors.push_back(std::max(0.0, thinned - removed_budget[k] - passes / horizon) / (2.0 * t + 1.0));
        out.sets.emplace_back(std::move(work[k]), horizon);
    }
    return out;
}

IntegerSet thin_image_subset(const IntegerSet& b, const FunctionSpec& h, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0,1)");
    const std::int64_t k = ceil_ratio(2.0, delta);
    return IntegerSet(thin_every_kth(b.elements(), [&](std::int64_t x) { return h.integral_at(x); }, k),
                      b.horizon());
}

IntegerSet collision_free_subset(const IntegerSet& a, const std::vector<FunctionSpec>& fs) {
    const std::int64_t horizon = a.horizon();
    for (const auto& f : fs) {
        std::vector<long double> vals;
        vals.reserve(horizon);
        for (std::int64_t n = 1; n <= horizon; ++n) vals.push_back(f.value(n));
        std::sort(vals.begin(), vals.end());
        for (std::size_t i = 1; i < vals.size(); ++i)
            if (vals[i] - vals[i - 1] <= (f.integer_valued() ? 0.0L : 1e-12L))
                throw ArgumentError(f.describe() + " is not injective on [1, horizon]");
    }
    std::vector<std::int64_t> chosen;
    std::unordered_set<std::int64_t> images;  // f(c) for chosen c
    for (auto x : a.elements()) {
        if (images.count(x)) continue;
        bool blocked = false;
        for (const auto& f : fs) {
            if (f.integral_at(x) && std::binary_search(chosen.begin(), chosen.end(), f.key(x))) {
                blocked = true;
                break;
            }
        }
        if (blocked) continue;
        chosen.push_back(x);
        for (const auto& f : fs)
            if (f.integral_at(x)) images.insert(f.key(x));
    }
    return IntegerSet(std::move(chosen), horizon);
}

std::vector<IntegerSet> default_base_sets(int count, std::int64_t horizon,
                                          const std::vector<std::int64_t>& from) {
    if (count < 1 || count > 62) throw ArgumentError("count must lie in [1, 62] for residue-class bases");
    std::vector<IntegerSet> out;
    for (int k = 1; k <= count; ++k) {
        std::int64_t mod = std::int64_t(1) << k;
        std::int64_t start = k - 1 < static_cast<int>(from.size()) ? from[k - 1] : 1;
        out.push_back(IntegerSet::residue_class(mod / 2, mod, horizon, start));
    }
    return out;
}

namespace {

void fill_reports(SeparatedFamily& fam) {
    fam.density_reports.clear();
    for (const auto& a : fam.sets)
        fam.density_reports.push_back(density_report(a, default_checkpoints(fam.horizon)));
}

std::vector<IntegerSet> prepared_bases(const std::vector<IntegerSet>& supplied, int count,
                                       std::int64_t horizon, const std::vector<std::int64_t>& from) {
    if (supplied.empty()) return default_base_sets(count, horizon, from);
    if (static_cast<int>(supplied.size()) != count)
        throw ArgumentError("expected " + std::to_string(count) + " base sets");
    std::vector<IntegerSet> out;
    for (int k = 0; k < count; ++k) {
        if (supplied[k].horizon() != horizon) throw ArgumentError("base set horizon mismatch");
        out.push_back(supplied[k].restricted_from(from[k]));
    }
    return out;
}

SeparatedFamily run_sets_pipeline(const std::vector<FunctionSpec>& functions,
                                  const std::vector<IntegerSet>& supplied_bases,
                                  const std::vector<std::int64_t>& thresholds,
                                  const std::vector<std::int64_t>& radii,
                                  const std::vector<std::int64_t>& entry, std::int64_t horizon,
                                  SeparationMode mode, bool require_nonempty) {
    const int count = static_cast<int>(thresholds.size());
    auto bases = prepared_bases(supplied_bases, count, horizon, entry);
    std::vector<IndexFamily> fams;
    for (int k = 0; k < count; ++k) {
        if (bases[k].empty())
            throw ConstructionError("base set " + std::to_string(k + 1) + " is empty above its threshold", k + 1);
        fams.push_back(IndexFamily{functions, radii[k]});
    }
    auto po = separation_pipeline(fams, bases);

    SeparatedFamily fam;
    fam.mode = mode;
    fam.horizon = horizon;
    fam.functions = functions;
    fam.thresholds = thresholds;
    fam.radii = radii;
    fam.base_sets = supplied_bases.empty() ? bases : supplied_bases;
    fam.sets = po.sets;
    fam.floors = po.floors;
    fam.asymptotic_floors = po.asymptotic_floors;
    for (int k = 0; k < count; ++k) {
        double design = prefix_density(bases[k], horizon).get_d();
        fam.nominal_floors.push_back(design / (4.0 * functions.size() * count));
        if (require_nonempty && !(fam.asymptotic_floors[k] > 0.0))
            throw ConstructionError("thinning budgets exhaust set " + std::to_string(k + 1) +
                                        " before a positive density is reachable",
                                    k + 1);
        if (fam.sets[k].empty())
            fam.notes.push_back("A_" + std::to_string(k + 1) + " is empty at horizon " + std::to_string(horizon) +
                                " (floor x horizon = " + std::to_string(fam.floors[k] * horizon) + ")");
    }
    fill_reports(fam);
    fam.certificate = verify_family(fam);
    return fam;
}

}  // namespace

SeparatedFamily separated_under_functions(const SeparationRequest& req) {
    if (req.count < 1 || req.count > 64) throw ArgumentError("count must lie in [1, 64]");
    if (req.horizon < 1 || req.horizon > 100000000) throw ArgumentError("horizon must lie in [1, 1e8]");
    if (req.functions.empty()) throw ArgumentError("at least one function required");
    if (static_cast<int>(req.thresholds.size()) != req.count)
        throw ArgumentError("one threshold per set required");
    for (auto n : req.thresholds)
        if (n < 1) throw ArgumentError("thresholds must be >= 1");
    for (const auto& f : req.functions) f.check_increasing(req.horizon);
    for (const auto& b : req.base_sets)
        if (b.empty()) throw ArgumentError("base sets must have positive prefix density");
    return run_sets_pipeline(req.functions, req.base_sets, req.thresholds, req.thresholds,
                             req.thresholds, req.horizon, SeparationMode::theorem, true);
}

SeparatedFamily gap_separated_families(const FunctionSpec& phi1, const FunctionSpec& phi2,
                                       const std::vector<std::int64_t>& thresholds,
                                       const std::vector<IntegerSet>& base_sets,
                                       std::int64_t horizon) {
    if (thresholds.empty()) throw ArgumentError("thresholds must be nonempty");
    phi1.check_increasing(horizon);
    phi2.check_increasing(horizon);
    const std::int64_t nmax = *std::max_element(thresholds.begin(), thresholds.end());
    // Last n in [1, horizon] where phi2 − phi1 < 2 N, per threshold.
    std::vector<std::int64_t> m;
    for (auto nk : thresholds) {
        if (nk < 1) throw ArgumentError("thresholds must be >= 1");
        std::int64_t last_bad = 0;
        for (std::int64_t n = 1; n <= horizon; ++n)
            if (phi2.value(n) - phi1.value(n) < 2.0L * nk) last_bad = n;
        if (last_bad >= horizon)
            throw InfeasibleError("phi2 - phi1 never reaches 2*" + std::to_string(nk) + " within horizon");
        m.push_back(std::max(nk, last_bad + 1));
    }
    if (phi2.value(horizon) - phi1.value(horizon) < 2.0L * nmax)
        throw InfeasibleError("phi2 - phi1 is not eventually >= 2*max threshold within horizon");
    auto fam = run_sets_pipeline({phi1, phi2}, base_sets, thresholds, m, m, horizon,
                                 SeparationMode::corollary, true);
    fam.entry_thresholds = m;
    fam.notes.push_back("pipeline radii and entry points are M_k (phi2 - phi1 >= 2 N_k from M_k on)");
    return fam;
}

SeparatedFamily log_linear_families(
    const std::vector<std::pair<std::complex<double>, std::complex<double>>>& pairs,
    const std::vector<std::int64_t>& thresholds, std::int64_t horizon,
    const std::vector<IntegerSet>& base_sets) {
    if (pairs.size() != 2) throw ArgumentError("exactly two (a, b) pairs required");
    if (pairs[0] == pairs[1]) throw ArgumentError("(a1, b1) must differ from (a2, b2)");
    for (const auto& p : pairs)
        if (p.first == 0.0) throw ArgumentError("a_i must be nonzero");
    if (thresholds.empty()) throw ArgumentError("thresholds must be nonempty");

    // Pick the real or imaginary projection that keeps the pairs distinct with nonzero slopes.
    int proj = -1;
    for (int c = 0; c < 2 && proj < 0; ++c) {
        auto part = [c](std::complex<double> z) { return c == 0 ? z.real() : z.imag(); };
        double a1 = part(pairs[0].first), a2 = part(pairs[1].first);
        double b1 = part(pairs[0].second), b2 = part(pairs[1].second);
        if (a1 != 0.0 && a2 != 0.0 && (a1 != a2 || b1 != b2)) proj = c;
    }
    if (proj < 0)
        throw InfeasibleError("no real or imaginary projection separates the pairs with nonzero slopes");
    auto part = [proj](std::complex<double> z) { return proj == 0 ? z.real() : z.imag(); };
    double a1 = part(pairs[0].first), b1 = part(pairs[0].second);
    double a2 = part(pairs[1].first), b2 = part(pairs[1].second);

    SeparatedFamily fam;
    if ((a1 < 0) != (a2 < 0)) {
        // Opposite signs: φ_neg = −(a n + b log n), φ_pos = a' n + b' log n, both → +∞.
        bool first_neg = a1 < 0;
        double an = first_neg ? a1 : a2, bn = first_neg ? b1 : b2;
        double ap = first_neg ? a2 : a1, bp = first_neg ? b2 : b1;
        auto phi_neg = [&](std::int64_t n) { return -(an * n + bn * std::log(double(n))); };
        auto phi_pos = [&](std::int64_t n) { return ap * n + bp * std::log(double(n)); };
        // Increasing from `mono` on: slope a + b/n keeps its sign.
        std::int64_t mono = 1;
        for (std::int64_t n = 1; n <= horizon; ++n)
            if (phi_neg(n + 1) <= phi_neg(n) || phi_pos(n + 1) <= phi_pos(n)) mono = n + 1;
        if (mono >= horizon) throw InfeasibleError("log-linear maps not eventually increasing within horizon");
        std::vector<std::int64_t> m;
        for (auto nk : thresholds) {
            if (nk < 1) throw ArgumentError("thresholds must be >= 1");
            std::int64_t last_bad = 0;
            for (std::int64_t n = 1; n <= horizon; ++n)
                if (phi_neg(n) < nk || phi_pos(n) < nk) last_bad = n;
            if (last_bad >= horizon) throw InfeasibleError("threshold unreachable within horizon");
            m.push_back(std::max({nk, last_bad + 1, mono}));
        }
        std::int64_t start = *std::min_element(m.begin(), m.end());
        FunctionSpec f_neg = FunctionSpec::log_linear(-an, -bn, start);
        FunctionSpec f_pos = FunctionSpec::log_linear(ap, bp, start);
        fam = run_sets_pipeline({f_neg, f_pos}, base_sets, thresholds, thresholds, m, horizon,
                                SeparationMode::corollary, true);
        fam.entry_thresholds = m;
        fam.notes.push_back("opposite-sign branch: cross terms separated by M_k, same-map terms by the pipeline");
    } else {
        double sign = a1 < 0 ? -1.0 : 1.0;
        a1 *= sign, b1 *= sign, a2 *= sign, b2 *= sign;
        bool swap = (a1 > a2) || (a1 == a2 && b1 > b2);
        if (swap) std::swap(a1, a2), std::swap(b1, b2);
        std::int64_t mono = 1;
        for (std::int64_t n = 1; n <= horizon; ++n) {
            double s1 = a1 + b1 / double(n), s2 = a2 + b2 / double(n);
            if (s1 <= 0 || s2 <= 0) mono = n + 1;
        }
        if (mono >= horizon) throw InfeasibleError("log-linear maps not eventually increasing within horizon");
        FunctionSpec phi1 = FunctionSpec::log_linear(a1, b1, mono);
        FunctionSpec phi2 = FunctionSpec::log_linear(a2, b2, mono);
        fam = gap_separated_families(phi1, phi2, thresholds, base_sets, horizon);
        fam.notes.push_back("same-sign branch via gap separation of the projected maps");
    }
    fam.complex_pairs = pairs;
    fam.projection = proj;
    fam.certificate = verify_family(fam);
    return fam;
}

SeparatedFamily wpr_families(const std::vector<FunctionSpec>& fs, int levels,
                             const std::vector<IntegerSet>& base_sets, std::int64_t horizon) {
    if (fs.empty()) throw ArgumentError("at least one map required");
    if (levels < 1 || levels > 62) throw ArgumentError("levels must lie in [1, 62]");
    std::vector<FunctionSpec> maps;
    for (const auto& f : fs) {
        const FunctionSpec& g = f.kind == FunctionSpec::Kind::iterated_map ? *f.base : f;
        FunctionSpec::iterated_map(g, 1);  // validates integer-affine, increasing, f(1) > 1
        maps.push_back(g);
    }
    std::vector<IndexFamily> fams;
    for (int j = 1; j <= levels; ++j) {
        IndexFamily e;
        for (std::int64_t p = 1; p <= j; ++p)
            for (const auto& g : maps) e.base.push_back(FunctionSpec::iterated_map(g, p));
        fams.push_back(std::move(e));
    }
    std::vector<std::int64_t> ones(levels, 1);
    auto bases = prepared_bases(base_sets, levels, horizon, ones);
    auto po = separation_pipeline(fams, bases);

    SeparatedFamily fam;
    fam.mode = SeparationMode::wpr;
    fam.horizon = horizon;
    fam.functions = maps;
    fam.thresholds = ones;
    fam.radii.assign(levels, 0);
    fam.base_sets = bases;
    fam.sets = po.sets;
    fam.floors = po.floors;
    fam.asymptotic_floors = po.asymptotic_floors;
    for (int k = 0; k < levels; ++k) {
        double design = prefix_density(bases[k], horizon).get_d();
        fam.nominal_floors.push_back(design / (4.0 * maps.size() * levels));
    }
    fill_reports(fam);
    fam.certificate = verify_family(fam);
    return fam;
}

}  // namespace hclab
