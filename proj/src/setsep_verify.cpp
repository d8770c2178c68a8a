// Exhaustive certificate checker. Function values are recomputed here from the
// raw spec fields; nothing is shared with the constructor's key arithmetic.
#include <algorithm>
#include <cmath>
#include <numeric>

#include "hclab/errors.hpp"
#include "hclab/setsep.hpp"

namespace hclab {

namespace {

using i128 = __int128;
constexpr i128 kLimit = i128(1) << 62;

struct Entry {
    long double sort_value;
    i128 exact_value;
    std::complex<long double> cvalue;
    int set;
    int fn;
    std::int64_t elem;
};

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Compose x ↦ a x + b with itself m times by repeated squaring; nullopt on overflow.
std::optional<i128> power_apply(i128 a, i128 b, std::int64_t m, i128 x) {
    i128 ra = 1, rb = 0;  // accumulated map x ↦ ra x + rb
    i128 pa = a, pb = b;
    bool overflow_pending = false;
    while (m > 0) {
        if (m & 1) {
            if (overflow_pending) return std::nullopt;
            // (pa, pb) ∘ (ra, rb)
            i128 na = pa * ra, nb = pa * rb + pb;
            if (na > kLimit || nb > kLimit || nb < -kLimit) return std::nullopt;
            ra = na, rb = nb;
        }
        m >>= 1;
        if (m > 0) {
            if (pa > kLimit / pa) overflow_pending = true;
            else {
                i128 nb = pa * pb + pb;
                pa = pa * pa;
                if (nb > kLimit || nb < -kLimit) overflow_pending = true;
                else pb = nb;
            }
        }
    }
    i128 v = ra * x + rb;
    if (v > kLimit || v < -kLimit || (ra != 0 && x > kLimit / ra)) return std::nullopt;
    return v;
}

// Rational value scaled by a common denominator, or a real approximation.
struct Evaluator {
    const FunctionSpec& f;
    i128 scale = 1;

    bool exact() const {
        const FunctionSpec* g = &f;
        while (g->kind == FunctionSpec::Kind::shifted) g = g->base.get();
        return g->kind != FunctionSpec::Kind::log_linear;
    }

    i128 denominators() const {
        const FunctionSpec* g = &f;
        while (g->kind == FunctionSpec::Kind::shifted) g = g->base.get();
        if (g->kind == FunctionSpec::Kind::affine) {
            i128 l = g->a.den;
            return l / gcd128(l, g->b.den) * g->b.den;
        }
        return 1;
    }

    std::optional<i128> exact_at(std::int64_t n) const { return exact_rec(f, n); }

    std::optional<i128> exact_rec(const FunctionSpec& g, std::int64_t n) const {
        switch (g.kind) {
            case FunctionSpec::Kind::identity: return i128(n) * scale;
            case FunctionSpec::Kind::affine:
                return i128(g.a.num) * (scale / g.a.den) * n + i128(g.b.num) * (scale / g.b.den);
            case FunctionSpec::Kind::iterated_map: {
                auto v = power_apply(g.base->a.num, g.base->b.num, n, g.point);
                if (!v) return std::nullopt;
                return *v * scale;
            }
            case FunctionSpec::Kind::shifted: {
                auto v = exact_rec(*g.base, n);
                if (!v) return std::nullopt;
                return *v + i128(g.offset) * scale;
            }
            case FunctionSpec::Kind::log_linear: break;
        }
        return std::nullopt;
    }

    long double real_at(std::int64_t n) const { return real_rec(f, n); }

    long double real_rec(const FunctionSpec& g, std::int64_t n) const {
        switch (g.kind) {
            case FunctionSpec::Kind::log_linear: {
                // Below `from` the map continues with slope one.
                std::int64_t m = std::max(n, g.from);
                long double v = (long double)g.la * m + (long double)g.lb * std::log((long double)m);
                return v - (long double)(m - n);
            }
            case FunctionSpec::Kind::shifted: return real_rec(*g.base, n) + g.offset;
            default: {
                auto v = exact_rec(g, n);
                return v ? (long double)*v / (long double)scale : INFINITY;
            }
        }
    }
};

void record(Certificate& c, const Entry& x, const Entry& y, double gap, double required,
            std::size_t max_violations) {
    ++c.violation_count;
    if (c.violations.size() < max_violations)
        c.violations.push_back(Violation{x.set + 1, x.fn, x.elem, y.set + 1, y.fn, y.elem, gap, required});
}

}  // namespace

Certificate verify_family(const SeparatedFamily& fam, std::size_t max_violations) {
    Certificate c;
    c.mode = fam.mode;
    const int count = static_cast<int>(fam.sets.size());
    if (static_cast<int>(fam.thresholds.size()) != count)
        throw PreconditionError("family has " + std::to_string(count) + " sets but " +
                                std::to_string(fam.thresholds.size()) + " thresholds");

    c.subset_ok = fam.base_sets.size() == fam.sets.size();
    for (int k = 0; k < count && c.subset_ok; ++k) {
        const auto& a = fam.sets[k].elements();
        const auto& b = fam.base_sets[k].elements();
        std::size_t bi = 0;
        for (auto x : a) {
            while (bi < b.size() && b[bi] < x) ++bi;
            if (bi == b.size() || b[bi] != x) {
                c.subset_ok = false;
                c.facts.push_back("A_" + std::to_string(k + 1) + " contains " + std::to_string(x) +
                                  " outside B_" + std::to_string(k + 1));
                break;
            }
        }
    }
    c.thresholds_ok = true;
    for (int k = 0; k < count; ++k)
        if (!fam.sets[k].empty() && fam.sets[k].elements().front() < fam.thresholds[k]) {
            c.thresholds_ok = false;
            c.facts.push_back("min A_" + std::to_string(k + 1) + " below N_" + std::to_string(k + 1));
        }
    {
        std::vector<std::pair<std::int64_t, int>> all;
        for (int k = 0; k < count; ++k)
            for (auto x : fam.sets[k].elements()) all.emplace_back(x, k);
        std::sort(all.begin(), all.end());
        c.disjoint_ok = true;
        for (std::size_t i = 1; i < all.size(); ++i)
            if (all[i].first == all[i - 1].first) {
                c.disjoint_ok = false;
                c.facts.push_back(std::to_string(all[i].first) + " lies in two sets");
                break;
            }
    }

    // Collect every value F(n), n ∈ A_k.
    std::vector<Entry> entries;
    const bool complex_mode = !fam.complex_pairs.empty();
    bool all_exact = !complex_mode;
    std::vector<Evaluator> evs;
    i128 scale = 1;
    for (const auto& f : fam.functions) {
        evs.push_back(Evaluator{f});
        all_exact = all_exact && evs.back().exact();
        if (evs.back().exact()) {
            i128 d = evs.back().denominators();
            scale = scale / gcd128(scale, d) * d;
        }
    }
    for (auto& e : evs) e.scale = scale;

    for (int k = 0; k < count; ++k) {
        for (auto n : fam.sets[k].elements()) {
            if (complex_mode) {
                for (int i = 0; i < static_cast<int>(fam.complex_pairs.size()); ++i) {
                    std::complex<long double> a(fam.complex_pairs[i].first.real(), fam.complex_pairs[i].first.imag());
                    std::complex<long double> b(fam.complex_pairs[i].second.real(), fam.complex_pairs[i].second.imag());
                    auto v = a * (long double)n + b * std::log((long double)n);
                    long double sv = fam.projection == 0 ? v.real() : v.imag();
                    entries.push_back(Entry{sv, 0, v, k, i, n});
                }
                continue;
            }
            if (fam.mode == SeparationMode::wpr) {
                for (int s = 0; s < static_cast<int>(fam.functions.size()); ++s) {
                    const auto& f = fam.functions[s];
                    for (std::int64_t p = 1; p <= k + 1; ++p) {
                        auto v = power_apply(f.a.num, f.b.num, n, p);
                        if (!v) {
                            ++c.unverifiable;
                            continue;
                        }
                        entries.push_back(Entry{(long double)*v, *v, {}, k, s, n});
                    }
                }
                continue;
            }
            for (int i = 0; i < static_cast<int>(evs.size()); ++i) {
                if (all_exact) {
                    auto v = evs[i].exact_at(n);
                    if (!v) {
                        ++c.unverifiable;
                        continue;
                    }
                    entries.push_back(Entry{(long double)*v / (long double)scale, *v, {}, k, i, n});
                } else {
                    long double v = evs[i].real_at(n);
                    entries.push_back(Entry{v, 0, {}, k, i, n});
                }
            }
        }
    }
    c.values_checked = static_cast<std::int64_t>(entries.size());
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
        if (x.sort_value != y.sort_value) return x.sort_value < y.sort_value;
        if (x.exact_value != y.exact_value) return x.exact_value < y.exact_value;
        return std::tie(x.set, x.elem, x.fn) < std::tie(y.set, y.elem, y.fn);
    });

    std::int64_t nmax = 0;
    for (auto n : fam.thresholds) nmax = std::max(nmax, n);
    const long double window = fam.mode == SeparationMode::wpr ? 1.0L : 2.0L * nmax + 1.0L;
    const long double tol = 1e-6L;
    c.min_slack = INFINITY;
    c.separation_ok = true;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& x = entries[i];
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            const Entry& y = entries[j];
            if (y.sort_value - x.sort_value >= window && j > i + 1) break;
            bool applies = false;
            switch (fam.mode) {
                case SeparationMode::theorem:
                case SeparationMode::wpr: applies = x.elem != y.elem; break;
                case SeparationMode::corollary: applies = x.elem != y.elem || x.fn != y.fn; break;
            }
            if (!applies) continue;
            ++c.pairs_compared;
            if (y.sort_value - x.sort_value >= window) {
                c.min_slack = std::min<double>(c.min_slack, double(y.sort_value - x.sort_value) -
                                                                2.0 * double(nmax));
                continue;
            }
            if (fam.mode == SeparationMode::wpr) {
                if (x.exact_value == y.exact_value) {
                    c.separation_ok = false;
                    record(c, x, y, 0.0, 1.0, max_violations);
                }
                continue;
            }
            const std::int64_t req = fam.thresholds[x.set] + fam.thresholds[y.set];
            if (all_exact) {
                i128 gap = y.exact_value - x.exact_value;
                if (gap < 0) gap = -gap;
                long double slack = (long double)(gap - i128(req) * scale) / (long double)scale;
                c.min_slack = std::min<double>(c.min_slack, (double)slack);
                if (gap < i128(req) * scale) {
                    c.separation_ok = false;
                    record(c, x, y, (double)((long double)gap / (long double)scale), (double)req, max_violations);
                }
            } else {
                long double gap = complex_mode ? std::abs(x.cvalue - y.cvalue) : std::fabs(y.sort_value - x.sort_value);
                c.min_slack = std::min<double>(c.min_slack, (double)(gap - req));
                if (gap < (long double)req - tol) {
                    c.separation_ok = false;
                    record(c, x, y, (double)gap, (double)req, max_violations);
                }
            }
        }
    }
    if (fam.mode == SeparationMode::wpr) c.min_slack = c.separation_ok ? 0.0 : -1.0;
    if (!std::isfinite(c.min_slack)) c.min_slack = 0.0;
    if (c.unverifiable > 0)
        c.facts.push_back(std::to_string(c.unverifiable) + " values beyond 2^62 treated as non-colliding");
    c.passed = c.subset_ok && c.thresholds_ok && c.disjoint_ok && c.separation_ok;
    return c;
}

}  // namespace hclab
