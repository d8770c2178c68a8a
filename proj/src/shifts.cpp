#include "hclab/shifts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hclab/errors.hpp"

namespace hclab {

namespace {

long double log_abs(const mpz_class& z) {
    long e = 0;
    double d = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log(std::fabs((long double)d)) + (long double)e * std::log(2.0L);
}

long double log_abs(const mpq_class& q) { return log_abs(q.get_num()) - log_abs(q.get_den()); }

mpz_class pow_ui(unsigned long base, unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, e);
    return r;
}

// Exact rational value of a finite positive long double.
mpq_class exact_rational(long double x) {
    int e = 0;
    long double mant = std::frexp(x, &e);  // x = mant·2^e, mant ∈ [0.5, 1)
    auto m = static_cast<unsigned long>(std::ldexp(mant, 64));
    mpq_class q{mpz_class(m)};
    int shift = e - 64;
    if (shift >= 0) mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), shift);
    else mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), -shift);
    q.canonicalize();
    return q;
}

long double lfact(int n) { return std::lgamma((long double)n + 1.0L); }

// log((p−1)!·p^{2+2p})
long double log_c(int p) { return lfact(p - 1) + (2.0L + 2.0L * p) * std::log((long double)p); }

}  // namespace

// ---------------------------------------------------------------------------

WeightSequence WeightSequence::make(std::vector<double> weights, int exponent) {
    if (exponent < 0) throw ArgumentError("norm exponent must be ≥ 0");
    WeightSequence w;
    w.exponent = exponent;
    w.min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double v = weights[i];
        if (!std::isfinite(v) || v == 0.0)
            throw ArgumentError("weight w_" + std::to_string(i + 1) + " must be finite and nonzero");
        w.min_abs = std::min(w.min_abs, std::fabs(v));
        w.max_abs = std::max(w.max_abs, std::fabs(v));
    }
    if (weights.empty()) w.min_abs = 0.0;
    w.weights = std::move(weights);
    return w;
}

SparseVector SparseVector::make(std::vector<std::pair<std::int64_t, std::complex<double>>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    SparseVector v;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].first < 0) throw ArgumentError("negative index " + std::to_string(entries[i].first));
        if (i > 0 && entries[i].first == entries[i - 1].first)
            throw ArgumentError("duplicate index " + std::to_string(entries[i].first));
        if (entries[i].second != 0.0) v.entries.push_back(entries[i]);
    }
    return v;
}

SparseVector SparseVector::basis(std::int64_t index, std::complex<double> c) { return make({{index, c}}); }

std::complex<double> SparseVector::at(std::int64_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::int64_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0.0;
}

double SparseVector::norm(int exponent) const {
    if (exponent == 0) {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, std::abs(e.second));
        return m;
    }
    double s = 0.0;
    for (const auto& e : entries) s += std::pow(std::abs(e.second), exponent);
    return std::pow(s, 1.0 / exponent);
}

SparseVector apply_pseudo_shift(const PseudoShiftSpec& t, const SparseVector& x) {
    const std::int64_t h = t.w.horizon();
    std::vector<std::pair<std::int64_t, std::complex<double>>> out;
    for (const auto& [i, c] : x.entries) {
        if (i > h) throw TruncationError("index " + std::to_string(i) + " beyond stored weights (" +
                                         std::to_string(h) + ")");
        if (i < 1) continue;
        // Preimage j with f(j) = i; j = 0 takes part when f(0) is a positive integer.
        std::optional<std::int64_t> j;
        if (t.f.integral_at(0) && t.f.key(0) == i) j = 0;
        else if (auto m = t.f.key_lower_bound(i); m && t.f.key(*m) == i && t.f.integral_at(*m)) j = *m;
        if (j) out.emplace_back(*j, t.w.at(i) * c);
    }
    return SparseVector::make(std::move(out));
}

SparseVector shift_power_orbit(const WeightSequence& w, const SparseVector& z, std::int64_t n) {
    if (n < 0) throw ArgumentError("orbit exponent must be ≥ 0");
    if (n == 0) return z;
    const std::int64_t h = w.horizon();
    std::int64_t top = z.entries.empty() ? 0 : z.entries.back().first;
    if (top > h) throw TruncationError("index " + std::to_string(top) + " beyond stored weights (" +
                                       std::to_string(h) + ")");
    std::vector<long double> s(static_cast<std::size_t>(top) + 1, 0.0L);
    std::vector<int> neg(static_cast<std::size_t>(top) + 1, 0);
    for (std::int64_t k = 1; k <= top; ++k) {
        s[k] = s[k - 1] + std::log(std::fabs((long double)w.at(k)));
        neg[k] = neg[k - 1] + (w.at(k) < 0 ? 1 : 0);
    }
    std::vector<std::pair<std::int64_t, std::complex<double>>> out;
    for (const auto& [i, c] : z.entries) {
        if (i < n) continue;
        std::int64_t j = i - n;
        long double mag = std::exp(s[i] - s[j]);
        double sign = ((neg[i] - neg[j]) % 2) ? -1.0 : 1.0;
        std::complex<double> v = c * (double)mag * sign;
        if (std::isnan(v.real()) || std::isnan(v.imag()))
            throw DomainError("NaN in orbit coefficient at index " + std::to_string(j));
        out.emplace_back(j, v);
    }
    return SparseVector::make(std::move(out));
}

// ---------------------------------------------------------------------------
// Growth conditions on N_p.

namespace {

ScheduleCheck check_one(int p, std::int64_t np) {
    ScheduleCheck c;
    c.p = p;
    c.n_p = np;
    const long double n = (long double)np, lp = (long double)p;
    auto add = [&](std::string name, long double value, bool ok) {
        c.rows.emplace_back(std::move(name), (double)value, ok);
        c.passed = c.passed && ok;
    };
    add("N_p >= p^2", n - lp * lp, n >= lp * lp);
    add("N_p >= p^5", n - std::pow(lp, 5), n >= std::pow(lp, 5));
    if (np <= p) {
        add("filler upper bound <= 5", INFINITY, false);
        return c;
    }
    // log of 4^{N/(N−p)}((p−1)! p^{2+2p})^{1/(N−p)} − log 5
    long double up = n / (n - lp) * std::log(4.0L) + log_c(p) / (n - lp) - std::log(5.0L);
    add("filler upper bound <= 5", up, up <= 0);
    // log of (1/5)^{p/(N−p)} − log(1/p); the p = 1 instance cannot hold and is not needed
    // there (a block with p = 1 has fillers ≥ 4).
    long double lo = -lp / (n - lp) * std::log(5.0L) + std::log(lp);
    add(p == 1 ? "filler lower bound >= 1/p (not required at p=1)" : "filler lower bound >= 1/p", lo,
        p == 1 || lo >= 0);
    long double gr = n * std::log(4.0L / 3.0L) - lp * std::log(3.0L) - log_c(p);
    add("orbit growth >= 1", gr, gr >= 0);
    return c;
}

}  // namespace

ScheduleReport check_schedule(const std::vector<std::int64_t>& ns) {
    ScheduleReport r;
    long double prev_term = INFINITY, prev_err = INFINITY;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const int p = static_cast<int>(i) + 1;
        ScheduleCheck c = check_one(p, ns[i]);
        if (i > 0 && ns[i] <= ns[i - 1]) {
            c.rows.emplace_back("N_p increasing", (double)(ns[i] - ns[i - 1]), false);
            c.passed = false;
        }
        const long double lp = p;
        long double term = std::exp((2 + 2 * lp) * std::log(lp) - (ns[i] - 1) * std::log(4.0L));
        r.eq6_partial_sum += (double)term;
        bool ok6 = std::isfinite(term) && (i == 0 || term <= prev_term);
        c.rows.emplace_back("z summability term p^{2+2p}/4^{N_p-1} nonincreasing", (double)term, ok6);
        long double err = std::exp(lp * std::log(5.0L) + 3 * std::log(lp) - ns[i] * std::log(3.0L));
        bool ok7 = i == 0 || err < prev_err;
        c.rows.emplace_back("error term 5^p p^3/3^{N_p} decreasing", (double)err, ok7);
        c.passed = c.passed && ok6 && ok7;
        prev_term = term;
        prev_err = err;
        r.passed = r.passed && c.passed;
        r.per_p.push_back(std::move(c));
    }
    return r;
}

std::vector<std::int64_t> default_schedule(int count) {
    if (count < 1) throw ArgumentError("schedule needs at least one index");
    std::vector<std::int64_t> ns;
    for (int p = 1; p <= count; ++p) {
        std::int64_t n = std::max<std::int64_t>(p + 1, ns.empty() ? 1 : ns.back() + 1);
        for (;; ++n) {
            auto trial = ns;
            trial.push_back(n);
            if (check_schedule(trial).passed) break;
        }
        ns.push_back(n);
    }
    return ns;
}

// ---------------------------------------------------------------------------
// Targets.

TargetPair default_targets(int p) {
    if (p < 1) throw ArgumentError("target index must be ≥ 1");
    // Signed Calkin–Wilf order: q_1, −q_1, q_2, −q_2, …; x_p uses the p entries after x_{p−1}'s.
    const int start = p * (p - 1) / 2;
    std::vector<mpq_class> signed_seq;
    mpq_class q = 1;
    while (static_cast<int>(signed_seq.size()) < start + p) {
        signed_seq.push_back(q);
        signed_seq.push_back(-q);
        mpz_class fl;
        mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
        q = 1 / (mpq_class(2 * fl) - q + 1);
    }
    const mpq_class hi = p, lo = mpq_class(1, p);
    TargetPair t;
    for (int i = 0; i < p; ++i) {
        mpq_class v = signed_seq[start + i];
        mpq_class m = abs(v);
        int sg = sgn(v);
        if (m < lo) v = sg * lo;
        if (m > hi) v = sg * hi;
        t.a.push_back(v);
    }
    t.b.assign(t.a.rbegin(), t.a.rend());
    return t;
}

// ---------------------------------------------------------------------------
// Construction.

namespace {

// Interleaves the sets in increasing order. A set whose count lags its design density
// gets priority (highest index first); the others wait until it can be placed.
std::vector<IntegerSet> greedy_sets(const std::vector<std::int64_t>& ns, std::int64_t h,
                                    const std::vector<double>& density) {
    const int count = static_cast<int>(ns.size());
    std::vector<std::vector<std::int64_t>> sets(count);
    std::vector<std::int64_t> last(count, -1);
    auto limit = [&](int k) { return h + 1 - ns[k] - ns[0]; };
    auto feasible = [&](int k, std::int64_t n) {
        if (n < std::max<std::int64_t>(k + 1, ns[k]) || n > limit(k)) return false;
        for (int q = 0; q < count; ++q)
            if (last[q] >= 0 && n - last[q] < ns[k] + ns[q]) return false;
        return true;
    };
    for (std::int64_t n = 1; n <= h; ++n) {
        int owed = -1;
        for (int k = count - 1; k >= 0; --k) {
            if (n < ns[k] || n > limit(k)) continue;
            double debt = density[k] * double(n - ns[k] + 1) - double(sets[k].size());
            if (debt > 0) {
                owed = k;
                break;
            }
        }
        int pick = -1;
        if (owed >= 0) {
            if (feasible(owed, n)) pick = owed;
        } else {
            for (int k = 0; k < count && pick < 0; ++k)
                if (feasible(k, n)) pick = k;
        }
        if (pick >= 0) {
            sets[pick].push_back(n);
            last[pick] = n;
        }
    }
    std::vector<IntegerSet> out;
    for (auto& s : sets) out.emplace_back(std::move(s), h);
    return out;
}

}  // namespace

DfhcConstruction build_dfhc_pair(const DfhcOptions& opts) {
    if (opts.count < 1) throw ArgumentError("coverage must include p = 1");
    if (opts.horizon < 2) throw ArgumentError("horizon must be ≥ 2");
    DfhcConstruction c;
    c.horizon = opts.horizon;
    c.count = opts.count;
    c.n_schedule = opts.schedule ? *opts.schedule : default_schedule(opts.count);
    if (static_cast<int>(c.n_schedule.size()) != opts.count)
        throw ArgumentError("schedule has " + std::to_string(c.n_schedule.size()) + " entries, coverage is " +
                            std::to_string(opts.count));
    c.schedule_report = check_schedule(c.n_schedule);
    for (const auto& pc : c.schedule_report.per_p)
        for (const auto& [name, value, ok] : pc.rows)
            if (!ok)
                throw PreconditionError("schedule violates '" + name + "' at p=" + std::to_string(pc.p) +
                                        " (N_p=" + std::to_string(pc.n_p) + ")");

    for (int p = 1; p <= opts.count; ++p) {
        TargetPair t = opts.targets(p);
        if (static_cast<int>(t.a.size()) != p || static_cast<int>(t.b.size()) != p)
            throw PreconditionError("targets for p=" + std::to_string(p) + " must have p entries");
        for (const auto* v : {&t.a, &t.b})
            for (const auto& x : *v)
                if (abs(x) < mpq_class(1, p) || abs(x) > p)
                    throw PreconditionError("target entry " + x.get_str() + " outside [1/p, p] for p=" +
                                            std::to_string(p));
        c.targets.push_back(std::move(t));
    }

    const auto& ns = c.n_schedule;
    const std::int64_t h = c.horizon;
    std::vector<IntegerSet> sets;
    std::vector<IntegerSet> bases;
    if (opts.source == SetSource::greedy) {
        c.source = "greedy";
        for (int k = 0; k < opts.count; ++k)
            c.design_density.push_back(1.0 / (std::ldexp(1.0, k + 2) * double(ns[k] + ns[0])));
        sets = greedy_sets(ns, h, c.design_density);
        for (int k = 0; k < opts.count; ++k) bases.push_back(IntegerSet::interval(1, h, h));
    } else {
        c.source = "pipeline";
        SeparationRequest req;
        req.functions = {FunctionSpec::identity()};
        req.thresholds = ns;
        req.count = opts.count;
        req.horizon = h;
        SeparatedFamily fam = separated_under_functions(req);
        c.design_density = fam.asymptotic_floors;
        bases = fam.base_sets;
        // Every block needs room for its fillers before the horizon.
        for (int k = 0; k < opts.count; ++k) {
            std::vector<std::int64_t> keep;
            for (auto n : fam.sets[k].elements())
                if (n <= h + 1 - ns[k] - ns[0]) keep.push_back(n);
            if (keep.size() != fam.sets[k].size())
                c.notes.push_back("A_" + std::to_string(k + 1) + ": dropped " +
                                  std::to_string(fam.sets[k].size() - keep.size()) +
                                  " element(s) too close to the horizon");
            sets.emplace_back(std::move(keep), h);
        }
    }
    for (int k = 0; k < opts.count; ++k)
        if (sets[k].empty())
            c.notes.push_back("A_" + std::to_string(k + 1) + " is empty below the horizon " + std::to_string(h));
    c.a_sets = sets;

    {
        SeparatedFamily fam;
        fam.mode = SeparationMode::theorem;
        fam.horizon = h;
        fam.functions = {FunctionSpec::identity()};
        fam.thresholds = ns;
        fam.base_sets = bases;
        fam.sets = sets;
        c.set_certificate = verify_family(fam);
        if (!c.set_certificate.passed) throw ConstructionError("sets A_p violate the gap conditions", 0);
    }

    std::vector<std::pair<std::int64_t, int>> starts;
    for (int k = 0; k < opts.count; ++k)
        for (auto n : sets[k].elements()) starts.emplace_back(n, k + 1);
    std::sort(starts.begin(), starts.end());
    for (auto& [n, p] : starts) {
        c.blocks.push_back(n);
        c.block_p.push_back(p);
    }

    c.w.assign(h, mpq_class(4));
    c.wp.assign(h, mpq_class(4));
    mpq_class pref_w = 1, pref_wp = 1;
    {
        std::int64_t first = c.blocks.empty() ? h + 1 : c.blocks.front();
        for (std::int64_t n = 1; n < first; ++n) pref_w *= c.w[n - 1], pref_wp *= c.wp[n - 1];
    }

    for (std::size_t k = 0; k < c.blocks.size(); ++k) {
        const std::int64_t s = c.blocks[k];
        const int p = c.block_p[k];
        const std::int64_t e = k + 1 < c.blocks.size() ? c.blocks[k + 1] : h + 1;
        const std::int64_t len = e - s, m = len - p;
        const TargetPair& t = c.targets[p - 1];
        c.block_prefix_w.push_back(pref_w);
        c.block_prefix_wp.push_back(pref_wp);

        const mpq_class four_pow_s = mpq_class(pow_ui(4, s - 1));
        mpz_class pp = p;
        for (int l = 0; l < p; ++l) {
            mpz_class num;
            mpz_pow_ui(num.get_mpz_t(), pp.get_mpz_t(), 1 + 2 * l);
            mpq_class zv(num, four_pow_s.get_num());
            zv.canonicalize();
            c.z.emplace_back(s + l, zv);
        }
        auto fill = [&](std::vector<mpq_class>& w, const std::vector<mpq_class>& tg) {
            w[s - 1] = tg[0] / p;
            for (int l = 1; l < p; ++l) w[s + l - 1] = tg[l] * w[l - 1] / (tg[l - 1] * p * p);
            mpq_class prod = 1;
            for (int l = 0; l < p; ++l) prod *= w[s + l - 1];
            const mpz_class four_len = pow_ui(4, len);
            long double lx = ((long double)len * std::log(4.0L) - log_abs(prod)) / (long double)m;
            mpq_class x = exact_rational(std::exp(lx));
            for (std::int64_t n = s + p; n < e - 1; ++n) w[n - 1] = x;
            mpq_class xm;
            mpz_pow_ui(xm.get_num_mpz_t(), x.get_num_mpz_t(), m - 1);
            mpz_pow_ui(xm.get_den_mpz_t(), x.get_den_mpz_t(), m - 1);
            xm.canonicalize();
            w[e - 2] = mpq_class(four_len) / (prod * xm);
        };
        fill(c.w, t.a);
        fill(c.wp, t.b);
        for (std::int64_t n = s; n < e; ++n) pref_w *= c.w[n - 1], pref_wp *= c.wp[n - 1];
    }

    c.log_w.resize(h);
    c.log_wp.resize(h);
    for (std::int64_t n = 0; n < h; ++n) {
        c.log_w[n] = log_abs(c.w[n]);
        c.log_wp[n] = log_abs(c.wp[n]);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Independent WS checker: recomputes every product from the stored weights.

WsReport verify_ws(const DfhcConstruction& c, double rel_slack) {
    WsReport r;
    r.ws1 = r.ws2a = r.ws2b = r.ws2c = r.ws2d = r.ws3 = r.ws4 = true;
    const std::int64_t h = c.horizon;
    auto fail = [&](bool& flag, std::string msg) {
        flag = false;
        if (r.failures.size() < 16) r.failures.push_back(std::move(msg));
    };
    if (static_cast<std::int64_t>(c.w.size()) != h || static_cast<std::int64_t>(c.wp.size()) != h) {
        fail(r.ws1, "weight sequences do not cover the horizon");
        return r;
    }

    // Block starts must be the sorted union of the A_p.
    std::map<std::int64_t, int> owner;
    for (int k = 0; k < static_cast<int>(c.a_sets.size()); ++k)
        for (auto n : c.a_sets[k].elements()) owner[n] = k + 1;
    {
        std::vector<std::int64_t> expect;
        for (auto& [n, p] : owner) expect.push_back(n);
        if (expect != c.blocks) fail(r.ws1, "block starts differ from the union of the A_p");
    }
    const std::int64_t first = c.blocks.empty() ? h + 1 : c.blocks.front();
    for (std::int64_t n = 1; n < first; ++n)
        if (c.w[n - 1] != 4 || c.wp[n - 1] != 4) fail(r.ws1, "w_" + std::to_string(n) + " ≠ 4 before n_1");

    // Expected support of z.
    std::map<std::int64_t, std::pair<std::int64_t, int>> pattern;  // index → (block start, l)
    for (auto& [n, p] : owner)
        for (int l = 0; l < p; ++l) pattern[n + l] = {n, l};
    {
        std::map<std::int64_t, mpq_class> zmap;
        for (const auto& [i, v] : c.z) {
            if (v == 0) continue;
            zmap[i] = v;
            if (!pattern.count(i)) fail(r.ws2d, "z_" + std::to_string(i) + " ≠ 0 off-pattern");
        }
        for (auto& [i, bl] : pattern) {
            auto it = zmap.find(i);
            if (it == zmap.end()) {
                fail(r.ws2a, "z_" + std::to_string(i) + " missing");
                continue;
            }
            const int p = owner[bl.first];
            mpz_class bound_num;
            mpz_ui_pow_ui(bound_num.get_mpz_t(), p, 1 + 2 * bl.second);
            mpq_class bound(bound_num, pow_ui(4, bl.first - 1));
            bound.canonicalize();
            if (abs(it->second) > bound) fail(r.ws2c, "|z_" + std::to_string(i) + "| above p^{1+2l}/4^{n_j-1}");
        }
    }

    // Block products.
    for (std::size_t k = 0; k < c.blocks.size(); ++k) {
        const std::int64_t s = c.blocks[k], e = k + 1 < c.blocks.size() ? c.blocks[k + 1] : h + 1;
        mpq_class pw = 1, pwp = 1;
        for (std::int64_t n = s; n < e; ++n) pw *= c.w[n - 1], pwp *= c.wp[n - 1];
        const mpq_class target(pow_ui(4, e - s));
        if (pw != target || pwp != target)
            fail(r.ws1, "block at " + std::to_string(s) + ": product ≠ 4^" + std::to_string(e - s));
        ++r.blocks_checked;
    }

    // Running exact prefix products for (a)/(b); small prefixes w_1···w_l kept separately.
    std::vector<mpq_class> small_w{1}, small_wp{1};
    for (std::int64_t l = 1; l <= std::min<std::int64_t>(h, c.count); ++l) {
        small_w.push_back(small_w.back() * c.w[l - 1]);
        small_wp.push_back(small_wp.back() * c.wp[l - 1]);
    }
    std::map<std::int64_t, mpq_class> zmap(c.z.begin(), c.z.end());
    mpq_class pw = 1, pwp = 1;
    const mpq_class hi = mpq_class(5) * mpq_class(1.0 + rel_slack);
    const long double l3 = std::log(3.0L);
    long double sw = 0, swp = 0;
    r.ws4_worst_margin = INFINITY;
    for (std::int64_t n = 1; n <= h; ++n) {
        const mpq_class& w = c.w[n - 1];
        const mpq_class& wq = c.wp[n - 1];
        pw *= w;
        pwp *= wq;
        if (auto it = pattern.find(n); it != pattern.end()) {
            const auto [s, l] = it->second;
            const int p = owner[s];
            auto zt = zmap.find(n);
            if (zt != zmap.end()) {
                if (pw / small_w[l] * zt->second != c.targets[p - 1].a[l])
                    fail(r.ws2a, "w_{1+l}···w_{n_j+l} z ≠ a_l at n=" + std::to_string(n));
                if (pwp / small_wp[l] * zt->second != c.targets[p - 1].b[l])
                    fail(r.ws2b, "w'_{1+l}···w'_{n_j+l} z ≠ b_l at n=" + std::to_string(n));
            }
        }
        const mpq_class lo = mpq_class(1, n) * mpq_class(1.0 - rel_slack);
        for (const mpq_class* v : {&w, &wq}) {
            mpq_class a = abs(*v);
            double ratio = std::max(mpq_class(a / 5).get_d(), mpq_class(mpq_class(1, n) / a).get_d());
            r.ws3_worst_ratio = std::max(r.ws3_worst_ratio, ratio);
            if (a > hi || a < lo) fail(r.ws3, "|w_" + std::to_string(n) + "| = " + std::to_string(a.get_d()) +
                                                  " outside [1/n, 5]");
        }
        sw += log_abs(w);
        swp += log_abs(wq);
        const long double need = (long double)n * l3;
        for (long double sv : {sw, swp}) {
            long double margin = (sv - need) / need;
            r.ws4_worst_margin = std::min<double>(r.ws4_worst_margin, (double)margin);
            if (margin < -rel_slack) fail(r.ws4, "|w_1···w_n| < 3^n at n=" + std::to_string(n));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Orbit distances.

long double epsilon_bound(const std::vector<std::int64_t>& ns, int p) {
    if (p < 1 || p > static_cast<int>(ns.size())) throw RangeError("p outside the covered range");
    auto term = [&](int q, int power) {
        long double lq = q;
        return std::exp(lq * std::log(5.0L) + power * std::log(lq) - (long double)ns[q - 1] * std::log(3.0L));
    };
    long double eps = 1.5L * term(p, 3);
    for (int q = p + 1; q <= static_cast<int>(ns.size()); ++q) eps += 1.5L * term(q, 2);
    return eps;
}

namespace {

struct OrbitEvaluator {
    const DfhcConstruction& c;
    std::vector<long double> sw, swp;  // prefix sums of log|w|
    std::vector<std::int64_t> zidx;
    std::vector<long double> zlog;
    std::vector<mpq_class> head_w, head_wp;  // w_1···w_i z_i for each support index i

    explicit OrbitEvaluator(const DfhcConstruction& con) : c(con) {
        sw.assign(c.horizon + 1, 0.0L);
        swp.assign(c.horizon + 1, 0.0L);
        for (std::int64_t n = 1; n <= c.horizon; ++n) {
            sw[n] = sw[n - 1] + c.log_w[n - 1];
            swp[n] = swp[n - 1] + c.log_wp[n - 1];
        }
        for (const auto& [i, v] : c.z) {
            zidx.push_back(i);
            zlog.push_back(log_abs(v));
            head_w.push_back(exact_prefix(c.w, c.block_prefix_w, i) * v);
            head_wp.push_back(exact_prefix(c.wp, c.block_prefix_wp, i) * v);
        }
    }

    // Exact w_1···w_i for i inside the first p entries of a block (or before n_1).
    mpq_class exact_prefix(const std::vector<mpq_class>& w, const std::vector<mpq_class>& block_prefix,
                           std::int64_t i) const {
        auto it = std::upper_bound(c.blocks.begin(), c.blocks.end(), i);
        mpq_class r = 1;
        std::int64_t from = 1;
        if (it != c.blocks.begin()) {
            std::size_t k = std::distance(c.blocks.begin(), it) - 1;
            r = block_prefix[k];
            from = c.blocks[k];
        }
        for (std::int64_t j = from; j <= i; ++j) r *= w[j - 1];
        return r;
    }

    // ‖B^n z − target‖₁ over the stored support.
    // ‖B^n z − target‖₁ over the stored support; returns early once the sum exceeds cutoff.
    long double distance(std::int64_t n, bool primed, const std::vector<mpq_class>& target,
                         long double cutoff = INFINITY) const {
        const auto& w = primed ? c.wp : c.w;
        const auto& bp = primed ? c.block_prefix_wp : c.block_prefix_w;
        const auto& s = primed ? swp : sw;
        const std::int64_t p = static_cast<std::int64_t>(target.size());
        const std::size_t first = std::distance(zidx.begin(), std::lower_bound(zidx.begin(), zidx.end(), n));
        long double total = 0;
        std::size_t q = first;
        for (std::int64_t j = 0; j < p; ++j) {
            if (q < zidx.size() && zidx[q] == n + j) {
                mpq_class v = (primed ? head_wp : head_w)[q] / exact_prefix(w, bp, j);
                total += magnitude(v - target[j]);
                ++q;
            } else {
                total += magnitude(target[j]);
            }
        }
        for (; q < zidx.size() && total <= cutoff; ++q) {
            const std::int64_t i = zidx[q];
            long double e = s[i] - s[i - n] + zlog[q];
            if (e > -700) total += std::exp(static_cast<double>(e));
            else if (e > -11000) total += std::exp(e);
        }
        return total;
    }

    static long double magnitude(const mpq_class& v) { return sgn(v) == 0 ? 0.0L : std::exp(log_abs(v)); }
};

}  // namespace

OrbitSeries orbit_distance_series(const DfhcConstruction& c, int p, const std::optional<IntegerSet>& a) {
    if (p < 1 || p > c.count) throw RangeError("p outside the covered range");
    const IntegerSet& set = a ? *a : c.a_sets[p - 1];
    if (!set.empty() && set.elements().back() > c.horizon) throw PreconditionError("A exceeds the horizon");
    OrbitEvaluator ev(c);
    OrbitSeries out;
    out.p = p;
    out.epsilon = epsilon_bound(c.n_schedule, p);
    long double tb = 0;
    for (int q = 1; q <= c.count; ++q) tb += 1.5L * std::pow(5.0L, q) * q * q;
    std::int64_t nmax = set.empty() ? 0 : set.elements().back();
    out.truncation_bound = tb * std::exp(-(long double)(c.horizon + 1 - nmax) * std::log(3.0L));
    for (auto n : set.elements())
        out.rows.push_back(OrbitDistance{n, ev.distance(n, false, c.targets[p - 1].a),
                                         ev.distance(n, true, c.targets[p - 1].b)});
    return out;
}

IntegerSet simultaneous_visits(const DfhcConstruction& c, int p, long double eps) {
    if (p < 1 || p > c.count) throw RangeError("p outside the covered range");
    OrbitEvaluator ev(c);
    const auto& t = c.targets[p - 1];
    long double floor_a = INFINITY;
    for (const auto* v : {&t.a, &t.b})
        for (const auto& x : *v) floor_a = std::min<long double>(floor_a, mpq_class(abs(x)).get_d());
    // When eps is below every target modulus, a visit needs z_n ≠ 0.
    std::vector<std::int64_t> cand;
    if (eps <= floor_a) cand = ev.zidx;
    else
        for (std::int64_t n = 1; n <= c.horizon; ++n) cand.push_back(n);
    std::vector<std::int64_t> out;
    for (auto n : cand)
        if (ev.distance(n, false, t.a, eps) < eps && ev.distance(n, true, t.b, eps) < eps) out.push_back(n);
    return IntegerSet(std::move(out), c.horizon);
}

// ---------------------------------------------------------------------------

nlohmann::json ws_report_json(const WsReport& r) {
    return nlohmann::json{{"ws1", r.ws1},
                          {"ws2a", r.ws2a},
                          {"ws2b", r.ws2b},
                          {"ws2c", r.ws2c},
                          {"ws2d", r.ws2d},
                          {"ws3", r.ws3},
                          {"ws4", r.ws4},
                          {"passed", r.passed()},
                          {"ws3_worst_ratio", r.ws3_worst_ratio},
                          {"ws4_worst_margin", r.ws4_worst_margin},
                          {"blocks_checked", r.blocks_checked},
                          {"failures", r.failures}};
}

nlohmann::json construction_summary_json(const DfhcConstruction& c, bool include_weights) {
    using nlohmann::json;
    json j;
    j["horizon"] = c.horizon;
    j["coverage"] = c.count;
    j["N"] = c.n_schedule;
    j["set_source"] = c.source;
    j["design_density"] = c.design_density;
    json sets = json::array();
    for (int k = 0; k < c.count; ++k) {
        const auto& a = c.a_sets[k];
        sets.push_back({{"p", k + 1},
                        {"size", a.size()},
                        {"min", a.empty() ? json(nullptr) : json(a.elements().front())},
                        {"density_at_horizon", a.empty() ? 0.0 : double(a.size()) / double(c.horizon)}});
    }
    j["sets"] = sets;
    j["blocks"] = c.blocks.size();
    json tg = json::array();
    for (int k = 0; k < c.count; ++k) {
        json a = json::array(), b = json::array();
        for (const auto& x : c.targets[k].a) a.push_back(x.get_str());
        for (const auto& x : c.targets[k].b) b.push_back(x.get_str());
        tg.push_back({{"p", k + 1}, {"x", a}, {"y", b}});
    }
    j["targets"] = tg;
    json sched = json::array();
    for (const auto& pc : c.schedule_report.per_p) {
        json rows = json::array();
        for (const auto& [name, value, ok] : pc.rows) rows.push_back({{"condition", name}, {"value", value}, {"ok", ok}});
        sched.push_back({{"p", pc.p}, {"N_p", pc.n_p}, {"rows", rows}, {"passed", pc.passed}});
    }
    j["schedule"] = sched;
    j["set_certificate"] = certificate_to_json(c.set_certificate);
    j["notes"] = c.notes;
    if (include_weights) {
        json w = json::array(), wp = json::array(), z = json::array();
        for (const auto& x : c.w) w.push_back(x.get_str());
        for (const auto& x : c.wp) wp.push_back(x.get_str());
        for (const auto& [i, v] : c.z) z.push_back({i, v.get_str()});
        j["w"] = w;
        j["w_prime"] = wp;
        j["z"] = z;
    }
    return j;
}

}  // namespace hclab
