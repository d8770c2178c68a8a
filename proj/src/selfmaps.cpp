#include "hclab/selfmaps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hclab/errors.hpp"

namespace hclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Solves g x = r (real matrix, complex right-hand side) by partial pivoting.
std::vector<cplx> solve(std::vector<std::vector<double>> g, std::vector<cplx> r) {
    const std::size_t k = r.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < k; ++i)
            if (std::fabs(g[i][col]) > std::fabs(g[piv][col])) piv = i;
        std::swap(g[col], g[piv]);
        std::swap(r[col], r[piv]);
        if (g[col][col] == 0.0) throw ApproximationError("singular regression system");
        for (std::size_t i = col + 1; i < k; ++i) {
            double f = g[i][col] / g[col][col];
            for (std::size_t j = col; j < k; ++j) g[i][j] -= f * g[col][j];
            r[i] -= f * r[col];
        }
    }
    std::vector<cplx> x(k);
    for (std::size_t i = k; i-- > 0;) {
        cplx s = r[i];
        for (std::size_t j = i + 1; j < k; ++j) s -= g[i][j] * x[j];
        x[i] = s / g[i][i];
    }
    return x;
}

std::vector<cplx> orbit(const HalfPlaneMap& psi, cplx w, long n_max) {
    std::vector<cplx> out;
    out.reserve(n_max + 1);
    out.push_back(w);
    for (long n = 1; n <= n_max; ++n) {
        w = psi(w);
        out.push_back(w);
    }
    return out;
}

}  // namespace

double hyperbolic_distance(cplx w1, cplx w2) {
    if (!(w1.real() > 0.0) || !(w2.real() > 0.0)) return kInf;
    const double den2 = std::norm(w1 + std::conj(w2));
    const double p = std::abs(w1 - w2) / std::sqrt(den2);
    // 1 − p² = 4 Re w₁ Re w₂ / |w₁ + w̄₂|²
    const double one_minus_p2 = 4.0 * w1.real() * w2.real() / den2;
    return std::max(0.0, 2.0 * std::log1p(p) - std::log(one_minus_p2));
}

double hyperbolic_distance_disc(cplx z1, cplx z2) {
    if (!(std::abs(z1) < 1.0) || !(std::abs(z2) < 1.0)) return kInf;
    return hyperbolic_distance(cayley(z1), cayley(z2));
}

OrbitAsymptotics orbit_asymptotics(const HalfPlaneMap& psi, Regime regime, const AsymptoticsOptions& opts) {
    if (opts.n_max < 4) throw ArgumentError("n_max must be at least 4");
    if (opts.probes.empty()) throw ArgumentError("at least one probe point is required");
    for (auto w : opts.probes)
        if (!(w.real() > 0.0)) throw ArgumentError("probe points must lie in the open right half-plane");
    if (!psi.is_self_map()) throw DomainError("map '" + psi.name + "' does not preserve the right half-plane");

    OrbitAsymptotics r;
    r.regime = regime;
    std::optional<MobiusMap> affine;
    if (psi.is_linear_fractional()) {
        MobiusMap disc = psi.disc_map();
        auto cls = classify(disc);
        const LfmKind want = regime == Regime::parabolic ? LfmKind::parabolic : LfmKind::hyperbolic;
        if (cls.kind != want)
            throw RegimeError("map classifies as " + to_string(cls.kind) + ", not as the requested regime");
        if (std::abs(cls.alpha - 1.0) > 1e-9) throw PreconditionError("Denjoy-Wolff point must be 1");
        if (regime == Regime::parabolic) {
            r.a = disc.derivative(1.0, 2);
            cplx d3 = disc.derivative(1.0, 3);
            r.b = (r.a * r.a - 2.0 * d3 / 3.0) / r.a;
        } else {
            r.lambda = 1.0 / cls.lambda.real();
            MobiusMap h = psi.mobius().normalized();
            if (std::abs(h.c) <= 1e-14 * std::abs(h.d)) affine = h;
        }
        r.has_analytic = true;
    } else if (regime == Regime::parabolic && psi.d2 && psi.d3) {
        r.a = *psi.d2;
        r.b = (r.a * r.a - 2.0 * *psi.d3 / 3.0) / r.a;
        r.has_analytic = true;
    } else if (regime == Regime::hyperbolic) {
        if (!psi.multiplier) throw ArgumentError("numeric hyperbolic map needs its multiplier");
        r.lambda = *psi.multiplier;
        r.has_analytic = true;
    }
    if (regime == Regime::parabolic && r.has_analytic && r.a == cplx(0.0))
        throw RegimeError("phi''(1) = 0: not a parabolic map");

    const long n_max = opts.n_max;
    std::vector<std::vector<cplx>> orbits;
    for (auto w : opts.probes) {
        if (regime == Regime::hyperbolic && affine) {
            // vₙ = ψⁿ(w)/λⁿ via vₙ₊₁ = (A/λ) vₙ + B/λⁿ⁺¹, free of overflow.
            cplx A = affine->a / affine->d, B = affine->b / affine->d;
            std::vector<cplx> v{w};
            long double scale = 1.0L;
            for (long n = 1; n <= n_max; ++n) {
                scale /= (long double)r.lambda;
                v.push_back(A / r.lambda * v.back() + B * double(scale));
            }
            orbits.push_back(std::move(v));
        } else {
            orbits.push_back(orbit(psi, w, n_max));
        }
    }

    if (regime == Regime::parabolic) {
        // Basis n, log n, 1 and the first correction terms log n / n, 1/n.
        constexpr int kB = 5;
        std::vector<std::vector<double>> g(kB, std::vector<double>(kB, 0.0));
        std::vector<cplx> rhs(kB);
        for (const auto& o : orbits)
            for (long n = std::max<long>(opts.fit_from, 2); n <= n_max; ++n) {
                const double ln = std::log(double(n));
                const double x[kB] = {double(n), ln, 1.0, ln / n, 1.0 / n};
                for (int i = 0; i < kB; ++i) {
                    for (int k = 0; k < kB; ++k) g[i][k] += x[i] * x[k];
                    rhs[i] += x[i] * o[n];
                }
            }
        auto sol = solve(g, rhs);
        r.a_fit = sol[0];
        r.b_fit = sol[1];
        if (!r.has_analytic) {
            r.a = r.a_fit;
            r.b = r.b_fit;
        }
    }

    r.bounded = true;
    for (std::size_t i = 0; i < opts.probes.size(); ++i) {
        ResidualSeries s;
        s.probe = opts.probes[i];
        bool finite = true;
        for (long n = 0; n <= n_max; ++n) {
            cplx v = orbits[i][n];
            cplx res;
            if (regime == Regime::parabolic) {
                res = v - r.a * double(n) - (n > 0 ? r.b * std::log(double(n)) : 0.0);
            } else if (affine) {
                res = v - s.probe;
            } else {
                res = v / std::pow(r.lambda, double(n)) - s.probe;
            }
            if (!std::isfinite(res.real()) || !std::isfinite(res.imag())) {
                finite = false;
                break;
            }
            s.rows.emplace_back(n, res);
            if (n == 0) continue;
            (2 * n <= n_max ? s.first_half_max : s.second_half_max) =
                std::max(2 * n <= n_max ? s.first_half_max : s.second_half_max, std::abs(res));
        }
        s.bounded = finite && s.second_half_max <= 2.0 * s.first_half_max + 1e-12 * (1.0 + s.first_half_max);
        r.bounded = r.bounded && s.bounded;
        r.residuals.push_back(std::move(s));
    }
    if (!r.bounded && !opts.allow_divergent)
        throw RegimeError("orbit residuals are not bounded over the probed range");
    return r;
}

nlohmann::json asymptotics_to_json(const OrbitAsymptotics& r, bool include_rows) {
    nlohmann::json j{{"regime", r.regime == Regime::parabolic ? "parabolic" : "hyperbolic"},
                     {"has_analytic", r.has_analytic},
                     {"bounded", r.bounded}};
    if (r.regime == Regime::parabolic) {
        j["a"] = complex_to_json(r.a);
        j["b"] = complex_to_json(r.b);
        j["a_fit"] = complex_to_json(r.a_fit);
        j["b_fit"] = complex_to_json(r.b_fit);
    } else {
        j["lambda"] = r.lambda;
    }
    auto arr = nlohmann::json::array();
    for (const auto& s : r.residuals) {
        nlohmann::json e{{"probe", complex_to_json(s.probe)},
                         {"first_half_max", s.first_half_max},
                         {"second_half_max", s.second_half_max},
                         {"bounded", s.bounded}};
        if (include_rows) {
            auto rows = nlohmann::json::array();
            for (const auto& [n, v] : s.rows) rows.push_back({n, v.real(), v.imag()});
            e["rows"] = rows;
        }
        arr.push_back(e);
    }
    j["residuals"] = arr;
    return j;
}

ValironReport valiron_iterates(int n_max) {
    if (n_max < 0 || n_max > 60) throw RangeError("valiron_iterates supports 0 <= n_max <= 60");
    ValironReport r;
    const long double log2 = std::log(2.0L);
    long double L = 0.0L;  // log ψ₂ⁿ(1)
    for (int n = 0; n <= n_max; ++n) {
        r.rows.push_back(ValironRow{n, L, std::exp(L - n * log2)});
        // log(x + 3) = L + log1p(3e^{−L})
        long double lx3 = L + std::log1p(3.0L * std::exp(-L));
        L = log2 + L + std::log1p(1.0L / lx3);
    }
    r.increasing = true;
    for (std::size_t i = 1; i < r.rows.size(); ++i) r.increasing = r.increasing && r.rows[i].q > r.rows[i - 1].q;
    return r;
}

nlohmann::json valiron_to_json(const ValironReport& r) {
    auto rows = nlohmann::json::array();
    for (const auto& x : r.rows) rows.push_back({{"n", x.n}, {"log_value", double(x.log_value)}, {"q", double(x.q)}});
    return {{"increasing", r.increasing}, {"rows", rows}};
}

SeparationProfile orbit_separation_profile(const HalfPlaneMap& psi1, const HalfPlaneMap& psi2, int n_max) {
    if (n_max < 0) throw ArgumentError("n_max must be nonnegative");
    for (const HalfPlaneMap* p : {&psi1, &psi2}) {
        if (!p->is_self_map()) throw DomainError("map '" + p->name + "' does not preserve the right half-plane");
        if (p->is_linear_fractional() && classify(p->disc_map()).kind == LfmKind::elliptic_or_loxodromic)
            throw PreconditionError("map '" + p->name + "' has an interior fixed point");
    }
    auto o1 = orbit(psi1, 1.0, n_max), o2 = orbit(psi2, 1.0, n_max);
    SeparationProfile s;
    s.n_max = n_max;
    s.table.assign(n_max + 1, std::vector<double>(n_max + 1, kNaN));
    auto usable = [](cplx w) { return std::isfinite(w.real()) && std::isfinite(w.imag()) && w.real() > 0.0; };
    for (int m = 0; m <= n_max; ++m)
        for (int n = 0; n <= n_max; ++n)
            if (usable(o1[m]) && usable(o2[n])) s.table[m][n] = hyperbolic_distance(o1[m], o2[n]);
    // Suffix minima over the square [N, n_max]².
    s.tail_min.assign(n_max + 1, kInf);
    double run = kInf;
    for (int N = n_max; N >= 0; --N) {
        for (int k = N; k <= n_max; ++k) {
            if (!std::isnan(s.table[N][k])) run = std::min(run, s.table[N][k]);
            if (!std::isnan(s.table[k][N])) run = std::min(run, s.table[k][N]);
        }
        s.tail_min[N] = run;
    }
    s.tail_min_nondecreasing = true;
    for (int N = 1; N <= n_max; ++N)
        s.tail_min_nondecreasing = s.tail_min_nondecreasing && s.tail_min[N] >= s.tail_min[N - 1];
    return s;
}

nlohmann::json separation_to_json(const SeparationProfile& p, bool include_table) {
    auto num = [](double x) -> nlohmann::json {
        if (std::isnan(x)) return "out_of_range";
        if (std::isinf(x)) return "infinity";
        return x;
    };
    auto tail = nlohmann::json::array();
    for (double x : p.tail_min) tail.push_back(num(x));
    nlohmann::json j{{"label", p.label},
                     {"n_max", p.n_max},
                     {"tail_min", tail},
                     {"tail_min_nondecreasing", p.tail_min_nondecreasing}};
    if (include_table) {
        auto t = nlohmann::json::array();
        for (const auto& row : p.table) {
            auto r = nlohmann::json::array();
            for (double x : row) r.push_back(num(x));
            t.push_back(r);
        }
        j["table"] = t;
    }
    return j;
}

}  // namespace hclab
