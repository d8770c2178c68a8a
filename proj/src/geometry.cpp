// Checkers for the geometric lemmas on linear-fractional self-maps. Each check
// evaluates both sides of the lemma's inequality on a parameter grid and fits the
// smallest constant; stability compares the constants fitted on the two halves of
// the main index range.
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hclab/errors.hpp"
#include "hclab/selfmaps.hpp"

namespace hclab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
const Circle kUnit{0.0, 1.0};

bool angle_in_arc(double t, double t0, double t1) {
    double off = std::fmod(t - t0, 2 * kPi);
    if (off < 0) off += 2 * kPi;
    return off <= (t1 - t0) + 1e-12;
}

cplx circumcenter(cplx z1, cplx z2, cplx z3) {
    cplx a = z1 - z3, b = z2 - z3;
    double den = 2.0 * (std::conj(a) * b).imag();
    if (den == 0.0) throw DomainError("collinear points have no circumcircle");
    return z3 - cplx(0.0, 1.0) * (std::norm(a) * b - std::norm(b) * a) / den;
}

struct MapInfo {
    MobiusMap disc;
    MobiusMap half;
    LfmClassification cls;
};

MapInfo lfm_info(const LemmaParams& p, const std::string& id) {
    if (!p.map.is_linear_fractional())
        throw PreconditionError(id + " requires a linear-fractional map, got '" + p.map.name + "'");
    MapInfo m{p.map.disc_map(), p.map.mobius().normalized(), {}};
    m.cls = classify(m.disc);
    if (m.cls.kind != LfmKind::elliptic_or_loxodromic && std::abs(m.cls.alpha - 1.0) > 1e-9)
        throw PreconditionError(id + " expects the Denjoy-Wolff point at 1");
    return m;
}

void require_hyperbolic(const MapInfo& m, const std::string& id) {
    if (m.cls.kind != LfmKind::hyperbolic) throw PreconditionError(id + " requires a hyperbolic map");
}

// The iterate ψᵏ = A w + B of a map fixing ∞ in the half-plane.
std::pair<cplx, cplx> affine_iterate(const MobiusMap& half, long k) {
    MobiusMap it = iterate(half, k).normalized();
    if (std::abs(it.c) > 1e-12 * std::max(std::abs(it.a), std::abs(it.d)))
        throw PreconditionError("half-plane model does not fix infinity");
    return {it.a / it.d, it.b / it.d};
}

// Arc length of {z ∈ 𝕋 : |ψᵏ(𝒞 z) + 1| ≤ R} for ψᵏ(w) = A w + B, i.e. of the points
// z = 𝒞⁻¹(it) whose image stays outside the disc D(1, 2/R).
double escape_arc_length(cplx A, cplx B, double R) {
    cplx u = cplx(0.0, 1.0) * A, v = B + 1.0;
    double uu = std::norm(u);
    double cross = (std::conj(u) * v).imag();
    double disc = R * R * uu - cross * cross;
    if (disc <= 0.0) return 0.0;
    double tc = -(std::conj(u) * v).real() / uu;
    double h = std::sqrt(disc) / uu;
    return 2 * kPi * minv_interval(tc - h, tc + h);
}

void finalize(CheckReport& r, const std::vector<std::pair<int, double>>& index_ratio, int lo, int hi) {
    const int mid = lo + (hi - lo) / 2;
    r.constant = r.constant_first_half = r.constant_second_half = 0.0;
    for (auto [i, x] : index_ratio) {
        r.constant = std::max(r.constant, x);
        (i <= mid ? r.constant_first_half : r.constant_second_half) =
            std::max(i <= mid ? r.constant_first_half : r.constant_second_half, x);
    }
    if (r.constant_first_half > 0) r.stability_ratio = r.constant_second_half / r.constant_first_half;
    else r.stability_ratio = r.constant_second_half > 0 ? kInf : 0.0;
    r.stable = std::isfinite(r.constant) && r.stability_ratio <= 2.0;
    r.passed = r.stable;
}

void check_range(const LemmaParams& p, int min_allowed) {
    if (p.index_min < min_allowed || p.index_max < p.index_min + 1)
        throw PreconditionError("index range must satisfy " + std::to_string(min_allowed) +
                                " <= index_min < index_max");
}

CheckReport hypdifferent1(const LemmaParams& p) {
    const std::string id = "coh2hypdifferent1";
    MapInfo m = lfm_info(p, id);
    const bool parabolic = m.cls.kind == LfmKind::parabolic;
    if (!(m.cls.kind == LfmKind::hyperbolic || (parabolic && m.cls.is_automorphism)))
        throw PreconditionError(id + " requires a hyperbolic map or a parabolic automorphism");
    check_range(p, parabolic ? 1 : 0);
    if (!(p.delta0 > 0.0 && p.delta0 < 1.0)) throw PreconditionError("delta0 must lie in (0, 1)");
    for (double d : p.deltas)
        if (!(d > 0.0 && d < p.delta0)) throw PreconditionError("every delta must lie in (0, delta0)");
    // ξ ∈ 𝕋 with |ξ − 1| ≥ 2δ₀, i.e. |arg ξ| ≥ 2 asin(δ₀).
    const double amin = 2.0 * std::asin(p.delta0);
    std::vector<cplx> xis;
    for (int j = 0; j < p.xi_count; ++j) {
        double t = amin + (2 * kPi - 2 * amin) * j / std::max(1, p.xi_count - 1);
        xis.push_back(std::polar(1.0, t));
    }
    const double lambda = m.cls.lambda.real();

    CheckReport r;
    r.lemma_id = id;
    r.param_names = {"l", "delta", "xi_arg"};
    std::vector<std::pair<int, double>> idx;
    for (int l = p.index_min; l <= p.index_max; ++l) {
        MobiusMap inv = iterate(m.disc, -l);
        auto pole = inv.pole();
        for (double delta : p.deltas) {
            CheckRow worst{{double(l), delta, 0.0}, 0.0, 0.0, -1.0};
            const double rhs = parabolic ? delta / (double(l) * l) : delta * std::pow(lambda, l);
            for (cplx xi : xis) {
                Circle small{xi, delta};
                cplx q = inv(xi);
                double lhs = 0.0;
                if (pole && std::abs(*pole - xi) <= delta && std::abs(*pole) <= 1.0) lhs = kInf;
                for (auto [t0, t1] : arcs_relative_to(small, kUnit, true))
                    lhs = std::max(lhs, max_distance_on_arc(inv, small, t0, t1, q));
                for (auto [t0, t1] : arcs_relative_to(kUnit, small, true))
                    lhs = std::max(lhs, max_distance_on_arc(inv, kUnit, t0, t1, q));
                double ratio = lhs / rhs;
                if (ratio > worst.ratio) worst = CheckRow{{double(l), delta, std::arg(xi)}, lhs, rhs, ratio};
            }
            r.rows.push_back(worst);
            idx.emplace_back(l, worst.ratio);
        }
    }
    finalize(r, idx, p.index_min, p.index_max);
    r.notes.push_back(parabolic ? "radius scale delta/l^2" : "radius scale delta*lambda^l");
    r.extra = {{"lambda", lambda}, {"delta0", p.delta0}, {"xi_count", xis.size()}};
    return r;
}

CheckReport hypdifferent2(const LemmaParams& p) {
    const std::string id = "coh2hypdifferent2";
    MapInfo m = lfm_info(p, id);
    require_hyperbolic(m, id);
    if (m.cls.beta_at_infinity) throw PreconditionError(id + " needs a finite repulsive fixed point");
    check_range(p, 1);
    const double lambda = m.cls.lambda.real();
    const cplx beta = m.cls.beta, alpha = m.cls.alpha;

    CheckReport r;
    r.lemma_id = id;
    r.param_names = {"l", "radius"};
    std::vector<std::pair<int, double>> idx;
    for (int l = p.index_min; l <= p.index_max; ++l) {
        MobiusMap inv = iterate(m.disc, -l);
        const double rad = std::pow(lambda, 0.5 * l);
        Circle hole{alpha, rad};
        double lhs = 0.0;
        if (auto pole = inv.pole(); pole && std::abs(*pole) <= 1.0 && std::abs(*pole - alpha) >= rad) lhs = kInf;
        for (auto [t0, t1] : arcs_relative_to(kUnit, hole, false))
            lhs = std::max(lhs, max_distance_on_arc(inv, kUnit, t0, t1, beta));
        for (auto [t0, t1] : arcs_relative_to(hole, kUnit, true))
            lhs = std::max(lhs, max_distance_on_arc(inv, hole, t0, t1, beta));
        r.rows.push_back(CheckRow{{double(l), rad}, lhs, rad, lhs / rad});
        idx.emplace_back(l, lhs / rad);
    }
    finalize(r, idx, p.index_min, p.index_max);
    r.extra = {{"lambda", lambda}, {"beta", complex_to_json(beta)}};
    return r;
}

CheckReport hypdifferent4(const LemmaParams& p) {
    const std::string id = "coh2hypdifferent4";
    MapInfo m = lfm_info(p, id);
    require_hyperbolic(m, id);
    check_range(p, 0);
    for (double d : p.deltas)
        if (!(d > 0.0 && d < 1.0)) throw PreconditionError("every delta must lie in (0, 1)");
    const double lambda = m.cls.lambda.real();

    CheckReport r;
    r.lemma_id = id;
    r.param_names = {"k", "delta"};
    std::vector<std::pair<int, double>> idx;
    for (int k = p.index_min; k <= p.index_max; ++k) {
        auto [A, B] = affine_iterate(m.half, k);
        for (double delta : p.deltas) {
            double meas = escape_arc_length(A, B, 2.0 / delta);
            double rhs = std::pow(lambda, k) / delta;
            r.rows.push_back(CheckRow{{double(k), delta}, meas, rhs, meas / rhs});
            idx.emplace_back(k, meas / rhs);
        }
    }
    finalize(r, idx, p.index_min, p.index_max);
    r.notes.push_back("measure is arc length on the unit circle");
    r.extra = {{"lambda", lambda}};
    return r;
}

CheckReport pardifferent(const LemmaParams& p) {
    const std::string id = "coh2pardifferent";
    MapInfo m = lfm_info(p, id);
    if (!(m.cls.kind == LfmKind::parabolic && m.cls.is_automorphism))
        throw PreconditionError(id + " requires a parabolic automorphism");
    check_range(p, 1);
    auto [A1, B1] = affine_iterate(m.half, 1);
    const double tau = B1.imag();
    if (std::abs(A1 - 1.0) > 1e-12 || tau == 0.0) throw PreconditionError("half-plane model is not w + i tau");
    // 𝒞(D(1,δ) ∩ 𝕋) ⊇ {it : |t| ≥ C₀/δ} with C₀ = 2; C₁ is chosen with C₀/C₁ = |τ|/2.
    const double c0 = 2.0, c1 = 2.0 * c0 / std::fabs(tau);

    CheckReport r;
    r.lemma_id = id;
    r.param_names = {"k", "radius"};
    std::vector<std::pair<int, double>> idx;
    for (int k = p.index_min; k <= p.index_max; ++k) {
        auto [A, B] = affine_iterate(m.half, k);
        double meas = escape_arc_length(A, B, 2.0 * k / c1);
        double rhs = 1.0 / k;
        r.rows.push_back(CheckRow{{double(k), c1 / k}, meas, rhs, meas / rhs});
        idx.emplace_back(k, meas / rhs);
    }
    finalize(r, idx, p.index_min, p.index_max);
    r.notes.push_back("measure is arc length on the unit circle");
    r.extra = {{"tau", tau}, {"C0", c0}, {"C1", c1}};
    return r;
}

// ψⁿ on a list of half-plane points.
std::vector<cplx> push_points(const HalfPlaneMap& psi, std::vector<cplx> pts, long n,
                              const std::optional<MobiusMap>& half) {
    if (half) {
        MobiusMap it = iterate(*half, n);
        for (auto& w : pts) w = it(w);
        return pts;
    }
    for (long i = 0; i < n; ++i)
        for (auto& w : pts) w = psi(w);
    return pts;
}

// Returns φ′(1) for hyperbolic maps with Denjoy–Wolff point 1.
double hyperbolic_derivative(const LemmaParams& p, const std::string& id, std::optional<MobiusMap>& half) {
    if (p.map.is_linear_fractional()) {
        MapInfo m = lfm_info(p, id);
        require_hyperbolic(m, id);
        half = m.half;
        return m.cls.lambda.real();
    }
    if (!p.map.multiplier || !(*p.map.multiplier > 1.0))
        throw PreconditionError(id + " needs the multiplier (> 1) of a numeric map");
    return 1.0 / *p.map.multiplier;
}

CheckReport separed(const LemmaParams& p) {
    const std::string id = "separedhyperbolic";
    std::optional<MobiusMap> half;
    const double dphi = hyperbolic_derivative(p, id, half);
    check_range(p, 1);
    if (!(p.eta > 0.0 && p.eta < 1.0)) throw PreconditionError("eta must lie in (0, 1)");
    if (!(p.radius > 0.0 && p.radius < 1.0)) throw PreconditionError("radius must lie in (0, 1)");
    // Boundary of K in the half-plane; extremes of 1 − |z| over φⁿ(K) sit on φⁿ(∂K).
    std::vector<cplx> pts;
    const int ns = std::max(64, p.boundary_samples * 4);
    for (int i = 0; i < ns; ++i) pts.push_back(cayley(std::polar(p.radius, 2 * kPi * i / ns)));
    auto one_minus_abs = [](cplx w) {
        double one_minus_sq = 4.0 * w.real() / std::norm(w + 1.0);
        return one_minus_sq / (1.0 + std::sqrt(std::max(0.0, 1.0 - one_minus_sq)));
    };

    CheckReport r;
    r.lemma_id = id;
    r.param_names = {"n", "min_1_minus_abs", "C_lo"};
    std::vector<std::pair<int, double>> idx;
    std::vector<double> lo(p.index_max + 1), hi(p.index_max + 1);
    double clo_first = kInf, clo_second = kInf;
    const int mid = p.index_min + (p.index_max - p.index_min) / 2;
    std::vector<cplx> cur = push_points(p.map, pts, p.index_min, half);
    for (int n = p.index_min; n <= p.index_max; ++n) {
        if (n > p.index_min) cur = push_points(p.map, cur, 1, half);
        double mn = kInf, mx = 0.0;
        for (auto w : cur) {
            double v = one_minus_abs(w);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        lo[n] = mn;
        hi[n] = mx;
        double scale = std::pow(dphi, n);
        double clo = mn / scale;
        (n <= mid ? clo_first : clo_second) = std::min(n <= mid ? clo_first : clo_second, clo);
        r.rows.push_back(CheckRow{{double(n), mn, clo}, mx, scale, mx / scale});
        idx.emplace_back(n, mx / scale);
    }
    finalize(r, idx, p.index_min, p.index_max);
    const double lo_ratio = clo_second > 0 ? clo_first / clo_second : kInf;
    const bool lo_stable = std::isfinite(lo_ratio) && lo_ratio <= 2.0;
    // Smallest N from which the two-sided inclusion holds up to index_max.
    int first_ok = -1;
    for (int n = p.index_max; n >= p.index_min; --n) {
        bool ok = std::pow((1 - p.eta) * dphi, n) <= lo[n] && hi[n] <= std::pow((1 + p.eta) * dphi, n);
        if (!ok) break;
        first_ok = n;
    }
    r.stable = r.stable && lo_stable;
    r.passed = r.stable && first_ok >= 0;
    r.extra = {{"phi_prime_alpha", dphi},
               {"C_lo_first_half", clo_first},
               {"C_lo_second_half", clo_second},
               {"C_lo_ratio", lo_ratio},
               {"N", first_ok >= 0 ? nlohmann::json(first_ok) : nlohmann::json(nullptr)}};
    r.notes.push_back("constant is sup (1-|z|)/phi'(alpha)^n over phi^n(K); C_lo is the matching infimum");
    return r;
}

// Is every point of `pts` inside the closed polygon `poly` (winding number)?
bool inside_polygon(const std::vector<cplx>& poly, cplx z) {
    double wind = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        cplx a = poly[i] - z, b = poly[(i + 1) % poly.size()] - z;
        if (std::abs(a) == 0.0) return true;
        wind += std::arg(b / a);
    }
    return std::fabs(wind) > kPi;
}

std::vector<cplx> rectangle_boundary(cplx center, double hx, double hy, int per_side) {
    std::vector<cplx> out;
    const cplx corners[4] = {center + cplx(hx, -hy), center + cplx(hx, hy), center + cplx(-hx, hy),
                             center + cplx(-hx, -hy)};
    for (int s = 0; s < 4; ++s)
        for (int i = 0; i < per_side; ++i)
            out.push_back(corners[s] + (corners[(s + 1) % 4] - corners[s]) * (double(i) / per_side));
    return out;
}

CheckReport koebe(const LemmaParams& p) {
    const std::string id = "koebehyperbolic";
    std::optional<MobiusMap> half;
    const double lambda = 1.0 / hyperbolic_derivative(p, id, half);
    check_range(p, 1);
    if (!(std::fabs(p.theta) < kPi / 2)) throw PreconditionError("theta must lie in (-pi/2, pi/2)");
    for (double d : p.deltas)
        if (!(d > 0.0 && d < 0.25)) throw PreconditionError("every delta must lie in (0, 1/4)");
    std::vector<double> xs = p.x_grid;
    if (xs.empty())
        for (int i = 0; i <= 60; ++i) xs.push_back(std::pow(10.0, i / 10.0));
    std::sort(xs.begin(), xs.end());
    if (xs.front() <= 0.0) throw PreconditionError("x grid must be positive");
    const double ct = std::cos(p.theta);

    CheckReport r;
    r.lemma_id = id;
    r.param_names = {"x", "n", "delta"};
    const int mid = p.index_min + (p.index_max - p.index_min) / 2;
    // ok[h][i]: containment for x_i and every n of half h (and every δ).
    std::vector<std::vector<bool>> ok(2, std::vector<bool>(xs.size(), true));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const cplx w0 = std::polar(x, p.theta);
        for (double delta : p.deltas)
            for (int n = p.index_min; n <= p.index_max; ++n) {
                const double ln = std::pow(lambda, n);
                const cplx tc = ln * w0;
                const double thx = (1 - 4 * delta) * ln * x * ct, thy = ln * x;
                double margin;
                if (half) {
                    auto [A, B] = affine_iterate(*half, n);
                    if (std::abs(A.imag()) > 1e-12 * std::abs(A)) throw PreconditionError("multiplier is not real");
                    cplx ic = A * w0 + B;
                    double ihx = A.real() * (1 - delta) * x * ct, ihy = A.real() * 4 * x;
                    margin = std::min(ihx - thx - std::fabs((ic - tc).real()), ihy - thy - std::fabs((ic - tc).imag()));
                    margin /= ln * x;
                } else {
                    auto img = push_points(p.map, rectangle_boundary(w0, (1 - delta) * x * ct, 4 * x, p.boundary_samples),
                                           n, half);
                    bool all = true;
                    for (cplx z : rectangle_boundary(tc, thx, thy, p.boundary_samples / 4 + 1))
                        all = all && inside_polygon(img, z);
                    margin = all ? 1.0 : -1.0;
                }
                const bool contained = margin >= 0.0;
                if (!contained) ok[n <= mid ? 0 : 1][i] = false;
                r.rows.push_back(CheckRow{{x, double(n), delta}, margin, 0.0, contained ? 1.0 : 0.0});
            }
    }
    auto threshold = [&](int h) {
        double x0 = kInf;
        for (std::size_t i = xs.size(); i-- > 0;) {
            if (!ok[h][i]) break;
            x0 = xs[i];
        }
        return x0;
    };
    r.constant_first_half = threshold(0);
    r.constant_second_half = threshold(1);
    r.constant = std::max(r.constant_first_half, r.constant_second_half);
    r.stability_ratio = r.constant_second_half / r.constant_first_half;
    r.stable = std::isfinite(r.constant) && r.stability_ratio <= 2.0;
    r.passed = r.stable;
    r.extra = {{"lambda", lambda}, {"theta", p.theta}, {"x0", std::isfinite(r.constant) ? nlohmann::json(r.constant) : nlohmann::json(nullptr)}};
    r.notes.push_back("constant is the smallest grid x0 with containment for all grid x >= x0; row lhs is the normalized margin");
    return r;
}

}  // namespace

double minv_interval(double t1, double t2) {
    if (t2 < t1) std::swap(t1, t2);
    if (std::isinf(t1) || std::isinf(t2)) return (std::atan(t2) - std::atan(t1)) / kPi;
    if (t1 * t2 > -1.0) return std::atan((t2 - t1) / (1.0 + t1 * t2)) / kPi;
    return (std::atan(t2) - std::atan(t1)) / kPi;
}

std::vector<std::pair<double, double>> arcs_relative_to(const Circle& a, const Circle& b, bool inside) {
    const double d = std::abs(b.center - a.center);
    const double ra = a.radius, rb = b.radius;
    if (d >= ra + rb || d <= std::fabs(ra - rb)) {
        bool in = std::abs(a.center + ra - b.center) <= rb;
        if (in == inside) return {{0.0, 2 * kPi}};
        return {};
    }
    // Angle at a.center opposite side rb, via the half-angle formula.
    const double s = 0.5 * (ra + d + rb);
    const double g = 2.0 * std::atan(std::sqrt(std::max(0.0, (s - ra) * (s - d) / (s * (s - rb)))));
    const double phi0 = std::arg(b.center - a.center);
    if (inside) return {{phi0 - g, phi0 + g}};
    return {{phi0 + g, phi0 - g + 2 * kPi}};
}

double max_distance_on_arc(const MobiusMap& m, const Circle& circle, double t0, double t1, cplx q) {
    auto at = [&](double t) { return circle.center + std::polar(circle.radius, t); };
    const double e0 = std::abs(m(at(t0)) - q), e1 = std::abs(m(at(t1)) - q);
    if (auto pole = m.pole()) {
        double off = std::fabs(std::abs(*pole - circle.center) - circle.radius);
        if (off <= 1e-12 * std::max(1.0, circle.radius)) {
            if (angle_in_arc(std::arg(*pole - circle.center), t0, t1)) return kInf;
            return std::max(e0, e1);
        }
    }
    cplx p1 = m(at(0.0)), p2 = m(at(2 * kPi / 3)), p3 = m(at(4 * kPi / 3));
    cplx cc = circumcenter(p1, p2, p3);
    double rr = std::abs(p1 - cc);
    double best = std::max(e0, e1);
    double dq = std::abs(cc - q);
    if (dq == 0.0) return rr;
    cplx far = cc + rr * (cc - q) / dq;
    cplx pre = m.inverse()(far);
    if (angle_in_arc(std::arg(pre - circle.center), t0, t1)) best = std::max(best, dq + rr);
    return best;
}

const std::vector<std::string>& lemma_ids() {
    static const std::vector<std::string> ids{"coh2hypdifferent1", "coh2hypdifferent2", "coh2hypdifferent4",
                                              "coh2pardifferent",  "separedhyperbolic", "koebehyperbolic"};
    return ids;
}

CheckReport geometric_lemma_check(const std::string& id, const LemmaParams& p) {
    if (id == "coh2hypdifferent1") return hypdifferent1(p);
    if (id == "coh2hypdifferent2") return hypdifferent2(p);
    if (id == "coh2hypdifferent4") return hypdifferent4(p);
    if (id == "coh2pardifferent") return pardifferent(p);
    if (id == "separedhyperbolic") return separed(p);
    if (id == "koebehyperbolic") return koebe(p);
    throw ArgumentError("unknown lemma id '" + id + "'");
}

nlohmann::json check_report_json(const CheckReport& r, bool include_rows) {
    auto num = [](double x) -> nlohmann::json {
        if (std::isinf(x)) return "infinity";
        if (std::isnan(x)) return nullptr;
        return x;
    };
    nlohmann::json j{{"lemma_id", r.lemma_id},
                     {"constant", num(r.constant)},
                     {"constant_first_half", num(r.constant_first_half)},
                     {"constant_second_half", num(r.constant_second_half)},
                     {"stability_ratio", num(r.stability_ratio)},
                     {"stable", r.stable},
                     {"passed", r.passed},
                     {"notes", r.notes},
                     {"extra", r.extra},
                     {"param_names", r.param_names}};
    if (include_rows) {
        auto rows = nlohmann::json::array();
        for (const auto& row : r.rows) {
            auto ps = nlohmann::json::array();
            for (double x : row.params) ps.push_back(num(x));
            rows.push_back({{"params", ps}, {"lhs", num(row.lhs)}, {"rhs", num(row.rhs)}, {"ratio", num(row.ratio)}});
        }
        j["rows"] = rows;
    }
    return j;
}

std::string check_report_csv(const CheckReport& r) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& n : r.param_names) os << n << ',';
    os << "lhs,rhs,ratio\n";
    for (const auto& row : r.rows) {
        for (double x : row.params) os << x << ',';
        os << row.lhs << ',' << row.rhs << ',' << row.ratio << '\n';
    }
    return os.str();
}

}  // namespace hclab
